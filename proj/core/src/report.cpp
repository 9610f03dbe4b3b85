#include "bsn/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bsn/error.hpp"

namespace bsn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string comparison_csv(const std::vector<MetricsReport>& reports) {
  std::ostringstream os;
  os << "policy,generated,delivered,dropped,in_flight,delivery_ratio,"
        "delay_median_h,delay_mean_h,delay_std_h,max_buffer_bytes,"
        "replicas_per_packet\n";
  char buf[256];
  for (const MetricsReport& m : reports) {
    std::snprintf(buf, sizeof(buf),
                  "%s,%lld,%lld,%lld,%lld,%.6f,%.4f,%.4f,%.4f,%lld,%.2f",
                  m.policy.c_str(), static_cast<long long>(m.generated),
                  static_cast<long long>(m.delivered),
                  static_cast<long long>(m.dropped),
                  static_cast<long long>(m.in_flight_at_end),
                  m.delivery_ratio, m.delay_median_h, m.delay_mean_h,
                  m.delay_std_h, static_cast<long long>(m.max_buffer_bytes),
                  m.replicas_per_packet);
    os << buf << "\n";
  }
  return os.str();
}

std::string qos_csv(const std::vector<TrafficResult>& results,
                    int64_t grid_minutes) {
  std::ostringstream os;
  os << "minutes,policy,fraction_delivered_within\n";
  char buf[128];
  for (const TrafficResult& r : results) {
    auto cdf = delay_cdf(r);
    if (cdf.empty()) continue;
    int64_t max_minute = cdf.back().minute;
    for (int64_t m = grid_minutes; m <= max_minute + grid_minutes;
         m += grid_minutes) {
      size_t idx = static_cast<size_t>(std::min<int64_t>(m, max_minute));
      std::snprintf(buf, sizeof(buf), "%lld,%s,%.6f",
                    static_cast<long long>(m), r.metrics.policy.c_str(),
                    cdf[idx].fraction_of_generated);
      os << buf << "\n";
    }
  }
  return os.str();
}

namespace {

std::optional<ordered_json> read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) return std::nullopt;
  try {
    ordered_json j;
    in >> j;
    return j;
  } catch (...) {
    return std::nullopt;
  }
}

struct BundleView {
  fs::path dir;
  std::optional<ordered_json> run_config;
  std::optional<ordered_json> topology;       // provenance-bearing header
  std::optional<ordered_json> trace_meta;
  std::optional<ordered_json> contact_stats;
  std::vector<ordered_json> metrics;          // per policy, sorted by name
};

BundleView load_bundle(const std::string& dir) {
  BundleView b;
  b.dir = dir;
  if (!fs::is_directory(b.dir)) {
    throw DataError("bundle directory not found: " + dir);
  }
  b.run_config = read_json(b.dir / "run_config.json");
  b.topology = read_json(b.dir / "topology.json");
  b.trace_meta = read_json(b.dir / "trace_meta.json");
  b.contact_stats = read_json(b.dir / "contact_stats.json");
  std::vector<fs::path> metric_files;
  for (const auto& entry : fs::directory_iterator(b.dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("metrics_", 0) == 0 && entry.path().extension() == ".json") {
      metric_files.push_back(entry.path());
    }
  }
  std::sort(metric_files.begin(), metric_files.end());
  for (const auto& p : metric_files) {
    auto j = read_json(p);
    if (j) b.metrics.push_back(*j);
  }
  if (!b.run_config && !b.topology && !b.trace_meta && b.metrics.empty()) {
    throw DataError("no recognizable bundle files in " + dir);
  }
  return b;
}

std::string bundle_topology_hash(const BundleView& b) {
  if (b.trace_meta && b.trace_meta->contains("topology_hash")) {
    return b.trace_meta->at("topology_hash").get<std::string>();
  }
  for (const auto& m : b.metrics) {
    if (m.contains("provenance") &&
        m.at("provenance").contains("topology_hash")) {
      return m.at("provenance").at("topology_hash").get<std::string>();
    }
  }
  return "";
}

void summarize_into(std::ostream& os, const BundleView& b) {
  os << "# Run bundle: " << b.dir.string() << "\n\n";
  if (b.run_config) {
    os << "## Configuration\n";
    if (b.run_config->contains("seed")) {
      os << "- seed: " << (*b.run_config)["seed"] << "\n";
    }
    for (const char* key : {"service_day", "radio_range_m", "rate_per_hour",
                            "bandwidth_bps", "packet_size_bytes",
                            "buffer_capacity_bytes"}) {
      if (b.run_config->contains(key)) {
        os << "- " << key << ": " << (*b.run_config)[key] << "\n";
      }
    }
    os << "\n";
  } else {
    os << "## Configuration\n- MISSING run_config.json\n\n";
  }

  std::string topo_hash = bundle_topology_hash(b);
  if (!topo_hash.empty()) os << "Topology hash: " << topo_hash << "\n\n";

  os << "## Mobility\n";
  if (b.trace_meta) {
    os << "- buses: " << b.trace_meta->value("bus_count", 0) << "\n";
    os << "- trips: " << b.trace_meta->value("trip_count", 0) << "\n";
    os << "- contacts: " << b.trace_meta->value("contact_count", 0) << "\n";
    os << "- span: " << b.trace_meta->value("start_tick", 0) << " .. "
       << b.trace_meta->value("end_tick", 0) << " s\n";
  } else {
    os << "- MISSING trace_meta.json (mobility stage not run?)\n";
  }
  os << "\n## Contact statistics\n";
  if (b.contact_stats) {
    for (const char* key : {"intra_contact", "inter_contact"}) {
      if (b.contact_stats->contains(key)) {
        const auto& st = (*b.contact_stats)[key];
        os << "- " << key << ": ";
        if (st.contains("no_contacts")) {
          os << "no contacts\n";
        } else {
          os << "median " << st.value("median_s", 0.0) << " s, mean "
             << st.value("mean_s", 0.0) << " s, std "
             << st.value("std_dev_s", 0.0) << " s ("
             << st.value("samples", 0) << " samples)\n";
        }
      }
    }
  } else {
    os << "- MISSING contact_stats.json\n";
  }

  os << "\n## Traffic\n";
  if (b.metrics.empty()) {
    os << "- MISSING per-policy metrics (traffic stage not run?)\n";
  } else {
    os << "| policy | delivered/generated | ratio | median h | mean h | "
          "drops | peak buffer |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (const auto& m : b.metrics) {
      char buf[256];
      std::snprintf(
          buf, sizeof(buf), "| %s | %lld/%lld | %.4f | %.3f | %.3f | %lld | "
                            "%lld |",
          m.value("policy", std::string("?")).c_str(),
          static_cast<long long>(m.value("delivered", 0ll)),
          static_cast<long long>(m.value("generated", 0ll)),
          m.value("delivery_ratio", 0.0),
          m.contains("delay_hours") ? m["delay_hours"].value("median", 0.0)
                                    : 0.0,
          m.contains("delay_hours") ? m["delay_hours"].value("mean", 0.0)
                                    : 0.0,
          static_cast<long long>(m.value("dropped", 0ll)),
          static_cast<long long>(m.value("max_buffer_bytes", 0ll)));
      os << buf << "\n";
    }
  }
  os << "\n";
}

}  // namespace

std::string render_bundle_summary(const std::string& dir) {
  BundleView b = load_bundle(dir);
  std::ostringstream os;
  summarize_into(os, b);
  return os.str();
}

std::string render_bundle_diff(const std::string& dir_a,
                               const std::string& dir_b) {
  BundleView a = load_bundle(dir_a);
  BundleView b = load_bundle(dir_b);
  std::string ha = bundle_topology_hash(a);
  std::string hb = bundle_topology_hash(b);
  if (!ha.empty() && !hb.empty() && ha != hb) {
    throw DataError("refusing to compare bundles with mismatched topology "
                    "hashes (" + ha + " vs " + hb + ")");
  }
  std::ostringstream os;
  os << "# Bundle comparison\n\n";
  os << "- A: " << dir_a << "\n- B: " << dir_b << "\n\n";
  os << "| policy | ratio A | ratio B | mean delay A (h) | mean delay B (h) "
        "|\n|---|---|---|---|---|\n";
  for (const auto& ma : a.metrics) {
    std::string policy = ma.value("policy", std::string("?"));
    const ordered_json* mb = nullptr;
    for (const auto& cand : b.metrics) {
      if (cand.value("policy", std::string()) == policy) {
        mb = &cand;
        break;
      }
    }
    char buf[192];
    if (mb != nullptr) {
      std::snprintf(buf, sizeof(buf), "| %s | %.4f | %.4f | %.3f | %.3f |",
                    policy.c_str(), ma.value("delivery_ratio", 0.0),
                    mb->value("delivery_ratio", 0.0),
                    ma.contains("delay_hours")
                        ? ma["delay_hours"].value("mean", 0.0)
                        : 0.0,
                    mb->contains("delay_hours")
                        ? (*mb)["delay_hours"].value("mean", 0.0)
                        : 0.0);
    } else {
      std::snprintf(buf, sizeof(buf), "| %s | %.4f | MISSING | %.3f | - |",
                    policy.c_str(), ma.value("delivery_ratio", 0.0),
                    ma.contains("delay_hours")
                        ? ma["delay_hours"].value("mean", 0.0)
                        : 0.0);
    }
    os << buf << "\n";
  }
  return os.str();
}

}  // namespace bsn

// bsnsim: opportunistic bus-network pipeline driver.
//
// Subcommands mirror the three pipeline stages plus experiment drivers:
//   extract   transit feed (or synthetic spec) -> topology bundle
//   synth     synthetic city spec -> topology bundle
//   mobility  topology -> mobility trace + contact analytics
//   traffic   trace -> per-policy traffic metrics and comparison
//   sweep     trace -> load sweep CSVs (buffer / delivery / delay)
//   report    bundle dir(s) -> markdown summary or diff
//
// Every stage accepts the upstream stage's inputs and runs the missing
// stages inline, so `traffic --feed ...` is the one-shot pipeline and is
// byte-identical to chaining extract | mobility | traffic.
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "bsn/config.hpp"
#include "bsn/contacts.hpp"
#include "bsn/encounter.hpp"
#include "bsn/error.hpp"
#include "bsn/gtfs.hpp"
#include "bsn/mobility.hpp"
#include "bsn/report.hpp"
#include "bsn/routing.hpp"
#include "bsn/synth.hpp"
#include "bsn/topology.hpp"
#include "bsn/traffic.hpp"

namespace fs = std::filesystem;

namespace {

// Input selectors shared by the stage subcommands.
struct StageInputs {
  std::string trace_dir;
  std::string topology_path;
  std::string feed_dir;
  std::string synth_spec;
};

// Flag storage plus the CLI11 options carrying them: explicit flags
// override the config file, which overrides defaults.
struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  uint64_t seed = 0;
  std::string service_day;
  double alias_threshold = 0;
  double radio_range = 0;
  double corridor_half_width = 0;
  int64_t noise_max = -1;
  int64_t position_stride = -1;
  int64_t activity_bucket = -1;
  int64_t bandwidth = 0;
  int64_t packet_size = 0;
  int64_t buffer_capacity = 0;
  double rate = 0;
  int64_t window_start = -1;
  int64_t window_end = -1;
  bool include_own_line = false;
  std::string policies;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* service_day_opt = nullptr;
  CLI::Option* alias_opt = nullptr;
  CLI::Option* radio_opt = nullptr;
  CLI::Option* corridor_opt = nullptr;
  CLI::Option* noise_opt = nullptr;
  CLI::Option* stride_opt = nullptr;
  CLI::Option* bucket_opt = nullptr;
  CLI::Option* bandwidth_opt = nullptr;
  CLI::Option* packet_size_opt = nullptr;
  CLI::Option* buffer_opt = nullptr;
  CLI::Option* rate_opt = nullptr;
  CLI::Option* window_start_opt = nullptr;
  CLI::Option* window_end_opt = nullptr;
  CLI::Option* include_own_opt = nullptr;
  CLI::Option* policies_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f, bool traffic_knobs) {
  cmd->add_option("--config", f.config_path,
                  "JSON config file (flags override it)");
  cmd->add_option("--out", f.out_dir, "output bundle directory")->required();
  f.seed_opt = cmd->add_option("--seed", f.seed,
                               "RNG seed (mandatory, no wall-clock seeding)");
  f.service_day_opt = cmd->add_option("--service-day", f.service_day,
                                      "weekday context (default monday)");
  f.alias_opt = cmd->add_option("--alias-threshold", f.alias_threshold,
                                "stop-set Jaccard threshold for aliases");
  f.radio_opt = cmd->add_option("--radio-range", f.radio_range,
                                "radio range in meters");
  f.corridor_opt = cmd->add_option("--corridor-half-width",
                                   f.corridor_half_width,
                                   "street corridor half width in meters");
  f.noise_opt = cmd->add_option("--noise-max", f.noise_max,
                                "departure noise bound in seconds");
  f.stride_opt = cmd->add_option("--positions-stride", f.position_stride,
                                 "position sample stride (0 disables)");
  f.bucket_opt = cmd->add_option("--activity-bucket", f.activity_bucket,
                                 "activity curve bucket in seconds");
  if (traffic_knobs) {
    f.bandwidth_opt = cmd->add_option("--bandwidth", f.bandwidth,
                                      "link bandwidth in bits/s");
    f.packet_size_opt = cmd->add_option("--packet-size", f.packet_size,
                                        "packet size in bytes");
    f.buffer_opt = cmd->add_option("--buffer-capacity", f.buffer_capacity,
                                   "per-bus buffer capacity in bytes");
    f.rate_opt = cmd->add_option("--rate", f.rate, "packets per bus per hour");
    f.window_start_opt = cmd->add_option("--window-start", f.window_start,
                                         "traffic window start (s)");
    f.window_end_opt = cmd->add_option("--window-end", f.window_end,
                                       "traffic window end (s)");
    f.include_own_opt = cmd->add_flag("--include-own-line", f.include_own_line,
                                      "allow a bus's own line as destination");
    f.policies_opt = cmd->add_option("--policies", f.policies,
                                     "comma-separated policy names");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bsn::RunConfig resolve_config(const CommonFlags& f, const StageInputs& in) {
  bsn::RunConfig cfg;
  if (!f.config_path.empty()) cfg = bsn::load_run_config(f.config_path);
  auto supplied = [](CLI::Option* o) { return o != nullptr && o->count() > 0; };
  if (supplied(f.seed_opt)) {
    cfg.seed = f.seed;
    cfg.seed_set = true;
  }
  if (supplied(f.service_day_opt)) cfg.service_day = f.service_day;
  if (supplied(f.alias_opt)) cfg.alias_threshold = f.alias_threshold;
  if (supplied(f.radio_opt)) cfg.radio_range_m = f.radio_range;
  if (supplied(f.corridor_opt)) {
    cfg.corridor_half_width_m = f.corridor_half_width;
  }
  if (supplied(f.noise_opt)) cfg.departure_noise_max_s = f.noise_max;
  if (supplied(f.stride_opt)) cfg.position_stride = f.position_stride;
  if (supplied(f.bucket_opt)) cfg.activity_bucket_s = f.activity_bucket;
  if (supplied(f.bandwidth_opt)) cfg.bandwidth_bps = f.bandwidth;
  if (supplied(f.packet_size_opt)) cfg.packet_size_bytes = f.packet_size;
  if (supplied(f.buffer_opt)) cfg.buffer_capacity_bytes = f.buffer_capacity;
  if (supplied(f.rate_opt)) cfg.rate_per_hour = f.rate;
  if (supplied(f.window_start_opt)) cfg.window_start_s = f.window_start;
  if (supplied(f.window_end_opt)) cfg.window_end_s = f.window_end;
  if (supplied(f.include_own_opt)) {
    cfg.include_own_line_dest = f.include_own_line;
  }
  if (supplied(f.policies_opt)) cfg.policies = split_list(f.policies);
  if (!in.feed_dir.empty()) cfg.feed_path = in.feed_dir;
  if (!in.synth_spec.empty()) cfg.synth_spec_path = in.synth_spec;
  cfg.output_dir = f.out_dir;
  cfg.validate();
  cfg.require_seed();
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw bsn::DataError("cannot write " + path.string());
  out << text;
}

void write_run_config(const bsn::RunConfig& cfg, const fs::path& dir) {
  nlohmann::ordered_json j =
      nlohmann::ordered_json::parse(bsn::run_config_to_json(cfg));
  j["config_hash"] = bsn::hash_hex(bsn::config_hash(cfg));
  write_text(dir / "run_config.json", j.dump(1) + "\n");
}

// Builds or loads the topology; when built here, writes topology.json
// and extract diagnostics into the bundle.
bsn::Topology obtain_topology(const bsn::RunConfig& cfg,
                              const StageInputs& in, const fs::path& out_dir,
                              bool write_bundle) {
  if (!in.topology_path.empty()) {
    return bsn::load_topology(in.topology_path);
  }
  bsn::Topology topo;
  std::string diagnostics;
  if (!cfg.feed_path.empty()) {
    bsn::FeedData feed = bsn::parse_feed(cfg.feed_path);
    bsn::TopologyOptions opts;
    opts.service_day = bsn::weekday_from_string(cfg.service_day);
    opts.alias_threshold = cfg.alias_threshold;
    topo = bsn::build_topology(feed, opts);
    topo.source = "feed:" + fs::path(cfg.feed_path).filename().string();
    std::ostringstream os;
    os << feed.diagnostics.to_text();
    os << "service day: " << cfg.service_day << "\n";
    os << "paths: " << topo.paths.size() << "\n";
    os << "lines admitted: " << topo.lines.size() << "\n";
    os << "lines rejected (open): " << topo.rejected_lines.size() << "\n";
    for (const auto& l : topo.rejected_lines) {
      os << "  rejected line " << l.id << " (" << l.departures.size()
         << " departures): no returning path\n";
    }
    diagnostics = os.str();
  } else if (!cfg.synth_spec_path.empty()) {
    bsn::SynthSpec spec = bsn::load_synth_spec(cfg.synth_spec_path);
    topo = bsn::synthesize_city(spec, cfg.seed);
    diagnostics = "synthetic city: " + std::to_string(topo.lines.size()) +
                  " lines, " + std::to_string(topo.stops.size()) + " stops\n";
  } else {
    throw bsn::UsageError("no input: pass --topology, --feed or --synth-spec");
  }
  if (write_bundle) {
    fs::create_directories(out_dir);
    bsn::Provenance prov = bsn::make_provenance(cfg, 0);
    bsn::save_topology(topo, (out_dir / "topology.json").string(),
                       prov.json());
    write_text(out_dir / "extract_diagnostics.txt", diagnostics);
  }
  return topo;
}

// Loads or produces a mobility trace, writing the trace bundle and
// contact analytics when the mobility stage runs here.
bsn::MobilityTrace obtain_trace(const bsn::RunConfig& cfg,
                                const StageInputs& in, const fs::path& out_dir,
                                bool write_bundle) {
  if (!in.trace_dir.empty()) return bsn::load_trace(in.trace_dir);
  bsn::Topology topo = obtain_topology(cfg, in, out_dir, write_bundle);
  bsn::MobilityConfig mc;
  mc.radio_range_m = cfg.radio_range_m;
  mc.corridor_half_width_m = cfg.corridor_half_width_m;
  mc.departure_noise_max_s = cfg.departure_noise_max_s;
  mc.seed = cfg.seed;
  mc.position_stride = cfg.position_stride;
  bsn::MobilityTrace trace = bsn::run_mobility(topo, mc);
  if (write_bundle) {
    bsn::Provenance prov = bsn::make_provenance(cfg, trace.topology_hash);
    bsn::save_trace(trace, out_dir.string(), prov.line());
    bsn::save_contact_analytics(trace, out_dir.string(),
                                cfg.activity_bucket_s, prov.line());
  }
  return trace;
}

bsn::TrafficConfig traffic_config_for(const bsn::RunConfig& cfg, double rate) {
  bsn::TrafficConfig tc;
  tc.bandwidth_bps = cfg.bandwidth_bps;
  tc.packet_size_bytes = cfg.packet_size_bytes;
  tc.buffer_capacity_bytes = cfg.buffer_capacity_bytes;
  tc.rate_per_hour = rate;
  tc.window_start_s = cfg.window_start_s;
  tc.window_end_s = cfg.window_end_s;
  tc.include_own_line_dest = cfg.include_own_line_dest;
  tc.seed = cfg.seed;
  return tc;
}

int cmd_extract(const bsn::RunConfig& cfg, const StageInputs& in) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  bsn::Topology topo = obtain_topology(cfg, in, out_dir, true);
  write_run_config(cfg, out_dir);
  std::cout << "admitted lines: " << topo.lines.size()
            << ", rejected: " << topo.rejected_lines.size()
            << ", stops: " << topo.stops.size() << "\n";
  if (topo.lines.empty()) {
    std::cerr << "error: no closed lines in the input; every parsed line is "
                 "open (one-way) so nothing can route\n";
    return 2;
  }
  return 0;
}

int cmd_synth(const bsn::RunConfig& cfg, const bsn::SynthSpec& spec) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  bsn::Topology topo = bsn::synthesize_city(spec, cfg.seed);
  bsn::Provenance prov = bsn::make_provenance(cfg, 0);
  bsn::save_topology(topo, (out_dir / "topology.json").string(), prov.json());
  write_text(out_dir / "synth_spec.json",
             bsn::synth_spec_to_json(spec) + "\n");
  write_run_config(cfg, out_dir);
  std::cout << "synthesized " << topo.lines.size() << " lines over "
            << topo.stops.size() << " stops\n";
  return 0;
}

int cmd_mobility(const bsn::RunConfig& cfg, const StageInputs& in) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  bsn::MobilityTrace trace = obtain_trace(cfg, in, out_dir, true);
  write_run_config(cfg, out_dir);
  std::cout << "trace: " << trace.buses.size() << " buses, "
            << trace.trips.size() << " trips, " << trace.contacts.size()
            << " contacts over [" << trace.start_tick << ", "
            << trace.end_tick << "]\n";
  return 0;
}

int cmd_traffic(const bsn::RunConfig& cfg, const StageInputs& in) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  bsn::MobilityTrace trace =
      obtain_trace(cfg, in, out_dir, in.trace_dir.empty());
  bsn::Provenance prov = bsn::make_provenance(cfg, trace.topology_hash);
  bsn::PolicyTables tables = bsn::build_policy_tables(trace);
  write_text(out_dir / "encounter_matrix.json",
             bsn::encounter_matrix_to_json(tables.matrix));
  write_text(out_dir / "encounter_matrix.csv",
             "# " + prov.line() + "\n" +
                 bsn::encounter_matrix_to_csv(tables.matrix));
  {
    nlohmann::ordered_json j;
    j["provenance"] = nlohmann::ordered_json::parse(prov.json());
    j["ophop"] = nlohmann::ordered_json::parse(
        bsn::routing_table_to_json(tables.ophop, "log_inverse_probability"));
    j["minhop"] = nlohmann::ordered_json::parse(
        bsn::routing_table_to_json(tables.minhop, "hop_count"));
    j["shanghai"] = nlohmann::ordered_json::parse(bsn::routing_table_to_json(
        tables.shanghai, "inverse_cumulative_contact_time"));
    write_text(out_dir / "routing_tables.json", j.dump(1) + "\n");
  }

  std::vector<bsn::MetricsReport> reports;
  std::vector<bsn::TrafficResult> results;
  for (const std::string& name : cfg.policies) {
    auto policy = bsn::create_policy(name, tables);
    bsn::TrafficResult result =
        bsn::run_traffic(trace, *policy, traffic_config_for(cfg,
                                                            cfg.rate_per_hour));
    for (const std::string& note : result.metrics.notes) {
      std::cerr << "warning: " << note << "\n";
    }
    bsn::save_traffic_result(result, out_dir.string(), prov.line(),
                             prov.json());
    std::cout << name << ": delivered " << result.metrics.delivered << "/"
              << result.metrics.generated << " (ratio "
              << result.metrics.delivery_ratio << "), mean delay "
              << result.metrics.delay_mean_h << " h\n";
    reports.push_back(result.metrics);
    results.push_back(std::move(result));
  }
  write_text(out_dir / "comparison.csv",
             "# " + prov.line() + "\n" + bsn::comparison_csv(reports));
  write_text(out_dir / "qos.csv",
             "# " + prov.line() + "\n" + bsn::qos_csv(results));
  write_run_config(cfg, out_dir);
  return 0;
}

std::vector<double> parse_loads(const std::string& loads_arg) {
  std::vector<double> loads;
  for (const std::string& tok : split_list(loads_arg)) {
    size_t colon = tok.find(':');
    if (colon != std::string::npos) {
      size_t colon2 = tok.find(':', colon + 1);
      double lo = std::stod(tok.substr(0, colon));
      double hi, step = 1;
      if (colon2 != std::string::npos) {
        hi = std::stod(tok.substr(colon + 1, colon2 - colon - 1));
        step = std::stod(tok.substr(colon2 + 1));
      } else {
        hi = std::stod(tok.substr(colon + 1));
      }
      if (step <= 0) throw bsn::UsageError("load step must be positive");
      for (double v = lo; v <= hi + 1e-9; v += step) loads.push_back(v);
    } else {
      loads.push_back(std::stod(tok));
    }
  }
  if (loads.empty()) throw bsn::UsageError("--loads is empty");
  return loads;
}

int cmd_sweep(const bsn::RunConfig& cfg, const StageInputs& in,
              const std::string& loads_arg) {
  fs::path out_dir = cfg.output_dir;
  fs::create_directories(out_dir);
  std::vector<double> loads = parse_loads(loads_arg);
  bsn::MobilityTrace trace =
      obtain_trace(cfg, in, out_dir, in.trace_dir.empty());
  bsn::Provenance prov = bsn::make_provenance(cfg, trace.topology_hash);
  bsn::PolicyTables tables = bsn::build_policy_tables(trace);

  std::ostringstream buffer_csv, delivery_csv, delay_csv;
  buffer_csv << "# " << prov.line() << "\n"
             << "load_pkts_per_hour,policy,max_buffer_bytes\n";
  delivery_csv << "# " << prov.line() << "\n"
               << "load_pkts_per_hour,policy,delivery_ratio\n";
  delay_csv << "# " << prov.line() << "\n"
            << "load_pkts_per_hour,policy,delay_median_h,delay_mean_h\n";
  char buf[192];
  for (double load : loads) {
    for (const std::string& name : cfg.policies) {
      auto policy = bsn::create_policy(name, tables);
      bsn::TrafficResult r =
          bsn::run_traffic(trace, *policy, traffic_config_for(cfg, load));
      std::snprintf(buf, sizeof(buf), "%.3f,%s,%lld", load, name.c_str(),
                    static_cast<long long>(r.metrics.max_buffer_bytes));
      buffer_csv << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.3f,%s,%.6f", load, name.c_str(),
                    r.metrics.delivery_ratio);
      delivery_csv << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%.3f,%s,%.4f,%.4f", load, name.c_str(),
                    r.metrics.delay_median_h, r.metrics.delay_mean_h);
      delay_csv << buf << "\n";
      std::cout << "load " << load << " " << name << ": ratio "
                << r.metrics.delivery_ratio << ", max buffer "
                << r.metrics.max_buffer_bytes << "\n";
    }
  }
  write_text(out_dir / "sweep_buffer.csv", buffer_csv.str());
  write_text(out_dir / "sweep_delivery.csv", delivery_csv.str());
  write_text(out_dir / "sweep_delay.csv", delay_csv.str());
  write_run_config(cfg, out_dir);
  return 0;
}

int cmd_report(const std::vector<std::string>& bundles,
               const std::string& out_file) {
  std::string text;
  if (bundles.size() == 1) {
    text = bsn::render_bundle_summary(bundles[0]);
  } else if (bundles.size() == 2) {
    text = bsn::render_bundle_diff(bundles[0], bundles[1]);
  } else {
    throw bsn::UsageError("report takes one or two --bundle directories");
  }
  if (out_file.empty()) std::cout << text;
  else write_text(out_file, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opportunistic bus-network simulator"};
  app.require_subcommand(1);

  auto* extract = app.add_subcommand("extract",
                                     "parse a transit feed into a topology");
  CommonFlags ef;
  StageInputs ein;
  extract->add_option("--feed", ein.feed_dir, "transit feed directory");
  extract->add_option("--synth-spec", ein.synth_spec,
                      "synthetic city spec JSON (bypasses parsing)");
  add_common_flags(extract, ef, false);

  auto* synth = app.add_subcommand("synth", "generate a synthetic city");
  CommonFlags sf;
  std::string synth_spec_path;
  bsn::SynthSpec inline_spec;
  synth->add_option("--spec", synth_spec_path, "synthetic city spec JSON");
  synth->add_option("--lines", inline_spec.num_lines, "number of lines");
  synth->add_option("--grid-cols", inline_spec.grid_cols, "grid columns");
  synth->add_option("--grid-rows", inline_spec.grid_rows, "grid rows");
  synth->add_option("--grid-spacing", inline_spec.grid_spacing_m,
                    "grid spacing in meters");
  synth->add_option("--headway", inline_spec.headway_s, "headway in seconds");
  add_common_flags(synth, sf, false);

  auto* mobility = app.add_subcommand(
      "mobility", "replay bus movement and detect contacts");
  CommonFlags mf;
  StageInputs min;
  mobility->add_option("--topology", min.topology_path, "topology.json path");
  mobility->add_option("--feed", min.feed_dir,
                       "transit feed directory (runs extract inline)");
  mobility->add_option("--synth-spec", min.synth_spec,
                       "synthetic spec JSON (runs synth inline)");
  add_common_flags(mobility, mf, false);

  auto* traffic = app.add_subcommand(
      "traffic", "run data traffic over a trace under routing policies");
  CommonFlags tf;
  StageInputs tin;
  traffic->add_option("--trace", tin.trace_dir,
                      "mobility trace bundle directory");
  traffic->add_option("--topology", tin.topology_path,
                      "topology.json (runs mobility inline)");
  traffic->add_option("--feed", tin.feed_dir,
                      "feed directory (full pipeline)");
  traffic->add_option("--synth-spec", tin.synth_spec,
                      "synthetic spec JSON (full pipeline)");
  add_common_flags(traffic, tf, true);

  auto* sweep = app.add_subcommand("sweep", "offered-load sweep");
  CommonFlags wf;
  StageInputs win;
  std::string sweep_loads;
  sweep->add_option("--trace", win.trace_dir,
                    "mobility trace bundle directory");
  sweep->add_option("--topology", win.topology_path, "topology.json path");
  sweep->add_option("--feed", win.feed_dir, "feed directory");
  sweep->add_option("--synth-spec", win.synth_spec, "synthetic spec JSON");
  sweep->add_option("--loads", sweep_loads,
                    "loads in pkt/h: \"1,5,10\" or \"1:60:5\"")
      ->required();
  add_common_flags(sweep, wf, true);

  auto* report = app.add_subcommand("report", "render bundle summary/diff");
  std::vector<std::string> rep_bundles;
  std::string rep_out;
  report->add_option("--bundle", rep_bundles,
                     "bundle directory (repeat for a diff)")
      ->required();
  report->add_option("--out", rep_out, "write summary to a file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed()) return cmd_extract(resolve_config(ef, ein), ein);
    if (synth->parsed()) {
      bsn::RunConfig cfg = resolve_config(sf, StageInputs{});
      bsn::SynthSpec spec = inline_spec;
      if (!synth_spec_path.empty()) spec = bsn::load_synth_spec(
          synth_spec_path);
      return cmd_synth(cfg, spec);
    }
    if (mobility->parsed()) return cmd_mobility(resolve_config(mf, min), min);
    if (traffic->parsed()) return cmd_traffic(resolve_config(tf, tin), tin);
    if (sweep->parsed()) {
      return cmd_sweep(resolve_config(wf, win), win, sweep_loads);
    }
    if (report->parsed()) return cmd_report(rep_bundles, rep_out);
  } catch (const bsn::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const bsn::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

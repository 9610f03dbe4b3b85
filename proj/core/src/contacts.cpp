#include "bsn/contacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "bsn/error.hpp"

namespace bsn {

using ordered_json = nlohmann::ordered_json;

ContactStats stats_from_samples(std::vector<double> samples) {
  ContactStats st;
  st.sample_count = static_cast<int64_t>(samples.size());
  if (samples.empty()) return st;
  std::sort(samples.begin(), samples.end());
  st.median = samples[(samples.size() - 1) / 2];
  double sum = 0.0;
  for (double v : samples) sum += v;
  st.mean = sum / static_cast<double>(samples.size());
  double var = 0.0;
  for (double v : samples) var += (v - st.mean) * (v - st.mean);
  st.std_dev = std::sqrt(var / static_cast<double>(samples.size()));
  return st;
}

std::optional<ContactStats> intra_contact_stats(
    const std::vector<ContactEvent>& contacts) {
  if (contacts.empty()) return std::nullopt;
  std::vector<double> durations;
  durations.reserve(contacts.size());
  for (const ContactEvent& c : contacts) {
    durations.push_back(static_cast<double>(c.end - c.start));
  }
  return stats_from_samples(std::move(durations));
}

std::optional<ContactStats> inter_contact_stats(
    const std::vector<ContactEvent>& contacts) {
  // Exposure intervals per (bus, encountered line).
  std::map<std::pair<int32_t, int32_t>, std::vector<std::pair<int64_t, int64_t>>>
      exposures;
  for (const ContactEvent& c : contacts) {
    exposures[{c.bus_a, c.line_b}].emplace_back(c.start, c.end);
    exposures[{c.bus_b, c.line_a}].emplace_back(c.start, c.end);
  }
  std::vector<double> gaps;
  for (auto& [key, intervals] : exposures) {
    std::sort(intervals.begin(), intervals.end());
    // merge overlapping or touching exposures to the same line
    std::vector<std::pair<int64_t, int64_t>> merged;
    for (const auto& iv : intervals) {
      if (!merged.empty() && iv.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, iv.second);
      } else {
        merged.push_back(iv);
      }
    }
    for (size_t i = 1; i < merged.size(); ++i) {
      gaps.push_back(
          static_cast<double>(merged[i].first - merged[i - 1].second));
    }
  }
  if (gaps.empty()) return std::nullopt;
  return stats_from_samples(std::move(gaps));
}

NeighborHistogram neighbor_histogram(const MobilityTrace& trace) {
  // Per bus: sweep contact starts/ends, accumulating tick counts at each
  // simultaneous-neighbor level >= 1.
  std::map<int32_t, std::vector<std::pair<int64_t, int32_t>>> deltas;
  for (const ContactEvent& c : trace.contacts) {
    deltas[c.bus_a].emplace_back(c.start, +1);
    deltas[c.bus_a].emplace_back(c.end, -1);
    deltas[c.bus_b].emplace_back(c.start, +1);
    deltas[c.bus_b].emplace_back(c.end, -1);
  }
  NeighborHistogram hist;
  for (auto& [bus, events] : deltas) {
    std::sort(events.begin(), events.end());
    int32_t level = 0;
    size_t i = 0;
    while (i < events.size()) {
      int64_t t = events[i].first;
      while (i < events.size() && events[i].first == t) {
        level += events[i].second;
        ++i;
      }
      if (i < events.size() && level > 0) {
        int64_t span = events[i].first - t;
        hist.counts[level] += span;
        hist.total_samples += span;
      }
    }
  }
  return hist;
}

ActivityCurves activity_curves(const MobilityTrace& trace, int64_t bucket_s) {
  ActivityCurves curves;
  curves.bucket_s = bucket_s;
  curves.first_bucket_start = trace.start_tick;
  int64_t ticks = trace.duration_ticks();
  if (ticks <= 0 || bucket_s <= 0) return curves;

  std::vector<int64_t> pop_delta(static_cast<size_t>(ticks) + 1, 0);
  for (const BusInfo& b : trace.buses) {
    int64_t s = std::max(b.created, trace.start_tick) - trace.start_tick;
    int64_t e = std::min(b.ended, trace.end_tick + 1) - trace.start_tick;
    if (e <= s) continue;
    pop_delta[static_cast<size_t>(s)]++;
    pop_delta[static_cast<size_t>(e)]--;
  }
  std::vector<int64_t> con_delta(static_cast<size_t>(ticks) + 1, 0);
  for (const ContactEvent& c : trace.contacts) {
    int64_t s = std::max(c.start, trace.start_tick) - trace.start_tick;
    int64_t e = std::min(c.end, trace.end_tick + 1) - trace.start_tick;
    if (e <= s) continue;
    con_delta[static_cast<size_t>(s)]++;
    con_delta[static_cast<size_t>(e)]--;
  }

  int64_t buckets = (ticks + bucket_s - 1) / bucket_s;
  curves.population.resize(static_cast<size_t>(buckets), 0.0);
  curves.active_contacts.resize(static_cast<size_t>(buckets), 0.0);
  int64_t pop = 0, con = 0;
  for (int64_t i = 0; i < ticks; ++i) {
    pop += pop_delta[static_cast<size_t>(i)];
    con += con_delta[static_cast<size_t>(i)];
    size_t bucket = static_cast<size_t>(i / bucket_s);
    curves.population[bucket] += static_cast<double>(pop);
    curves.active_contacts[bucket] += static_cast<double>(con);
  }
  for (int64_t b = 0; b < buckets; ++b) {
    int64_t lo = b * bucket_s;
    int64_t hi = std::min(ticks, lo + bucket_s);
    double denom = static_cast<double>(hi - lo);
    curves.population[static_cast<size_t>(b)] /= denom;
    curves.active_contacts[static_cast<size_t>(b)] /= denom;
  }
  return curves;
}

namespace {

ordered_json stats_to_json(const std::optional<ContactStats>& st) {
  if (!st) return ordered_json{{"no_contacts", true}};
  return ordered_json{{"median_s", st->median},
                      {"mean_s", st->mean},
                      {"std_dev_s", st->std_dev},
                      {"samples", st->sample_count}};
}

}  // namespace

void save_contact_analytics(const MobilityTrace& trace, const std::string& dir,
                            int64_t bucket_s,
                            const std::string& provenance_line) {
  std::filesystem::create_directories(dir);
  auto path = [&](const char* name) {
    return (std::filesystem::path(dir) / name).string();
  };

  ordered_json j;
  j["total_contacts"] = trace.contacts.size();
  j["total_buses"] = trace.buses.size();
  j["total_trips"] = trace.trips.size();
  j["intra_contact"] = stats_to_json(intra_contact_stats(trace.contacts));
  j["inter_contact"] = stats_to_json(inter_contact_stats(trace.contacts));
  if (!provenance_line.empty()) j["provenance"] = provenance_line;
  {
    std::ofstream out(path("contact_stats.json"));
    if (!out) throw DataError("cannot write contact_stats.json");
    out << j.dump(1) << "\n";
  }

  char buf[128];
  {
    NeighborHistogram hist = neighbor_histogram(trace);
    std::ofstream out(path("neighbor_histogram.csv"));
    if (!provenance_line.empty()) out << "# " << provenance_line << "\n";
    out << "neighbors,samples,fraction\n";
    for (const auto& [k, v] : hist.counts) {
      double frac = hist.total_samples > 0
                        ? static_cast<double>(v) /
                              static_cast<double>(hist.total_samples)
                        : 0.0;
      std::snprintf(buf, sizeof(buf), "%d,%lld,%.6f", k,
                    static_cast<long long>(v), frac);
      out << buf << "\n";
    }
  }
  {
    ActivityCurves curves = activity_curves(trace, bucket_s);
    std::ofstream pop(path("population.csv"));
    std::ofstream con(path("contact_count.csv"));
    if (!provenance_line.empty()) {
      pop << "# " << provenance_line << "\n";
      con << "# " << provenance_line << "\n";
    }
    pop << "bucket_start_s,mean_buses\n";
    con << "bucket_start_s,mean_active_contacts\n";
    for (size_t i = 0; i < curves.population.size(); ++i) {
      int64_t start = curves.first_bucket_start +
                      static_cast<int64_t>(i) * curves.bucket_s;
      std::snprintf(buf, sizeof(buf), "%lld,%.3f",
                    static_cast<long long>(start), curves.population[i]);
      pop << buf << "\n";
      std::snprintf(buf, sizeof(buf), "%lld,%.3f",
                    static_cast<long long>(start), curves.active_contacts[i]);
      con << buf << "\n";
    }
  }
}

}  // namespace bsn

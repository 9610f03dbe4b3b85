#include "testutil.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

namespace bsn::test {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<uint64_t> counter{0};
  std::random_device rd;
  std::ostringstream os;
  os << "bsn_test_" << rd() << "_" << counter++;
  path_ = fs::temp_directory_path() / os.str();
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_feed(const fs::path& dir, const std::vector<FeedStop>& stops,
                const std::vector<FeedTrip>& trips,
                const std::vector<FeedService>& services) {
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "stops.txt");
    out << "stop_id,stop_name,stop_lat,stop_lon\n";
    for (const auto& s : stops) {
      out << s.id << "," << s.id << "," << s.lat << "," << s.lon << "\n";
    }
  }
  {
    std::ofstream out(dir / "routes.txt");
    out << "route_id,route_short_name,route_type\n";
    std::vector<std::string> seen;
    for (const auto& t : trips) {
      if (std::find(seen.begin(), seen.end(), t.route_id) == seen.end()) {
        seen.push_back(t.route_id);
        out << t.route_id << "," << t.route_id << ",3\n";
      }
    }
  }
  {
    std::ofstream out(dir / "trips.txt");
    out << "route_id,service_id,trip_id,trip_headsign\n";
    for (const auto& t : trips) {
      out << t.route_id << "," << t.service_id << "," << t.trip_id << ",hs\n";
    }
  }
  {
    std::ofstream out(dir / "stop_times.txt");
    out << "trip_id,arrival_time,departure_time,stop_id,stop_sequence\n";
    for (const auto& t : trips) {
      int seq = 1;
      for (const auto& st : t.stop_times) {
        out << t.trip_id << "," << st.arrival << "," << st.departure << ","
            << st.stop_id << "," << seq++ << "\n";
      }
    }
  }
  {
    std::ofstream out(dir / "calendar.txt");
    out << "service_id,monday,tuesday,wednesday,thursday,friday,saturday,"
           "sunday,start_date,end_date\n";
    for (const auto& s : services) {
      out << s.service_id << "," << s.days << ",20100101,20101231\n";
    }
  }
}

TopologyBuilder::TopologyBuilder() { topo.source = "test"; }

int32_t TopologyBuilder::stop(const std::string& id, double x, double y) {
  topo.stops.push_back(StopNode{id, Vec2{x, y}});
  return static_cast<int32_t>(topo.stops.size() - 1);
}

int32_t TopologyBuilder::path(const std::vector<int32_t>& stops,
                              int64_t seg_travel_s, int64_t dwell_s) {
  PathRecord p;
  p.id = static_cast<int32_t>(topo.paths.size());
  p.stops = stops;
  p.arrive_s.push_back(0);
  p.depart_s.push_back(0);
  for (size_t i = 1; i < stops.size(); ++i) {
    int64_t arr = p.depart_s.back() + seg_travel_s;
    int64_t dep = (i + 1 < stops.size()) ? arr + dwell_s : arr;
    p.arrive_s.push_back(arr);
    p.depart_s.push_back(dep);
  }
  topo.paths.push_back(p);
  return p.id;
}

int32_t TopologyBuilder::line(
    const std::vector<std::pair<int32_t, PathRole>>& members,
    const std::vector<std::pair<int32_t, int64_t>>& departures) {
  LineRecord l;
  l.id = static_cast<int32_t>(topo.lines.size());
  for (const auto& [p, role] : members) l.members.push_back(LineMember{p, role});
  for (const auto& [p, t] : departures) l.departures.push_back(
      Departure{p, t});
  std::sort(l.departures.begin(), l.departures.end(),
            [](const Departure& a, const Departure& b) {
              if (a.start_s != b.start_s) return a.start_s < b.start_s;
              return a.path < b.path;
            });
  int64_t total = 0;
  for (const auto& d : l.departures) total += topo.paths[d.path].duration();
  l.mean_trip_s = l.departures.empty()
                      ? 0.0
                      : static_cast<double>(total) /
                            static_cast<double>(l.departures.size());
  l.closed = true;
  topo.lines.push_back(l);
  return l.id;
}

Topology TopologyBuilder::build() {
  finalize_topology_geometry(topo);
  return topo;
}

Topology crossing_topology(int64_t headway_s, int64_t day_start_s,
                           int64_t day_end_s) {
  TopologyBuilder b;
  // Horizontal line along y=0, stops every 500 m; vertical along x=0.
  std::vector<int32_t> h_stops, v_stops;
  for (int i = -2; i <= 2; ++i) {
    h_stops.push_back(b.stop("h" + std::to_string(i), i * 500.0, 0.0));
  }
  for (int i = -2; i <= 2; ++i) {
    v_stops.push_back(i == 0 ? h_stops[2]
                             : b.stop("v" + std::to_string(i), 0.0,
                                      i * 500.0));
  }
  std::vector<int32_t> h_rev(h_stops.rbegin(), h_stops.rend());
  std::vector<int32_t> v_rev(v_stops.rbegin(), v_stops.rend());
  int32_t hf = b.path(h_stops, 60);
  int32_t hb = b.path(h_rev, 60);
  int32_t vf = b.path(v_stops, 60);
  int32_t vb = b.path(v_rev, 60);

  std::vector<std::pair<int32_t, int64_t>> h_deps, v_deps;
  for (int64_t t = day_start_s; t <= day_end_s; t += headway_s) {
    h_deps.emplace_back(hf, t);
    h_deps.emplace_back(hb, t + headway_s / 2);
    v_deps.emplace_back(vf, t);
    v_deps.emplace_back(vb, t + headway_s / 2);
  }
  b.line({{hf, PathRole::canonical}, {hb, PathRole::reversal}}, h_deps);
  b.line({{vf, PathRole::canonical}, {vb, PathRole::reversal}}, v_deps);
  return b.build();
}

TraceBuilder& TraceBuilder::span(int64_t start, int64_t end) {
  trace_.start_tick = start;
  trace_.end_tick = end;
  return *this;
}

TraceBuilder& TraceBuilder::line(int32_t id, double mean_trip_s) {
  trace_.admitted_lines.push_back(id);
  trace_.line_mean_trip_s[id] = mean_trip_s;
  return *this;
}

TraceBuilder& TraceBuilder::bus(int32_t id, int32_t line, int64_t created,
                                int64_t ended, BusStatus final_status) {
  BusInfo info;
  info.bus_id = id;
  info.line_id = line;
  info.created = created;
  info.ended = ended;
  info.final_status = final_status;
  trace_.buses.push_back(info);
  return *this;
}

TraceBuilder& TraceBuilder::trip(int32_t bus, int64_t depart, int64_t arrive,
                                 int32_t path) {
  int32_t line = -1;
  for (const auto& b : trace_.buses) {
    if (b.bus_id == bus) line = b.line_id;
  }
  trace_.trips.push_back(TripInterval{bus, line, path, depart, arrive});
  return *this;
}

TraceBuilder& TraceBuilder::contact(int32_t a, int32_t b, int64_t start,
                                    int64_t end) {
  int32_t la = -1, lb = -1;
  for (const auto& bus : trace_.buses) {
    if (bus.bus_id == a) la = bus.line_id;
    if (bus.bus_id == b) lb = bus.line_id;
  }
  if (a > b) {
    std::swap(a, b);
    std::swap(la, lb);
  }
  trace_.contacts.push_back(ContactEvent{a, b, la, lb, start, end});
  return *this;
}

TraceBuilder& TraceBuilder::retire(int64_t tick, int32_t bus,
                                   int32_t successor) {
  trace_.retirements.push_back(RetirementEvent{tick, bus, successor});
  return *this;
}

MobilityTrace TraceBuilder::build() {
  std::sort(trace_.admitted_lines.begin(), trace_.admitted_lines.end());
  trace_.admitted_lines.erase(std::unique(trace_.admitted_lines.begin(),
                                          trace_.admitted_lines.end()),
                              trace_.admitted_lines.end());
  std::sort(trace_.contacts.begin(), trace_.contacts.end(),
            [](const ContactEvent& a, const ContactEvent& b) {
              return std::tie(a.start, a.bus_a, a.bus_b) <
                     std::tie(b.start, b.bus_a, b.bus_b);
            });
  std::sort(trace_.trips.begin(), trace_.trips.end(),
            [](const TripInterval& a, const TripInterval& b) {
              return std::tie(a.depart, a.bus_id) <
                     std::tie(b.depart, b.bus_id);
            });
  return trace_;
}

namespace {
constexpr double kRelEps = 1e-9;

bool prob_better(double a, double b) { return a > b * (1.0 + kRelEps); }
bool prob_tie(double a, double b) {
  return !prob_better(a, b) && !prob_better(b, a);
}
}  // namespace

PathOracle::PathOracle(std::vector<std::vector<double>> prob)
    : prob_(std::move(prob)), n_(static_cast<int>(prob_.size())) {
  best_.assign(n_, std::vector<double>(n_, 0.0));
  hops_.assign(n_, std::vector<int>(n_, -1));
  for (int s = 0; s < n_; ++s) {
    best_[s][s] = 1.0;
    hops_[s][s] = 0;
    enumerate_from(s);
  }
}

void PathOracle::enumerate_from(int src) {
  std::vector<bool> visited(n_, false);
  std::vector<int> stack;
  visited[src] = true;

  // Depth-first walk over every simple path out of src.
  struct Frame {
    int node;
    int next_candidate;
    double prob;
    int depth;
  };
  std::vector<Frame> frames;
  frames.push_back(Frame{src, 0, 1.0, 0});
  while (!frames.empty()) {
    Frame& f = frames.back();
    if (f.next_candidate >= n_) {
      visited[f.node] = false;
      frames.pop_back();
      continue;
    }
    int to = f.next_candidate++;
    if (visited[to] || prob_[f.node][to] <= 0.0) continue;
    double p = f.prob * prob_[f.node][to];
    int depth = f.depth + 1;
    if (prob_better(p, best_[src][to])) {
      best_[src][to] = p;
      hops_[src][to] = depth;
    } else if (prob_tie(p, best_[src][to])) {
      best_[src][to] = std::max(best_[src][to], p);
      if (depth < hops_[src][to]) hops_[src][to] = depth;
    }
    visited[to] = true;
    frames.push_back(Frame{to, 0, p, depth});
  }
}

double PathOracle::best_probability(int src, int dst) const {
  return best_[src][dst];
}

int PathOracle::best_hops(int src, int dst) const { return hops_[src][dst]; }

std::vector<int> PathOracle::canonical_path(int src, int dst) const {
  std::vector<int> out;
  if (best_[src][dst] <= 0.0) return out;
  int cur = src;
  out.push_back(cur);
  while (cur != dst) {
    int chosen = -1;
    for (int to = 0; to < n_; ++to) {
      if (prob_[cur][to] <= 0.0 || best_[to][dst] <= 0.0) continue;
      if (!prob_tie(prob_[cur][to] * best_[to][dst], best_[cur][dst])) {
        continue;
      }
      if (hops_[to][dst] + 1 != hops_[cur][dst]) continue;
      chosen = to;
      break;  // nodes scanned in increasing id order
    }
    if (chosen < 0) break;  // inconsistent tables; caller's assertions fail
    out.push_back(chosen);
    cur = chosen;
  }
  return out;
}

SynthSpec small_city_spec(int32_t lines, uint64_t headway) {
  SynthSpec spec;
  spec.grid_cols = 9;
  spec.grid_rows = 9;
  spec.grid_spacing_m = 400.0;
  spec.num_lines = lines;
  spec.headway_s = static_cast<int64_t>(headway);
  spec.day_start_s = 6 * 3600;
  spec.day_end_s = 12 * 3600;
  spec.rush_hours = false;
  return spec;
}

}  // namespace bsn::test

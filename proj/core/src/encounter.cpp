#include "bsn/encounter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bsn/error.hpp"

namespace bsn {

using ordered_json = nlohmann::ordered_json;

EncounterMatrix::EncounterMatrix(std::vector<int32_t> line_ids)
    : line_ids_(std::move(line_ids)),
      counts_(line_ids_.size(), std::vector<int64_t>(line_ids_.size(), 0)),
      trips_(line_ids_.size(), 0) {}

int EncounterMatrix::index_of(int32_t line_id) const {
  auto it = std::lower_bound(line_ids_.begin(), line_ids_.end(), line_id);
  if (it == line_ids_.end() || *it != line_id) return -1;
  return static_cast<int>(it - line_ids_.begin());
}

double EncounterMatrix::probability(int i, int j) const {
  if (trips_[i] <= 0) return 0.0;
  return static_cast<double>(counts_[i][j]) / static_cast<double>(trips_[i]);
}

double EncounterMatrix::probability_by_id(int32_t line_i,
                                          int32_t line_j) const {
  int i = index_of(line_i);
  int j = index_of(line_j);
  if (i < 0 || j < 0) return 0.0;
  return probability(i, j);
}

EncounterMatrix estimate_matrix(const MobilityTrace& trace) {
  EncounterMatrix m(trace.admitted_lines);

  // Trips per bus, sorted by departure.
  std::map<int32_t, std::vector<std::pair<int64_t, int64_t>>> bus_trips;
  for (const TripInterval& t : trace.trips) {
    bus_trips[t.bus_id].emplace_back(t.depart, t.arrive);
    int i = m.index_of(t.line_id);
    if (i >= 0) m.add_line_trips(i, 1);
  }
  for (auto& [bus, trips] : bus_trips) std::sort(trips.begin(), trips.end());

  // Distinct (bus, trip, encountered line) triples; one trip contributes
  // at most once per encountered line.
  std::set<std::tuple<int32_t, int32_t, int32_t>> marked;
  auto mark = [&](int32_t bus, int32_t bus_line, int32_t other_line,
                  int64_t start, int64_t end) {
    auto it = bus_trips.find(bus);
    if (it == bus_trips.end()) return;
    const auto& trips = it->second;
    int i = m.index_of(bus_line);
    int j = m.index_of(other_line);
    if (i < 0 || j < 0) return;
    // Trips overlapping [start, end): depart < end and arrive >= start.
    for (size_t k = 0; k < trips.size(); ++k) {
      if (trips[k].second < start) continue;
      if (trips[k].first >= end) break;
      if (marked.insert({bus, static_cast<int32_t>(k), other_line}).second) {
        m.add_encounter_trip(i, j);
      }
    }
  };
  for (const ContactEvent& c : trace.contacts) {
    mark(c.bus_a, c.line_a, c.line_b, c.start, c.end);
    mark(c.bus_b, c.line_b, c.line_a, c.start, c.end);
  }
  return m;
}

double truncate_probability(double p) {
  if (p <= 0.0) return 0.0;
  double tenths = std::floor(p * 10.0 + 1e-9);
  if (tenths >= 10.0) return 0.9;
  if (tenths <= 0.0) return 0.1;
  return tenths / 10.0;
}

WeightedLineGraph LineGraph::weighted() const {
  WeightedLineGraph g;
  g.line_ids = line_ids;
  g.out.resize(out.size());
  for (size_t i = 0; i < out.size(); ++i) {
    for (const Edge& e : out[i]) {
      g.out[i].push_back(GraphEdge{e.to, e.weight});
    }
  }
  return g;
}

LineGraph build_graph(const EncounterMatrix& matrix) {
  LineGraph g;
  g.line_ids = matrix.line_ids();
  g.out.resize(matrix.size());
  for (size_t i = 0; i < matrix.size(); ++i) {
    for (size_t j = 0; j < matrix.size(); ++j) {
      if (i == j) continue;
      double p = matrix.probability(static_cast<int>(i), static_cast<int>(j));
      if (p <= 0.0) continue;
      LineGraph::Edge e;
      e.to = static_cast<int32_t>(j);
      e.p_raw = p;
      e.p_trunc = truncate_probability(p);
      e.weight = std::log(1.0 / e.p_trunc);
      g.out[i].push_back(e);
    }
  }
  return g;
}

RoutingTable::RoutingTable(std::vector<int32_t> line_ids)
    : line_ids_(std::move(line_ids)),
      to_(line_ids_.size(), std::vector<RouteEntry>(line_ids_.size())) {}

int RoutingTable::index_of(int32_t line_id) const {
  auto it = std::lower_bound(line_ids_.begin(), line_ids_.end(), line_id);
  if (it == line_ids_.end() || *it != line_id) return -1;
  return static_cast<int>(it - line_ids_.begin());
}

const RouteEntry* RoutingTable::entry_by_id(int32_t src_line,
                                            int32_t dst_line) const {
  int s = index_of(src_line);
  int d = index_of(dst_line);
  if (s < 0 || d < 0) return nullptr;
  return &entry(s, d);
}

double RoutingTable::route_probability(int src, int dst) const {
  const RouteEntry& e = entry(src, dst);
  if (!e.reachable) return 0.0;
  return std::exp(-e.weight);
}

std::vector<int32_t> RoutingTable::path(int src, int dst) const {
  std::vector<int32_t> out;
  if (!entry(src, dst).reachable) return out;
  int cur = src;
  out.push_back(line_ids_[cur]);
  while (cur != dst) {
    int32_t nh = entry(cur, dst).next_hop;
    int ni = index_of(nh);
    if (ni < 0 || ni == cur) break;
    out.push_back(nh);
    cur = ni;
  }
  return out;
}

RoutingTable shortest_paths(const WeightedLineGraph& graph) {
  const size_t n = graph.line_ids.size();
  RoutingTable table(graph.line_ids);

  // Reverse adjacency: in[v] lists (u, w(u->v)).
  std::vector<std::vector<GraphEdge>> in(n);
  for (size_t u = 0; u < n; ++u) {
    for (const GraphEdge& e : graph.out[u]) {
      if (e.weight < 0.0) throw DataError("negative edge weight in graph");
      in[e.to].push_back(GraphEdge{static_cast<int32_t>(u), e.weight});
    }
  }

  std::vector<double> dist(n);
  std::vector<int32_t> hops(n);
  for (size_t m = 0; m < n; ++m) {
    // Distances to destination m over reversed edges, ordered by
    // (weight, hops).
    std::fill(dist.begin(), dist.end(),
              std::numeric_limits<double>::infinity());
    std::fill(hops.begin(), hops.end(), -1);
    using QE = std::tuple<double, int32_t, int32_t>;  // dist, hops, node
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    dist[m] = 0.0;
    hops[m] = 0;
    pq.emplace(0.0, 0, static_cast<int32_t>(m));
    while (!pq.empty()) {
      auto [d, h, v] = pq.top();
      pq.pop();
      if (d > dist[v] + kWeightTieEps || h > hops[v]) continue;
      for (const GraphEdge& e : in[v]) {
        double cand = d + e.weight;
        int32_t cand_hops = h + 1;
        int32_t u = e.to;
        if (weight_less(cand, dist[u])) {
          dist[u] = cand;
          hops[u] = cand_hops;
          pq.emplace(cand, cand_hops, u);
        } else if (weight_tie(cand, dist[u]) && cand_hops < hops[u]) {
          dist[u] = std::min(dist[u], cand);
          hops[u] = cand_hops;
          pq.emplace(dist[u], cand_hops, u);
        }
      }
    }

    for (size_t s = 0; s < n; ++s) {
      RouteEntry& entry = table.entry(static_cast<int>(s),
                                      static_cast<int>(m));
      if (s == m) {
        entry.weight = 0.0;
        entry.hops = 0;
        entry.next_hop = graph.line_ids[m];
        entry.reachable = true;
        continue;
      }
      if (!std::isfinite(dist[s])) continue;  // marked unreachable
      entry.weight = dist[s];
      entry.hops = hops[s];
      entry.reachable = true;
      // Lowest-id next hop consistent with the optimal weight and hops.
      int32_t best = -1;
      for (const GraphEdge& e : graph.out[s]) {
        if (!std::isfinite(dist[e.to])) continue;
        if (!weight_tie(e.weight + dist[e.to], dist[s])) continue;
        if (hops[e.to] + 1 != hops[s]) continue;
        if (best < 0 || graph.line_ids[e.to] < best) {
          best = graph.line_ids[e.to];
        }
      }
      entry.next_hop = best;
    }
  }
  return table;
}

DelayEstimate expected_delay(const std::vector<int32_t>& route_lines,
                             const EncounterMatrix& matrix,
                             const std::map<int32_t, double>& mean_trip_s) {
  DelayEstimate est;
  est.finite = true;
  est.expected_s = 0.0;
  for (size_t i = 0; i + 1 < route_lines.size(); ++i) {
    DelayHop hop;
    hop.line = route_lines[i];
    hop.p_raw = matrix.probability_by_id(route_lines[i], route_lines[i + 1]);
    auto it = mean_trip_s.find(route_lines[i]);
    hop.mean_trip_s = it == mean_trip_s.end() ? 0.0 : it->second;
    if (hop.p_raw <= 0.0) {
      est.finite = false;
      hop.waiting_term_s = std::numeric_limits<double>::infinity();
      hop.term_s = std::numeric_limits<double>::infinity();
    } else {
      hop.waiting_term_s =
          (1.0 - hop.p_raw) / hop.p_raw * hop.mean_trip_s;
      hop.term_s = hop.mean_trip_s / 2.0 + hop.waiting_term_s;
    }
    est.hops.push_back(hop);
  }
  if (est.finite) {
    double sum = 0.0;
    for (const DelayHop& h : est.hops) sum += h.term_s;
    est.expected_s = sum;
  } else {
    est.expected_s = std::numeric_limits<double>::infinity();
  }
  return est;
}

std::string encounter_matrix_to_json(const EncounterMatrix& m) {
  ordered_json j;
  j["line_ids"] = m.line_ids();
  ordered_json trips = ordered_json::array();
  for (size_t i = 0; i < m.size(); ++i) {
    trips.push_back(m.line_trips(static_cast<int>(i)));
  }
  j["line_trips"] = std::move(trips);
  ordered_json counts = ordered_json::array();
  ordered_json probs = ordered_json::array();
  for (size_t i = 0; i < m.size(); ++i) {
    ordered_json crow = ordered_json::array();
    ordered_json prow = ordered_json::array();
    for (size_t jx = 0; jx < m.size(); ++jx) {
      crow.push_back(m.encounter_trips(static_cast<int>(i),
                                       static_cast<int>(jx)));
      prow.push_back(m.probability(static_cast<int>(i),
                                   static_cast<int>(jx)));
    }
    counts.push_back(std::move(crow));
    probs.push_back(std::move(prow));
  }
  j["encounter_trips"] = std::move(counts);
  j["probability"] = std::move(probs);
  return j.dump(1);
}

std::string encounter_matrix_to_csv(const EncounterMatrix& m) {
  std::ostringstream os;
  os << "line_i,line_j,encounter_trips,line_trips,probability\n";
  char buf[128];
  for (size_t i = 0; i < m.size(); ++i) {
    for (size_t j = 0; j < m.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%d,%d,%lld,%lld,%.9f",
                    m.line_ids()[i], m.line_ids()[j],
                    static_cast<long long>(m.encounter_trips(
                        static_cast<int>(i), static_cast<int>(j))),
                    static_cast<long long>(m.line_trips(static_cast<int>(i))),
                    m.probability(static_cast<int>(i), static_cast<int>(j)));
      os << buf << "\n";
    }
  }
  return os.str();
}

std::string routing_table_to_json(const RoutingTable& t,
                                  const std::string& metric_name) {
  ordered_json j;
  j["metric"] = metric_name;
  j["line_ids"] = t.line_ids();
  ordered_json routes = ordered_json::array();
  const size_t n = t.line_ids().size();
  for (size_t s = 0; s < n; ++s) {
    for (size_t d = 0; d < n; ++d) {
      const RouteEntry& e = t.entry(static_cast<int>(s),
                                    static_cast<int>(d));
      ordered_json r;
      r["src"] = t.line_ids()[s];
      r["dst"] = t.line_ids()[d];
      if (e.reachable) {
        r["next_hop"] = e.next_hop;
        r["weight"] = e.weight;
        r["hops"] = e.hops;
        r["probability"] =
            t.route_probability(static_cast<int>(s), static_cast<int>(d));
      } else {
        r["unreachable"] = true;
      }
      routes.push_back(std::move(r));
    }
  }
  j["routes"] = std::move(routes);
  return j.dump(1);
}

}  // namespace bsn

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bsn/mobility.hpp"

namespace bsn {

// Two table weights within this distance are a tie. Ties are broken by
// fewer hops, then the lowest next-hop line id at each step, which keeps
// routing identical under any log base.
constexpr double kWeightTieEps = 1e-9;

inline bool weight_less(double a, double b) { return a < b - kWeightTieEps; }
inline bool weight_tie(double a, double b) {
  return a <= b + kWeightTieEps && b <= a + kWeightTieEps;
}

// Line-to-line encounter frequencies: for each bus, a trip counts toward
// (its line, j) when the bus had at least one contact with any bus of
// line j during that trip. The probability estimate is encounter trips
// over total trips, aggregated over all buses of the source line.
class EncounterMatrix {
 public:
  EncounterMatrix() = default;
  EncounterMatrix(std::vector<int32_t> line_ids);

  int index_of(int32_t line_id) const;
  const std::vector<int32_t>& line_ids() const { return line_ids_; }
  size_t size() const { return line_ids_.size(); }

  int64_t encounter_trips(int i, int j) const { return counts_[i][j]; }
  int64_t line_trips(int i) const { return trips_[i]; }
  bool defined(int i) const { return trips_[i] > 0; }
  double probability(int i, int j) const;
  double probability_by_id(int32_t line_i, int32_t line_j) const;

  void add_encounter_trip(int i, int j) { counts_[i][j]++; }
  void add_line_trips(int i, int64_t n) { trips_[i] += n; }

 private:
  std::vector<int32_t> line_ids_;
  std::vector<std::vector<int64_t>> counts_;
  std::vector<int64_t> trips_;
};

EncounterMatrix estimate_matrix(const MobilityTrace& trace);

// First-digit truncation with the ends pulled into (0, 1): exactly 1.0
// becomes 0.9, and any positive probability that would truncate to zero
// is clamped to 0.1 so the edge survives in the graph. Zero stays zero.
double truncate_probability(double p);

struct GraphEdge {
  int32_t to = -1;   // index into line_ids
  double weight = 0.0;
};

// Directed graph over line indices with nonnegative edge weights; the
// common substrate for probability, hop-count and contact-time tables.
struct WeightedLineGraph {
  std::vector<int32_t> line_ids;
  std::vector<std::vector<GraphEdge>> out;
};

// Probability-weighted graph: an edge exists iff the raw encounter
// probability is greater than zero; its weight is ln(1/p) of the
// truncated probability, so minimizing the weight sum maximizes the
// product of probabilities.
struct LineGraph {
  struct Edge {
    int32_t to = -1;
    double weight = 0.0;
    double p_trunc = 0.0;
    double p_raw = 0.0;
  };
  std::vector<int32_t> line_ids;
  std::vector<std::vector<Edge>> out;

  WeightedLineGraph weighted() const;
};

LineGraph build_graph(const EncounterMatrix& matrix);

struct RouteEntry {
  double weight = std::numeric_limits<double>::infinity();
  int32_t hops = -1;
  int32_t next_hop = -1;  // line id; destination itself for src == dst
  bool reachable = false;
};

class RoutingTable {
 public:
  RoutingTable() = default;
  RoutingTable(std::vector<int32_t> line_ids);

  int index_of(int32_t line_id) const;
  const std::vector<int32_t>& line_ids() const { return line_ids_; }

  const RouteEntry& entry(int src, int dst) const { return to_[dst][src]; }
  RouteEntry& entry(int src, int dst) { return to_[dst][src]; }
  const RouteEntry* entry_by_id(int32_t src_line, int32_t dst_line) const;

  double route_probability(int src, int dst) const;
  // Line ids along the route, source first; {src} when src == dst;
  // empty when unreachable.
  std::vector<int32_t> path(int src, int dst) const;

 private:
  std::vector<int32_t> line_ids_;
  std::vector<std::vector<RouteEntry>> to_;  // [dst][src]
};

// All-pairs shortest paths by per-destination Dijkstra with the
// documented tie-break (weight, then hops, then lowest next-hop id).
RoutingTable shortest_paths(const WeightedLineGraph& graph);

struct DelayHop {
  int32_t line = -1;
  double mean_trip_s = 0.0;
  double p_raw = 0.0;
  double waiting_term_s = 0.0;  // ((1-p)/p) * t
  double term_s = 0.0;          // t/2 + waiting term
};

struct DelayEstimate {
  bool finite = false;
  double expected_s = std::numeric_limits<double>::infinity();
  std::vector<DelayHop> hops;
};

// Upper-bound expected delivery delay along a route: each hop waits half
// a trip on average plus a geometric number of whole trips before the
// next-hop encounter. Uses raw (untruncated) probabilities.
DelayEstimate expected_delay(const std::vector<int32_t>& route_lines,
                             const EncounterMatrix& matrix,
                             const std::map<int32_t, double>& mean_trip_s);

// Serialization for the traffic stage and external consumers.
std::string encounter_matrix_to_json(const EncounterMatrix& m);
std::string encounter_matrix_to_csv(const EncounterMatrix& m);
std::string routing_table_to_json(const RoutingTable& t,
                                  const std::string& metric_name);

}  // namespace bsn

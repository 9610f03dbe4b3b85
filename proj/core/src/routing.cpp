#include "bsn/routing.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <sstream>

#include "bsn/error.hpp"

namespace bsn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string decision_tag_to_string(DecisionTag t) {
  switch (t) {
    case DecisionTag::designated_next_hop: return "designated_next_hop";
    case DecisionTag::opportunistic_improvement:
      return "opportunistic_improvement";
    case DecisionTag::epidemic_copy: return "epidemic_copy";
    case DecisionTag::none: return "none";
  }
  return "none";
}

double RoutingPolicy::remaining_weight(int32_t, int32_t) const { return kInf; }

void RoutingPolicy::on_delivery(int64_t, int64_t) const {}

TableDrivenPolicy::TableDrivenPolicy(std::string name, RoutingTable table)
    : name_(std::move(name)), table_(std::move(table)) {}

double TableDrivenPolicy::remaining_weight(int32_t line,
                                           int32_t dest_line) const {
  const RouteEntry* e = table_.entry_by_id(line, dest_line);
  if (e == nullptr || !e->reachable) return kInf;
  return e->weight;
}

PolicyDecision TableDrivenPolicy::decide(const DecisionContext& ctx) const {
  // Rule (i): the encountered bus's line is the designated next hop.
  const RouteEntry* carrier = table_.entry_by_id(ctx.carrier_line,
                                                 ctx.dest_line);
  int32_t designated = (carrier != nullptr && carrier->reachable)
                           ? carrier->next_hop
                           : -1;
  if (ctx.encountered_line == designated) {
    return {PolicyAction::forward, DecisionTag::designated_next_hop};
  }
  // Rule (ii): strictly shorter remaining distance than the designated
  // next hop (equivalently, a better delivery probability). Covers
  // delivery (distance zero at the destination line) and unreachable
  // carriers waiting for opportunistic contacts.
  double w_encountered = remaining_weight(ctx.encountered_line,
                                          ctx.dest_line);
  double w_designated =
      designated >= 0 ? remaining_weight(designated, ctx.dest_line) : kInf;
  if (w_encountered < kInf &&
      (w_designated == kInf || weight_less(w_encountered, w_designated))) {
    return {PolicyAction::forward, DecisionTag::opportunistic_improvement};
  }
  return {PolicyAction::hold, DecisionTag::none};
}

PolicyDecision EpidemicPolicy::decide(const DecisionContext& ctx) const {
  if (ctx.encountered_has_seen) return {PolicyAction::hold,
                                        DecisionTag::none};
  return {PolicyAction::replicate, DecisionTag::epidemic_copy};
}

WeightedLineGraph unit_weight_graph(const LineGraph& graph) {
  WeightedLineGraph g;
  g.line_ids = graph.line_ids;
  g.out.resize(graph.out.size());
  for (size_t i = 0; i < graph.out.size(); ++i) {
    for (const LineGraph::Edge& e : graph.out[i]) {
      g.out[i].push_back(GraphEdge{e.to, 1.0});
    }
  }
  return g;
}

WeightedLineGraph contact_time_graph(const MobilityTrace& trace) {
  WeightedLineGraph g;
  g.line_ids = trace.admitted_lines;
  g.out.resize(g.line_ids.size());
  auto index_of = [&](int32_t id) {
    auto it = std::lower_bound(g.line_ids.begin(), g.line_ids.end(), id);
    if (it == g.line_ids.end() || *it != id) return -1;
    return static_cast<int>(it - g.line_ids.begin());
  };
  std::map<std::pair<int, int>, int64_t> cumulative;
  for (const ContactEvent& c : trace.contacts) {
    int i = index_of(c.line_a);
    int j = index_of(c.line_b);
    if (i < 0 || j < 0 || i == j) continue;
    cumulative[{std::min(i, j), std::max(i, j)}] += c.end - c.start;
  }
  for (const auto& [pair, seconds] : cumulative) {
    double w = 1.0 / static_cast<double>(seconds);
    g.out[pair.first].push_back(GraphEdge{pair.second, w});
    g.out[pair.second].push_back(GraphEdge{pair.first, w});
  }
  for (auto& edges : g.out) {
    std::sort(edges.begin(), edges.end(),
              [](const GraphEdge& a, const GraphEdge& b) {
                return a.to < b.to;
              });
  }
  return g;
}

PolicyTables build_policy_tables(const MobilityTrace& trace) {
  PolicyTables t{estimate_matrix(trace), {}, {}, {}, {}};
  t.graph = build_graph(t.matrix);
  t.ophop = shortest_paths(t.graph.weighted());
  t.minhop = shortest_paths(unit_weight_graph(t.graph));
  t.shanghai = shortest_paths(contact_time_graph(trace));
  return t;
}

const std::vector<std::string>& registered_policy_names() {
  static const std::vector<std::string> names = {"epidemic", "minhop",
                                                 "ophop", "shanghai"};
  return names;
}

std::unique_ptr<RoutingPolicy> create_policy(const std::string& name,
                                             const PolicyTables& tables) {
  if (name == "ophop") {
    return std::make_unique<TableDrivenPolicy>("ophop", tables.ophop);
  }
  if (name == "minhop") {
    return std::make_unique<TableDrivenPolicy>("minhop", tables.minhop);
  }
  if (name == "shanghai") {
    return std::make_unique<TableDrivenPolicy>("shanghai", tables.shanghai);
  }
  if (name == "epidemic") {
    return std::make_unique<EpidemicPolicy>();
  }
  std::ostringstream os;
  os << "unknown policy '" << name << "'; registered policies:";
  for (const auto& n : registered_policy_names()) os << " " << n;
  throw UsageError(os.str());
}

}  // namespace bsn

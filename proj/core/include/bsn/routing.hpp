#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bsn/encounter.hpp"
#include "bsn/mobility.hpp"

namespace bsn {

enum class PolicyAction { forward, replicate, hold };

enum class DecisionTag {
  designated_next_hop,
  opportunistic_improvement,
  epidemic_copy,
  none
};

struct PolicyDecision {
  PolicyAction action = PolicyAction::hold;
  DecisionTag tag = DecisionTag::none;
};

std::string decision_tag_to_string(DecisionTag t);

// Everything a policy may look at for one (packet, encounter) decision.
// Policies are pure functions of this context plus their immutable
// tables; mutable per-run state (buffers, seen sets) lives in the
// traffic engine.
struct DecisionContext {
  int64_t packet_id = -1;
  int32_t dest_line = -1;
  int32_t carrier_bus = -1;
  int32_t carrier_line = -1;
  int32_t encountered_bus = -1;
  int32_t encountered_line = -1;
  bool encountered_has_seen = false;  // epidemic duplicate suppression
};

class RoutingPolicy {
 public:
  virtual ~RoutingPolicy() = default;
  virtual std::string name() const = 0;
  virtual bool single_copy() const = 0;
  virtual PolicyDecision decide(const DecisionContext& ctx) const = 0;

  // Remaining table distance from a line to a destination; infinity when
  // unreachable or metric-free (epidemic). The traffic engine asserts
  // that every single-copy forward strictly decreases this.
  virtual double remaining_weight(int32_t line, int32_t dest_line) const;

  // Hooks for bookkeeping extensions; default no-ops.
  virtual void on_delivery(int64_t packet_id, int64_t tick) const;
};

// Forwarding shared by all table-driven single-copy policies: hand the
// packet over iff the encountered line is the designated next hop toward
// the destination, or its remaining distance beats the designated next
// hop's. Encounters with the destination line always forward (distance
// zero); same-line encounters never improve and hold.
class TableDrivenPolicy : public RoutingPolicy {
 public:
  TableDrivenPolicy(std::string name, RoutingTable table);

  std::string name() const override { return name_; }
  bool single_copy() const override { return true; }
  PolicyDecision decide(const DecisionContext& ctx) const override;
  double remaining_weight(int32_t line, int32_t dest_line) const override;

  const RoutingTable& table() const { return table_; }

 private:
  std::string name_;
  RoutingTable table_;
};

class EpidemicPolicy : public RoutingPolicy {
 public:
  std::string name() const override { return "epidemic"; }
  bool single_copy() const override { return false; }
  PolicyDecision decide(const DecisionContext& ctx) const override;
};

// Hop-count graph: same edges as the probability graph, unit weights.
WeightedLineGraph unit_weight_graph(const LineGraph& graph);

// Contact-time graph: edge weight is the reciprocal of the cumulative
// intra-contact seconds between the two lines over the measurement day;
// pairs that never met have no edge.
WeightedLineGraph contact_time_graph(const MobilityTrace& trace);

// All link-state inputs derived once per trace and shared by policies.
struct PolicyTables {
  EncounterMatrix matrix;
  LineGraph graph;
  RoutingTable ophop;
  RoutingTable minhop;
  RoutingTable shanghai;
};

PolicyTables build_policy_tables(const MobilityTrace& trace);

const std::vector<std::string>& registered_policy_names();

// Creates a policy by name ("ophop", "minhop", "epidemic", "shanghai").
// Throws UsageError listing the registered names otherwise.
std::unique_ptr<RoutingPolicy> create_policy(const std::string& name,
                                             const PolicyTables& tables);

}  // namespace bsn

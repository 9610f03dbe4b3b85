#include "bsn/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bsn/contacts.hpp"
#include "bsn/error.hpp"
#include "bsn/rng.hpp"

namespace bsn {

using ordered_json = nlohmann::ordered_json;

std::string disposition_to_string(Disposition d) {
  switch (d) {
    case Disposition::in_flight: return "in_flight";
    case Disposition::delivered: return "delivered";
    case Disposition::dropped: return "dropped";
  }
  return "in_flight";
}

std::string drop_reason_to_string(DropReason r) {
  switch (r) {
    case DropReason::none: return "";
    case DropReason::no_successor_bus: return "no_successor_bus";
    case DropReason::successor_buffer_full: return "successor_buffer_full";
  }
  return "";
}

namespace {

// One buffered instance of a packet. Single-copy transfers move the
// packet by killing the sender's node and creating one at the receiver;
// epidemic replication leaves the sender's alive. Parent links give the
// delivering chain.
struct CopyNode {
  int32_t packet = -1;   // index into packets
  int32_t parent = -1;   // arena index
  int32_t owner = -1;    // bus that received this copy (immutable)
  int32_t from_bus = -1;  // -1 for the origin copy
  int64_t tick = 0;      // reception tick
  bool alive = true;
};

struct BusBufferState {
  std::deque<int32_t> entries;  // arena indices, FIFO; dead entries skipped
  int64_t occupancy = 0;
};

struct Session {
  int32_t bus_a = -1;  // bus_a < bus_b
  int32_t bus_b = -1;
  size_t cursor_ab = 0;  // scan position into bus_a's buffer
  size_t cursor_ba = 0;
  int64_t budget_tick = -1;
  int64_t budget_ab = 0;
  int64_t budget_ba = 0;
};

struct GenEvent {
  int64_t tick;
  int32_t bus;
  int64_t k;
};

// Per-packet bitset over buses; compact duplicate suppression for
// epidemic replication.
class SeenBits {
 public:
  SeenBits(size_t buses) : words_((buses + 63) / 64) {}
  bool test(int32_t packet, int32_t bus) const {
    if (static_cast<size_t>(packet) >= bits_.size()) return false;
    const auto& row = bits_[packet];
    if (row.empty()) return false;
    return (row[bus / 64] >> (bus % 64)) & 1;
  }
  void set(int32_t packet, int32_t bus) {
    if (static_cast<size_t>(packet) >= bits_.size()) {
      bits_.resize(static_cast<size_t>(packet) + 1);
    }
    auto& row = bits_[static_cast<size_t>(packet)];
    if (row.empty()) row.assign(words_, 0);
    row[bus / 64] |= uint64_t{1} << (bus % 64);
  }

 private:
  size_t words_;
  std::vector<std::vector<uint64_t>> bits_;
};

}  // namespace

TrafficResult run_traffic(const MobilityTrace& trace,
                          const RoutingPolicy& policy,
                          const TrafficConfig& config) {
  if (config.rate_per_hour <= 0) throw UsageError("traffic rate must be > 0");
  if (config.packet_size_bytes <= 0 || config.bandwidth_bps <= 0) {
    throw UsageError("bandwidth and packet size must be positive");
  }
  const int64_t pps = config.packets_per_second();
  if (pps <= 0) throw UsageError("bandwidth below one packet per second");
  const int64_t size = config.packet_size_bytes;
  const int64_t capacity = config.buffer_capacity_bytes;
  const bool single_copy = policy.single_copy();
  size_t n_buses = 0;  // bus ids index the state arrays directly
  for (const BusInfo& b : trace.buses) {
    n_buses = std::max(n_buses, static_cast<size_t>(b.bus_id) + 1);
  }

  TrafficResult result;
  result.metrics.policy = policy.name();
  result.metrics.seed = config.seed;
  result.metrics.budget_per_second = pps;
  result.metrics.buffer_capacity_bytes = capacity;

  std::map<int32_t, std::vector<int32_t>> dest_choices;
  for (int32_t line : trace.admitted_lines) {
    std::vector<int32_t>& v = dest_choices[line];
    for (int32_t other : trace.admitted_lines) {
      if (other == line && !config.include_own_line_dest) continue;
      v.push_back(other);
    }
  }

  // Generation schedule: every present bus emits at the configured rate
  // inside the traffic window, deterministically from the seed.
  SubstreamRng rng(config.seed);
  std::vector<GenEvent> gen_events;
  for (const BusInfo& bus : trace.buses) {
    int64_t lo = std::max(bus.created, config.window_start_s);
    int64_t hi = std::min(bus.ended, config.window_end_s);
    if (hi <= lo) continue;
    for (int64_t k = 0;; ++k) {
      int64_t t = config.window_start_s +
                  static_cast<int64_t>(std::floor(
                      static_cast<double>(k) * 3600.0 / config.rate_per_hour +
                      1e-9));
      if (t >= config.window_end_s || t >= hi) break;
      if (t < lo) continue;
      gen_events.push_back(GenEvent{t, bus.bus_id, k});
    }
  }
  std::sort(gen_events.begin(), gen_events.end(),
            [](const GenEvent& a, const GenEvent& b) {
              return std::tie(a.tick, a.bus, a.k) <
                     std::tie(b.tick, b.bus, b.k);
            });

  std::vector<const ContactEvent*> by_start;
  by_start.reserve(trace.contacts.size());
  for (const ContactEvent& c : trace.contacts) by_start.push_back(&c);
  std::vector<const ContactEvent*> by_end = by_start;
  std::sort(by_start.begin(), by_start.end(),
            [](const ContactEvent* a, const ContactEvent* b) {
              return std::tie(a->start, a->bus_a, a->bus_b) <
                     std::tie(b->start, b->bus_a, b->bus_b);
            });
  std::sort(by_end.begin(), by_end.end(),
            [](const ContactEvent* a, const ContactEvent* b) {
              return std::tie(a->end, a->bus_a, a->bus_b) <
                     std::tie(b->end, b->bus_a, b->bus_b);
            });
  std::vector<const RetirementEvent*> retirements;
  retirements.reserve(trace.retirements.size());
  for (const RetirementEvent& r : trace.retirements) {
    retirements.push_back(&r);
  }
  std::sort(retirements.begin(), retirements.end(),
            [](const RetirementEvent* a, const RetirementEvent* b) {
              return std::tie(a->tick, a->bus_id) <
                     std::tie(b->tick, b->bus_id);
            });

  std::vector<int32_t> line_of(n_buses, -1);
  for (const BusInfo& b : trace.buses) line_of[b.bus_id] = b.line_id;

  std::vector<PacketRecord>& packets = result.packets;
  std::vector<CopyNode> arena;
  std::vector<BusBufferState> bufs(n_buses);
  std::vector<int32_t> live_copies;  // per packet, epidemic accounting
  SeenBits seen(n_buses);
  std::map<std::pair<int32_t, int32_t>, Session> sessions;

  int64_t peak_buffer = 0;
  int32_t peak_buffer_bus = -1;
  auto note_occupancy = [&](int32_t bus) {
    if (bufs[bus].occupancy > peak_buffer) {
      peak_buffer = bufs[bus].occupancy;
      peak_buffer_bus = bus;
    }
    if (bufs[bus].occupancy > capacity) {
      throw DataError("buffer occupancy exceeded capacity (engine bug)");
    }
  };

  auto chain_hops = [&](int32_t node_idx) {
    std::vector<Hop> hops;
    for (int32_t i = node_idx; i >= 0; i = arena[i].parent) {
      if (arena[i].from_bus >= 0) {
        hops.push_back(Hop{arena[i].tick, arena[i].from_bus,
                           arena[i].owner});
      }
    }
    std::reverse(hops.begin(), hops.end());
    return hops;
  };

  auto drop_packet = [&](PacketRecord& pkt, DropReason reason) {
    if (pkt.disposition != Disposition::in_flight) return;
    pkt.disposition = Disposition::dropped;
    pkt.drop_reason = reason;
  };

  auto deliver = [&](PacketRecord& pkt, int32_t via_node, int64_t t) {
    if (pkt.disposition != Disposition::in_flight) return;
    pkt.disposition = Disposition::delivered;
    pkt.delivered_at = t;
    pkt.hops = chain_hops(via_node);
    policy.on_delivery(pkt.packet_id, t);
  };

  int64_t t_now = 0;

  // One forwarding attempt in one direction of a session. Returns true
  // iff one packet moved (consuming one budget slot). FIFO: the cursor
  // walks the sender buffer once per contact; a head blocked on receiver
  // space stalls the direction until space frees or the decision flips.
  auto try_one = [&](Session& s, bool a_to_b) -> bool {
    int32_t sender = a_to_b ? s.bus_a : s.bus_b;
    int32_t receiver = a_to_b ? s.bus_b : s.bus_a;
    int64_t& budget = a_to_b ? s.budget_ab : s.budget_ba;
    size_t& cursor = a_to_b ? s.cursor_ab : s.cursor_ba;
    if (budget <= 0) return false;
    auto& buf = bufs[sender].entries;
    while (cursor < buf.size()) {
      int32_t node_idx = buf[cursor];
      CopyNode& node = arena[node_idx];
      if (!node.alive || node.owner != sender) {
        ++cursor;
        continue;
      }
      PacketRecord& pkt = packets[node.packet];
      DecisionContext ctx;
      ctx.packet_id = pkt.packet_id;
      ctx.dest_line = pkt.dest_line;
      ctx.carrier_bus = sender;
      ctx.carrier_line = line_of[sender];
      ctx.encountered_bus = receiver;
      ctx.encountered_line = line_of[receiver];
      ctx.encountered_has_seen =
          single_copy ? false : seen.test(node.packet, receiver);
      PolicyDecision d = policy.decide(ctx);
      if (d.action == PolicyAction::hold) {
        ++cursor;
        continue;
      }
      bool delivery = line_of[receiver] == pkt.dest_line;
      if (!delivery && bufs[receiver].occupancy + size > capacity) {
        return false;
      }
      if (single_copy) {
        double before = policy.remaining_weight(line_of[sender],
                                                pkt.dest_line);
        double after = policy.remaining_weight(line_of[receiver],
                                               pkt.dest_line);
        if (!(after < before)) {
          throw DataError(
              "single-copy forward did not decrease remaining weight");
        }
      }
      budget--;
      const int32_t pkt_idx = node.packet;
      int32_t new_idx = static_cast<int32_t>(arena.size());
      // push_back may reallocate; re-address the sender node afterwards
      arena.push_back(
          CopyNode{pkt_idx, node_idx, receiver, sender, t_now, !delivery});
      if (single_copy) {
        arena[node_idx].alive = false;
        bufs[sender].occupancy -= pkt.size;
      } else {
        pkt.copies++;
        seen.set(pkt_idx, receiver);
        if (!delivery) live_copies[pkt_idx]++;
      }
      if (delivery) {
        deliver(pkt, new_idx, t_now);
      } else {
        bufs[receiver].entries.push_back(new_idx);
        bufs[receiver].occupancy += pkt.size;
        note_occupancy(receiver);
      }
      ++cursor;
      return true;
    }
    return false;
  };

  const int64_t series_bucket = 300;
  const int64_t buffer_bucket = 60;
  int64_t span = trace.duration_ticks();
  result.series.resize(
      static_cast<size_t>((span + series_bucket - 1) / series_bucket));
  for (size_t i = 0; i < result.series.size(); ++i) {
    result.series[i].bucket_start =
        trace.start_tick + static_cast<int64_t>(i) * series_bucket;
  }
  auto series_at = [&](int64_t t) -> SeriesPoint& {
    return result.series[static_cast<size_t>((t - trace.start_tick) /
                                             series_bucket)];
  };

  size_t gen_ptr = 0, start_ptr = 0, end_ptr = 0, ret_ptr = 0;
  int64_t next_packet_id = 0;
  int64_t generation_blocked = 0;
  bool warned_no_destinations = false;

  for (int64_t t = trace.start_tick; t <= trace.end_tick; ++t) {
    t_now = t;

    // 1. Traffic generation.
    while (gen_ptr < gen_events.size() && gen_events[gen_ptr].tick == t) {
      const GenEvent& g = gen_events[gen_ptr++];
      const auto& choices = dest_choices[line_of[g.bus]];
      int64_t packet_id = next_packet_id++;
      if (choices.empty()) {
        if (!warned_no_destinations) {
          result.metrics.notes.push_back(
              "no admitted destination lines; traffic generation idle");
          warned_no_destinations = true;
        }
        continue;
      }
      int32_t dest = choices[rng.uniform("traffic", choices.size(),
                                         static_cast<uint64_t>(g.bus),
                                         static_cast<uint64_t>(g.k))];
      if (bufs[g.bus].occupancy + size > capacity) {
        generation_blocked++;  // id consumed to stay aligned across policies
        continue;
      }
      int32_t pkt_idx = static_cast<int32_t>(packets.size());
      PacketRecord pkt;
      pkt.packet_id = packet_id;
      pkt.created_at = t;
      pkt.source_bus = g.bus;
      pkt.source_line = line_of[g.bus];
      pkt.dest_line = dest;
      pkt.size = size;
      if (dest == pkt.source_line) {
        // The carrier itself satisfies an own-line destination.
        pkt.disposition = Disposition::delivered;
        pkt.delivered_at = t;
        packets.push_back(std::move(pkt));
        live_copies.push_back(0);
      } else {
        packets.push_back(std::move(pkt));
        live_copies.push_back(1);
        int32_t node_idx = static_cast<int32_t>(arena.size());
        arena.push_back(CopyNode{pkt_idx, -1, g.bus, -1, t, true});
        bufs[g.bus].entries.push_back(node_idx);
        bufs[g.bus].occupancy += size;
        note_occupancy(g.bus);
        if (!single_copy) seen.set(pkt_idx, g.bus);
      }
      series_at(t).generated++;
    }

    // 2. Contact ends, then starts.
    while (end_ptr < by_end.size() && by_end[end_ptr]->end == t) {
      const ContactEvent* c = by_end[end_ptr++];
      sessions.erase({c->bus_a, c->bus_b});
    }
    while (start_ptr < by_start.size() && by_start[start_ptr]->start == t) {
      const ContactEvent* c = by_start[start_ptr++];
      Session s;
      s.bus_a = c->bus_a;
      s.bus_b = c->bus_b;
      sessions[{c->bus_a, c->bus_b}] = s;
    }

    // 3. Forwarding, sessions in normalized (min,max) bus order; slots
    // alternate directions while both sides have eligible traffic.
    for (auto& [key, s] : sessions) {
      if (s.budget_tick != t) {
        s.budget_tick = t;
        s.budget_ab = pps;
        s.budget_ba = pps;
      }
      bool moved = true;
      while (moved) {
        bool m1 = try_one(s, true);
        bool m2 = try_one(s, false);
        moved = m1 || m2;
      }
    }

    // 4. End-of-line handoffs from retiring buses.
    while (ret_ptr < retirements.size() && retirements[ret_ptr]->tick == t) {
      const RetirementEvent& r = *retirements[ret_ptr++];
      int32_t successor = r.successor_bus;
      auto& buf = bufs[r.bus_id].entries;
      for (size_t i = 0; i < buf.size(); ++i) {
        int32_t node_idx = buf[i];
        if (!arena[node_idx].alive || arena[node_idx].owner != r.bus_id) {
          continue;
        }
        const int32_t pkt_idx = arena[node_idx].packet;
        PacketRecord& pkt = packets[pkt_idx];
        arena[node_idx].alive = false;
        bufs[r.bus_id].occupancy -= pkt.size;
        if (successor < 0) {
          if (single_copy || --live_copies[pkt_idx] == 0) {
            drop_packet(pkt, DropReason::no_successor_bus);
          }
          continue;
        }
        if (!single_copy && seen.test(pkt_idx, successor)) {
          // Redundant copy: the successor already carried this packet.
          if (--live_copies[pkt_idx] == 0) {
            drop_packet(pkt, DropReason::no_successor_bus);
          }
          continue;
        }
        if (line_of[successor] == pkt.dest_line) {
          int32_t new_idx = static_cast<int32_t>(arena.size());
          arena.push_back(
              CopyNode{pkt_idx, node_idx, successor, r.bus_id, t, false});
          if (!single_copy) {
            seen.set(pkt_idx, successor);
            live_copies[pkt_idx]--;
          }
          deliver(pkt, new_idx, t);
          continue;
        }
        if (bufs[successor].occupancy + pkt.size <= capacity) {
          int32_t new_idx = static_cast<int32_t>(arena.size());
          arena.push_back(
              CopyNode{pkt_idx, node_idx, successor, r.bus_id, t, true});
          bufs[successor].entries.push_back(new_idx);
          bufs[successor].occupancy += pkt.size;
          note_occupancy(successor);
          if (!single_copy) seen.set(pkt_idx, successor);
        } else {
          if (single_copy || --live_copies[pkt_idx] == 0) {
            drop_packet(pkt, DropReason::successor_buffer_full);
          }
        }
      }
      buf.clear();
      bufs[r.bus_id].occupancy = 0;
    }

    // 5. Buffer occupancy samples.
    if ((t - trace.start_tick) % buffer_bucket == 0) {
      BufferPoint bp;
      bp.tick = t;
      for (size_t b = 0; b < n_buses; ++b) {
        bp.total_bytes += bufs[b].occupancy;
        bp.max_bus_bytes = std::max(bp.max_bus_bytes, bufs[b].occupancy);
      }
      result.buffer_series.push_back(bp);
    }
  }

  MetricsReport& m = result.metrics;
  m.generation_blocked = generation_blocked;
  std::vector<double> delays_h;
  for (PacketRecord& pkt : packets) {
    if (pkt.disposition == Disposition::delivered) {
      m.delivered++;
      delays_h.push_back(
          static_cast<double>(pkt.delivered_at - pkt.created_at) / 3600.0);
      series_at(pkt.delivered_at).delivered++;
    } else if (pkt.disposition == Disposition::dropped) {
      m.dropped++;
      m.drops_by_reason[drop_reason_to_string(pkt.drop_reason)]++;
    } else {
      m.in_flight_at_end++;
    }
    m.replica_copies += pkt.copies;
  }
  if (single_copy) {
    // In-flight packets carry their trajectory so far in the log.
    for (size_t i = 0; i < arena.size(); ++i) {
      const CopyNode& node = arena[i];
      if (!node.alive) continue;
      PacketRecord& pkt = packets[node.packet];
      if (pkt.disposition == Disposition::in_flight && pkt.hops.empty()) {
        pkt.hops = chain_hops(static_cast<int32_t>(i));
      }
    }
  }
  m.generated = static_cast<int64_t>(packets.size());
  m.conservation_ok =
      m.generated == m.delivered + m.dropped + m.in_flight_at_end;
  m.delivery_ratio =
      m.generated > 0 ? static_cast<double>(m.delivered) /
                            static_cast<double>(m.generated)
                      : 0.0;
  if (!delays_h.empty()) {
    ContactStats st = stats_from_samples(delays_h);
    m.delay_median_h = st.median;
    m.delay_mean_h = st.mean;
    m.delay_std_h = st.std_dev;
  }
  m.max_buffer_bytes = peak_buffer;
  m.max_buffer_bus = peak_buffer_bus;
  m.replicas_per_packet =
      m.generated > 0 ? static_cast<double>(m.replica_copies - m.generated) /
                            static_cast<double>(m.generated)
                      : 0.0;
  return result;
}

std::vector<DelayCdfRow> delay_cdf(const TrafficResult& result) {
  std::vector<int64_t> delays;
  for (const PacketRecord& p : result.packets) {
    if (p.disposition == Disposition::delivered) {
      delays.push_back(p.delivered_at - p.created_at);
    }
  }
  std::vector<DelayCdfRow> rows;
  if (delays.empty()) return rows;
  std::sort(delays.begin(), delays.end());
  int64_t max_minute = (delays.back() + 59) / 60;
  int64_t generated = static_cast<int64_t>(result.packets.size());
  size_t idx = 0;
  for (int64_t minute = 0; minute <= max_minute; ++minute) {
    while (idx < delays.size() && delays[idx] <= minute * 60) ++idx;
    DelayCdfRow row;
    row.minute = minute;
    row.delivered_within = static_cast<int64_t>(idx);
    row.fraction_of_delivered =
        static_cast<double>(idx) / static_cast<double>(delays.size());
    row.fraction_of_generated =
        generated > 0
            ? static_cast<double>(idx) / static_cast<double>(generated)
            : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string metrics_to_json(const MetricsReport& m,
                            const std::string& provenance_json) {
  ordered_json j;
  j["policy"] = m.policy;
  j["seed"] = m.seed;
  j["budget_packets_per_second"] = m.budget_per_second;
  j["buffer_capacity_bytes"] = m.buffer_capacity_bytes;
  j["generated"] = m.generated;
  j["delivered"] = m.delivered;
  j["dropped"] = m.dropped;
  j["in_flight_at_end"] = m.in_flight_at_end;
  j["generation_blocked"] = m.generation_blocked;
  ordered_json drops = ordered_json::object();
  for (const auto& [k, v] : m.drops_by_reason) drops[k] = v;
  j["drops_by_reason"] = std::move(drops);
  j["conservation_ok"] = m.conservation_ok;
  j["delivery_ratio"] = m.delivery_ratio;
  j["delay_hours"] = {{"median", m.delay_median_h},
                      {"mean", m.delay_mean_h},
                      {"std_dev", m.delay_std_h}};
  j["max_buffer_bytes"] = m.max_buffer_bytes;
  j["max_buffer_bus"] = m.max_buffer_bus;
  j["replica_copies"] = m.replica_copies;
  j["replicas_per_packet"] = m.replicas_per_packet;
  if (!m.notes.empty()) j["notes"] = m.notes;
  if (!provenance_json.empty()) {
    j["provenance"] = ordered_json::parse(provenance_json);
  }
  return j.dump(1);
}

void save_traffic_result(const TrafficResult& result, const std::string& dir,
                         const std::string& provenance_line,
                         const std::string& provenance_json) {
  std::filesystem::create_directories(dir);
  const std::string& policy = result.metrics.policy;
  auto path = [&](const std::string& stem) {
    return (std::filesystem::path(dir) / (stem + "_" + policy)).string();
  };

  {
    std::ofstream out(path("metrics") + ".json");
    if (!out) throw DataError("cannot write metrics json");
    out << metrics_to_json(result.metrics, provenance_json) << "\n";
  }
  {
    std::ofstream out(path("packets") + ".csv");
    if (!out) throw DataError("cannot write packet log");
    if (!provenance_line.empty()) out << "# " << provenance_line << "\n";
    out << "packet_id,created_at,source_bus,source_line,dest_line,size,"
           "disposition,delivered_at,drop_reason,hop_count,hop_trace\n";
    char buf[192];
    for (const PacketRecord& p : result.packets) {
      std::snprintf(buf, sizeof(buf), "%lld,%lld,%d,%d,%d,%lld,%s,%lld,%s,%zu",
                    static_cast<long long>(p.packet_id),
                    static_cast<long long>(p.created_at), p.source_bus,
                    p.source_line, p.dest_line,
                    static_cast<long long>(p.size),
                    disposition_to_string(p.disposition).c_str(),
                    static_cast<long long>(p.delivered_at),
                    drop_reason_to_string(p.drop_reason).c_str(),
                    p.hops.size());
      out << buf << ",";
      for (size_t i = 0; i < p.hops.size(); ++i) {
        if (i > 0) out << ";";
        std::snprintf(buf, sizeof(buf), "%lld:%d>%d",
                      static_cast<long long>(p.hops[i].tick),
                      p.hops[i].from_bus, p.hops[i].to_bus);
        out << buf;
      }
      out << "\n";
    }
  }
  {
    std::ofstream out(path("delay_cdf") + ".csv");
    if (!provenance_line.empty()) out << "# " << provenance_line << "\n";
    out << "minute,delivered_within,fraction_of_delivered,"
           "fraction_of_generated\n";
    char buf[128];
    for (const DelayCdfRow& r : delay_cdf(result)) {
      std::snprintf(buf, sizeof(buf), "%lld,%lld,%.6f,%.6f",
                    static_cast<long long>(r.minute),
                    static_cast<long long>(r.delivered_within),
                    r.fraction_of_delivered, r.fraction_of_generated);
      out << buf << "\n";
    }
  }
  {
    std::ofstream out(path("series") + ".csv");
    if (!provenance_line.empty()) out << "# " << provenance_line << "\n";
    out << "bucket_start_s,generated,delivered\n";
    char buf[128];
    for (const SeriesPoint& s : result.series) {
      std::snprintf(buf, sizeof(buf), "%lld,%lld,%lld",
                    static_cast<long long>(s.bucket_start),
                    static_cast<long long>(s.generated),
                    static_cast<long long>(s.delivered));
      out << buf << "\n";
    }
  }
  {
    std::ofstream out(path("buffer") + ".csv");
    if (!provenance_line.empty()) out << "# " << provenance_line << "\n";
    out << "tick,max_bus_bytes,total_bytes\n";
    char buf[128];
    for (const BufferPoint& b : result.buffer_series) {
      std::snprintf(buf, sizeof(buf), "%lld,%lld,%lld",
                    static_cast<long long>(b.tick),
                    static_cast<long long>(b.max_bus_bytes),
                    static_cast<long long>(b.total_bytes));
      out << buf << "\n";
    }
  }
}

}  // namespace bsn

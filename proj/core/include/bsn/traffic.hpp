#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsn/mobility.hpp"
#include "bsn/routing.hpp"

namespace bsn {

enum class Disposition { in_flight, delivered, dropped };

enum class DropReason { none, no_successor_bus, successor_buffer_full };

std::string disposition_to_string(Disposition d);
std::string drop_reason_to_string(DropReason r);

struct Hop {
  int64_t tick = 0;
  int32_t from_bus = -1;
  int32_t to_bus = -1;
};

struct PacketRecord {
  int64_t packet_id = -1;
  int64_t created_at = 0;
  int32_t source_bus = -1;
  int32_t source_line = -1;
  int32_t dest_line = -1;
  int64_t size = 0;
  Disposition disposition = Disposition::in_flight;
  int64_t delivered_at = -1;
  DropReason drop_reason = DropReason::none;
  std::vector<Hop> hops;  // delivering chain (single copy: full trajectory)
  int64_t copies = 1;     // copies created (epidemic replication + origin)
};

struct TrafficConfig {
  int64_t bandwidth_bps = 10'000'000;
  int64_t packet_size_bytes = 64 * 1024;
  int64_t buffer_capacity_bytes = 512ll * 1024 * 1024;
  double rate_per_hour = 12.0;  // packets per bus per hour
  int64_t window_start_s = 8 * 3600;
  int64_t window_end_s = 18 * 3600;
  bool include_own_line_dest = false;
  uint64_t seed = 0;

  // Transmissions available per directed bus pair per second.
  int64_t packets_per_second() const {
    return bandwidth_bps / (packet_size_bytes * 8);
  }
};

struct MetricsReport {
  std::string policy;
  uint64_t seed = 0;
  int64_t budget_per_second = 0;
  int64_t buffer_capacity_bytes = 0;
  int64_t generated = 0;
  int64_t delivered = 0;
  int64_t dropped = 0;
  int64_t in_flight_at_end = 0;
  int64_t generation_blocked = 0;  // source buffer full; not generated
  std::map<std::string, int64_t> drops_by_reason;
  double delivery_ratio = 0.0;
  double delay_median_h = 0.0;
  double delay_mean_h = 0.0;
  double delay_std_h = 0.0;
  int64_t max_buffer_bytes = 0;  // peak single-bus occupancy
  int32_t max_buffer_bus = -1;
  int64_t replica_copies = 0;     // epidemic: total copies created
  double replicas_per_packet = 0.0;
  bool conservation_ok = false;   // generated == delivered+dropped+in_flight
  std::vector<std::string> notes;
};

struct SeriesPoint {
  int64_t bucket_start = 0;
  int64_t generated = 0;
  int64_t delivered = 0;
};

struct BufferPoint {
  int64_t tick = 0;
  int64_t max_bus_bytes = 0;
  int64_t total_bytes = 0;
};

struct TrafficResult {
  MetricsReport metrics;
  std::vector<PacketRecord> packets;
  std::vector<SeriesPoint> series;       // 5-minute buckets
  std::vector<BufferPoint> buffer_series;  // sampled every 60 s
};

// Replays data traffic over a mobility trace under one routing policy:
// seeded generation, per-contact forwarding limited by the per-second
// link budget and receiver buffer space with FIFO contention, end-of-
// line handoff from retiring buses, immediate delivery on reaching any
// bus of the destination line.
TrafficResult run_traffic(const MobilityTrace& trace,
                          const RoutingPolicy& policy,
                          const TrafficConfig& config);

// Fraction of generated (and of delivered) packets delivered within each
// whole minute; one row per minute up to the slowest delivery.
struct DelayCdfRow {
  int64_t minute = 0;
  int64_t delivered_within = 0;
  double fraction_of_delivered = 0.0;
  double fraction_of_generated = 0.0;
};
std::vector<DelayCdfRow> delay_cdf(const TrafficResult& result);

std::string metrics_to_json(const MetricsReport& m,
                            const std::string& provenance_json);

// Writes metrics_<policy>.json, packets_<policy>.csv,
// delay_cdf_<policy>.csv, series_<policy>.csv and buffer_<policy>.csv.
void save_traffic_result(const TrafficResult& result, const std::string& dir,
                         const std::string& provenance_line,
                         const std::string& provenance_json);

}  // namespace bsn

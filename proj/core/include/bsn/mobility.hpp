#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsn/topology.hpp"

namespace bsn {

enum class BusStatus { in_service, waiting_at_head, retired };

std::string bus_status_to_string(BusStatus s);

struct BusInfo {
  int32_t bus_id = -1;
  int32_t line_id = -1;
  int64_t created = 0;  // tick of first departure
  int64_t ended = 0;    // exclusive: retirement tick, or trace end + 1
  BusStatus final_status = BusStatus::retired;
  int32_t trips_completed = 0;
};

struct TripInterval {
  int32_t bus_id = -1;
  int32_t line_id = -1;
  int32_t path_id = -1;
  int64_t depart = 0;
  int64_t arrive = 0;
};

// Radio contact over [start, end): the pair is in contact at every tick
// start..end-1, so end - start is the intra-contact duration in ticks.
struct ContactEvent {
  int32_t bus_a = -1;  // bus_a < bus_b
  int32_t bus_b = -1;
  int32_t line_a = -1;
  int32_t line_b = -1;
  int64_t start = 0;
  int64_t end = 0;
};

struct RetirementEvent {
  int64_t tick = 0;
  int32_t bus_id = -1;
  int32_t successor_bus = -1;  // first bus waiting at the head, or -1
};

struct PositionSample {
  int64_t tick = 0;
  int32_t bus_id = -1;
  int32_t line_id = -1;
  double x = 0, y = 0;
  BusStatus status = BusStatus::in_service;
};

struct MobilityConfig {
  double radio_range_m = 100.0;
  double corridor_half_width_m = 15.0;
  int64_t departure_noise_max_s = 600;
  uint64_t seed = 0;
  int64_t position_stride = 60;  // 0 disables position samples
};

struct MobilityTrace {
  int64_t start_tick = 0;
  int64_t end_tick = 0;  // inclusive last simulated tick
  std::vector<BusInfo> buses;              // indexed by bus_id
  std::vector<TripInterval> trips;         // sorted by (depart, bus)
  std::vector<ContactEvent> contacts;      // sorted by (start, a, b)
  std::vector<RetirementEvent> retirements;  // sorted by (tick, bus)
  std::vector<PositionSample> positions;   // strided samples
  std::vector<int32_t> admitted_lines;     // sorted line ids
  std::map<int32_t, double> line_mean_trip_s;
  uint64_t topology_hash = 0;
  MobilityConfig config;

  int64_t duration_ticks() const { return end_tick - start_tick + 1; }
};

// Replays the timetable over one service day: instantiates buses to
// serve every scheduled departure, queues finished buses at the head of
// the line (at most two may wait; later arrivals retire and hand off to
// the first waiting bus), perturbs departures with uniform nonnegative
// noise, moves buses at constant speed between consecutive stops, and
// logs range+line-of-sight radio contacts.
MobilityTrace run_mobility(const Topology& topology,
                           const MobilityConfig& config);

// Exposed for tests: position of a bus along a path at `local` seconds
// after trip start.
Vec2 position_on_path(const Topology& topology, const PathRecord& path,
                      int64_t local);

// Trace bundle: trace_meta.json plus contacts/trips/retirements/buses/
// positions CSV files in `dir`. The provenance line is prepended to every
// CSV as a '#' comment.
void save_trace(const MobilityTrace& trace, const std::string& dir,
                const std::string& provenance_line);
MobilityTrace load_trace(const std::string& dir);

}  // namespace bsn

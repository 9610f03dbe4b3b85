#pragma once

#include <filesystem>
#include <string>
#include <tuple>
#include <vector>

#include "bsn/mobility.hpp"
#include "bsn/synth.hpp"
#include "bsn/topology.hpp"

namespace bsn::test {

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

struct FeedStop {
  std::string id;
  double lat;
  double lon;
};

struct FeedStopTime {
  std::string stop_id;
  std::string arrival;   // HH:MM:SS
  std::string departure;
};

struct FeedTrip {
  std::string trip_id;
  std::string route_id;
  std::string service_id;
  std::vector<FeedStopTime> stop_times;
};

struct FeedService {
  std::string service_id;
  std::string days = "1,1,1,1,1,0,0";  // monday..sunday flags
};

// Writes a minimal five-table feed into `dir`.
void write_feed(const std::filesystem::path& dir,
                const std::vector<FeedStop>& stops,
                const std::vector<FeedTrip>& trips,
                const std::vector<FeedService>& services = {
                    FeedService{"WD"}});

// Hand-built planar topology helpers (no projection).
struct TopologyBuilder {
  Topology topo;

  TopologyBuilder();
  int32_t stop(const std::string& id, double x, double y);
  // Builds a path over stops with constant travel seconds per segment
  // and optional dwell; returns path id.
  int32_t path(const std::vector<int32_t>& stops, int64_t seg_travel_s,
               int64_t dwell_s = 0);
  // Adds an admitted line; departures as (path, start) pairs.
  int32_t line(const std::vector<std::pair<int32_t, PathRole>>& members,
               const std::vector<std::pair<int32_t, int64_t>>& departures);
  Topology build();
};

// Two perpendicular out-and-back lines crossing mid-city.
Topology crossing_topology(int64_t headway_s = 600,
                           int64_t day_start_s = 6 * 3600,
                           int64_t day_end_s = 8 * 3600);

// Hand-built mobility traces for traffic-engine tests.
class TraceBuilder {
 public:
  TraceBuilder& span(int64_t start, int64_t end);
  TraceBuilder& line(int32_t id, double mean_trip_s = 600.0);
  TraceBuilder& bus(int32_t id, int32_t line, int64_t created, int64_t ended,
                    BusStatus final_status = BusStatus::waiting_at_head);
  TraceBuilder& trip(int32_t bus, int64_t depart, int64_t arrive,
                     int32_t path = 0);
  TraceBuilder& contact(int32_t a, int32_t b, int64_t start, int64_t end);
  TraceBuilder& retire(int64_t tick, int32_t bus, int32_t successor);
  MobilityTrace build();

 private:
  MobilityTrace trace_;
};

// Small synthetic-city presets used across tests.
SynthSpec small_city_spec(int32_t lines = 8, uint64_t headway = 900);

// Independent routing oracle: exhaustive enumeration of all simple paths
// on a truncated-probability edge matrix. Ties on probability (relative
// 1e-9) break by fewer hops, then by the lowest next-hop line id at each
// step, mirroring the library's documented tie-break without sharing its
// code path.
class PathOracle {
 public:
  // prob[i][j] > 0 means a directed edge with that probability.
  explicit PathOracle(std::vector<std::vector<double>> prob);

  double best_probability(int src, int dst) const;  // 0 when unreachable
  int best_hops(int src, int dst) const;            // -1 when unreachable
  // Node indices along the canonical optimal path, {src} when src == dst,
  // empty when unreachable.
  std::vector<int> canonical_path(int src, int dst) const;

 private:
  void enumerate_from(int src);
  std::vector<std::vector<double>> prob_;
  std::vector<std::vector<double>> best_;
  std::vector<std::vector<int>> hops_;
  int n_;
};

}  // namespace bsn::test

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bsn/geometry.hpp"
#include "bsn/gtfs.hpp"

namespace bsn {

enum class PathRole { canonical, reversal, alias };

std::string path_role_to_string(PathRole r);
PathRole path_role_from_string(const std::string& s);

// One distinct stop sequence. Offsets are seconds from trip start
// (departure at the first stop); arrive/depart pairs carry planned
// dwells. Strictly increasing movement times are enforced by inserting
// a one-second floor between consecutive stops, so interpolation never
// divides by zero.
struct PathRecord {
  int32_t id = -1;
  std::vector<int32_t> stops;      // indices into Topology::stops
  std::vector<int64_t> arrive_s;   // offset of arrival at each stop
  std::vector<int64_t> depart_s;   // offset of departure from each stop

  int64_t duration() const { return arrive_s.back(); }
  int32_t first_stop() const { return stops.front(); }
  int32_t last_stop() const { return stops.back(); }
};

struct LineMember {
  int32_t path = -1;
  PathRole role = PathRole::canonical;
};

struct Departure {
  int32_t path = -1;
  int64_t start_s = 0;  // scheduled start, seconds since midnight
};

struct LineRecord {
  int32_t id = -1;
  std::vector<LineMember> members;
  std::vector<Departure> departures;  // sorted by start_s
  bool closed = false;
  double mean_trip_s = 0.0;
};

struct StopNode {
  std::string id;
  Vec2 pos;  // planar meters
};

struct Bounds {
  double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

struct Topology {
  std::vector<StopNode> stops;
  std::vector<PathRecord> paths;
  std::vector<LineRecord> lines;           // admitted (closed) lines
  std::vector<LineRecord> rejected_lines;  // open lines, kept for reporting
  std::vector<std::pair<int32_t, int32_t>> street_segments;  // deduped
  Bounds bounds;
  std::optional<Projection> projection;  // absent for synthetic cities
  std::string source;

  const LineRecord* find_line(int32_t line_id) const;
  std::vector<Segment> street_geometry() const;
};

struct TopologyOptions {
  Weekday service_day = Weekday::monday;
  double alias_threshold = 0.8;
};

struct GroupingInput {
  std::vector<PathRecord> paths;
  // (path, start) per selected trip, in trip_id order.
  std::vector<Departure> departures;
};

// Classifies the selected day's trips into distinct paths. Trips whose
// stop sequence matches an existing path reuse it; offsets come from the
// first trip (by trip_id) that defined the path.
GroupingInput classify_paths(const FeedData& feed, Weekday service_day);

// Groups paths into lines: exact reverse stop order joins as a reversal;
// identical end-of-line stops with stop-set Jaccard similarity at or
// above the threshold joins as an alias. A path preferring several lines
// attaches to the highest-similarity one (ties to the lowest line id).
std::vector<LineRecord> group_lines(const GroupingInput& input,
                                    double alias_threshold);

// Marks each line closed iff its member paths return buses to a
// departure stop: a self-loop path, or both directions between its
// end-of-line stops. Returns {admitted, rejected}.
std::pair<std::vector<LineRecord>, std::vector<LineRecord>>
filter_closed_lines(std::vector<LineRecord> lines,
                    const std::vector<PathRecord>& paths);

// Full feed-to-topology build: classify, group, filter, project stops
// around their centroid, and collect the street segments of admitted
// lines.
Topology build_topology(const FeedData& feed, const TopologyOptions& opts);

// Recomputes street_segments (deduped, admitted lines only) and bounds.
void finalize_topology_geometry(Topology& t);

// Jaccard similarity of two stop sets (exposed for tests).
double stop_set_jaccard(const std::vector<int32_t>& a,
                        const std::vector<int32_t>& b);

// Topology JSON round trip. The hash covers content only (not
// provenance), so a topology produced by chained and one-shot runs
// of the same inputs hashes identically.
std::string topology_to_json(const Topology& t);
Topology topology_from_json(const std::string& json_text);
uint64_t topology_hash(const Topology& t);
void save_topology(const Topology& t, const std::string& path,
                   const std::string& provenance_comment);
Topology load_topology(const std::string& path);

}  // namespace bsn

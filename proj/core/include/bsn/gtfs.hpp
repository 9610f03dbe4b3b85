#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace bsn {

struct StopRecord {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
};

struct TripStopTime {
  int32_t stop_index = -1;   // into FeedData::stops
  int64_t arrival = 0;       // seconds since midnight
  int64_t departure = 0;
};

struct TripRecord {
  std::string trip_id;
  std::string route_id;
  std::string service_id;
  std::string headsign;
  std::vector<TripStopTime> stop_times;  // sorted by stop_sequence
};

enum class Weekday { monday, tuesday, wednesday, thursday, friday, saturday,
                     sunday };

Weekday weekday_from_string(const std::string& name);
std::string weekday_to_string(Weekday d);

struct FeedDiagnostics {
  std::unordered_map<std::string, int64_t> rows_read;
  std::unordered_map<std::string, int64_t> rows_skipped;
  int64_t trips_dropped_unknown_stop = 0;
  int64_t trips_dropped_incomplete = 0;
  int64_t trips_dropped_time_regression = 0;
  std::vector<std::string> notes;

  std::string to_text() const;
};

struct FeedData {
  std::vector<StopRecord> stops;
  std::unordered_map<std::string, int32_t> stop_index;
  std::vector<TripRecord> trips;  // sorted by trip_id
  std::unordered_map<std::string, uint8_t> service_days;  // bit 0 = monday
  FeedDiagnostics diagnostics;

  bool service_covers(const std::string& service_id, Weekday day) const;
};

// Reads a Google-Transit-style feed directory (stops.txt, routes.txt,
// trips.txt, stop_times.txt, calendar.txt). Missing mandatory tables are
// fatal (DataError); malformed rows are skipped and counted. Trips that
// reference unknown stops, have fewer than two timed stops, or run
// backwards in time are dropped and counted.
FeedData parse_feed(const std::string& feed_directory);

}  // namespace bsn

#include "bsn/gtfs.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "bsn/csv.hpp"
#include "bsn/error.hpp"

namespace bsn {

namespace {

const char* kWeekdayNames[] = {"monday",   "tuesday", "wednesday", "thursday",
                               "friday",   "saturday", "sunday"};

CsvTable read_table(const std::string& dir, const std::string& name) {
  std::filesystem::path p = std::filesystem::path(dir) / name;
  if (!std::filesystem::exists(p)) {
    throw DataError("missing mandatory table " + name + " in " + dir);
  }
  return CsvTable::read_file(p.string());
}

}  // namespace

Weekday weekday_from_string(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
  for (int i = 0; i < 7; ++i) {
    if (lower == kWeekdayNames[i]) return static_cast<Weekday>(i);
  }
  throw UsageError("unknown weekday name: " + name);
}

std::string weekday_to_string(Weekday d) {
  return kWeekdayNames[static_cast<int>(d)];
}

std::string FeedDiagnostics::to_text() const {
  std::ostringstream os;
  os << "feed parse diagnostics\n";
  std::vector<std::string> tables;
  for (const auto& [t, _] : rows_read) tables.push_back(t);
  std::sort(tables.begin(), tables.end());
  for (const auto& t : tables) {
    int64_t skipped = 0;
    auto it = rows_skipped.find(t);
    if (it != rows_skipped.end()) skipped = it->second;
    os << "  " << t << ": " << rows_read.at(t) << " rows";
    if (skipped > 0) os << ", " << skipped << " skipped";
    os << "\n";
  }
  if (trips_dropped_unknown_stop > 0)
    os << "  trips dropped (unknown stop): " << trips_dropped_unknown_stop
       << "\n";
  if (trips_dropped_incomplete > 0)
    os << "  trips dropped (fewer than two timed stops): "
       << trips_dropped_incomplete << "\n";
  if (trips_dropped_time_regression > 0)
    os << "  trips dropped (time regression): "
       << trips_dropped_time_regression << "\n";
  for (const auto& n : notes) os << "  note: " << n << "\n";
  return os.str();
}

bool FeedData::service_covers(const std::string& service_id,
                              Weekday day) const {
  auto it = service_days.find(service_id);
  if (it == service_days.end()) return false;
  return (it->second >> static_cast<int>(day)) & 1;
}

FeedData parse_feed(const std::string& feed_directory) {
  FeedData feed;
  FeedDiagnostics& diag = feed.diagnostics;

  // stops.txt
  {
    CsvTable t = read_table(feed_directory, "stops.txt");
    int id_col = t.column("stop_id");
    int lat_col = t.column("stop_lat");
    int lon_col = t.column("stop_lon");
    if (id_col < 0 || lat_col < 0 || lon_col < 0) {
      throw DataError("stops.txt lacks stop_id/stop_lat/stop_lon columns");
    }
    diag.rows_read["stops.txt"] = static_cast<int64_t>(t.row_count());
    for (size_t r = 0; r < t.row_count(); ++r) {
      const std::string& id = t.field(r, id_col);
      auto lat = t.field_double(r, lat_col);
      auto lon = t.field_double(r, lon_col);
      if (id.empty() || !lat || !lon || *lat < -90.0 || *lat > 90.0 ||
          *lon < -180.0 || *lon > 180.0) {
        diag.rows_skipped["stops.txt"]++;
        continue;
      }
      if (feed.stop_index.count(id)) {
        diag.rows_skipped["stops.txt"]++;
        continue;  // duplicate stop_id
      }
      feed.stop_index[id] = static_cast<int32_t>(feed.stops.size());
      feed.stops.push_back(StopRecord{id, *lat, *lon});
    }
  }

  // routes.txt: only referential context; parsed for row accounting.
  {
    CsvTable t = read_table(feed_directory, "routes.txt");
    if (t.column("route_id") < 0) {
      throw DataError("routes.txt lacks route_id column");
    }
    diag.rows_read["routes.txt"] = static_cast<int64_t>(t.row_count());
  }

  // calendar.txt
  {
    CsvTable t = read_table(feed_directory, "calendar.txt");
    int sid_col = t.column("service_id");
    if (sid_col < 0) throw DataError("calendar.txt lacks service_id column");
    int day_cols[7];
    for (int i = 0; i < 7; ++i) day_cols[i] = t.column(kWeekdayNames[i]);
    diag.rows_read["calendar.txt"] = static_cast<int64_t>(t.row_count());
    for (size_t r = 0; r < t.row_count(); ++r) {
      const std::string& sid = t.field(r, sid_col);
      if (sid.empty()) {
        diag.rows_skipped["calendar.txt"]++;
        continue;
      }
      uint8_t mask = 0;
      for (int i = 0; i < 7; ++i) {
        auto v = t.field_int(r, day_cols[i]);
        if (v && *v == 1) mask |= static_cast<uint8_t>(1u << i);
      }
      feed.service_days[sid] |= mask;
    }
  }

  // trips.txt
  std::unordered_map<std::string, size_t> trip_pos;
  {
    CsvTable t = read_table(feed_directory, "trips.txt");
    int trip_col = t.column("trip_id");
    int route_col = t.column("route_id");
    int service_col = t.column("service_id");
    int headsign_col = t.column("trip_headsign");
    if (trip_col < 0 || route_col < 0 || service_col < 0) {
      throw DataError("trips.txt lacks trip_id/route_id/service_id columns");
    }
    diag.rows_read["trips.txt"] = static_cast<int64_t>(t.row_count());
    for (size_t r = 0; r < t.row_count(); ++r) {
      const std::string& id = t.field(r, trip_col);
      if (id.empty() || trip_pos.count(id)) {
        diag.rows_skipped["trips.txt"]++;
        continue;
      }
      TripRecord trip;
      trip.trip_id = id;
      trip.route_id = t.field(r, route_col);
      trip.service_id = t.field(r, service_col);
      trip.headsign = t.field(r, headsign_col);
      trip_pos[id] = feed.trips.size();
      feed.trips.push_back(std::move(trip));
    }
  }

  // stop_times.txt
  {
    CsvTable t = read_table(feed_directory, "stop_times.txt");
    int trip_col = t.column("trip_id");
    int arr_col = t.column("arrival_time");
    int dep_col = t.column("departure_time");
    int stop_col = t.column("stop_id");
    int seq_col = t.column("stop_sequence");
    if (trip_col < 0 || arr_col < 0 || dep_col < 0 || stop_col < 0 ||
        seq_col < 0) {
      throw DataError("stop_times.txt lacks required columns");
    }
    diag.rows_read["stop_times.txt"] = static_cast<int64_t>(t.row_count());

    struct RawStopTime {
      int64_t seq;
      int32_t stop_index;
      int64_t arrival;
      int64_t departure;
    };
    std::unordered_map<std::string, std::vector<RawStopTime>> by_trip;
    std::unordered_map<std::string, bool> unknown_stop;
    std::unordered_map<std::string, bool> malformed_row;
    for (size_t r = 0; r < t.row_count(); ++r) {
      const std::string& trip_id = t.field(r, trip_col);
      auto seq = t.field_int(r, seq_col);
      auto arr = parse_hms(t.field(r, arr_col));
      auto dep = parse_hms(t.field(r, dep_col));
      const std::string& stop_id = t.field(r, stop_col);
      if (trip_id.empty() || !seq || !arr || !dep || *dep < *arr) {
        diag.rows_skipped["stop_times.txt"]++;
        if (!trip_id.empty()) malformed_row[trip_id] = true;
        continue;
      }
      auto sit = feed.stop_index.find(stop_id);
      if (sit == feed.stop_index.end()) {
        diag.rows_skipped["stop_times.txt"]++;
        unknown_stop[trip_id] = true;
        continue;
      }
      by_trip[trip_id].push_back(RawStopTime{*seq, sit->second, *arr, *dep});
    }

    std::vector<TripRecord> kept;
    kept.reserve(feed.trips.size());
    for (TripRecord& trip : feed.trips) {
      if (unknown_stop.count(trip.trip_id)) {
        diag.trips_dropped_unknown_stop++;
        continue;
      }
      auto it = by_trip.find(trip.trip_id);
      if (malformed_row.count(trip.trip_id) || it == by_trip.end() ||
          it->second.size() < 2) {
        diag.trips_dropped_incomplete++;
        continue;
      }
      auto& raw = it->second;
      std::sort(raw.begin(), raw.end(),
                [](const RawStopTime& a, const RawStopTime& b) {
                  return a.seq < b.seq;
                });
      bool regression = false;
      for (size_t i = 1; i < raw.size(); ++i) {
        if (raw[i].arrival < raw[i - 1].departure) {
          regression = true;
          break;
        }
      }
      if (regression) {
        diag.trips_dropped_time_regression++;
        continue;
      }
      trip.stop_times.clear();
      trip.stop_times.reserve(raw.size());
      for (const auto& st : raw) {
        trip.stop_times.push_back(
            TripStopTime{st.stop_index, st.arrival, st.departure});
      }
      kept.push_back(std::move(trip));
    }
    feed.trips = std::move(kept);
  }

  std::sort(feed.trips.begin(), feed.trips.end(),
            [](const TripRecord& a, const TripRecord& b) {
              return a.trip_id < b.trip_id;
            });

  if (feed.trips.empty()) throw DataError("no trips");
  return feed;
}

}  // namespace bsn

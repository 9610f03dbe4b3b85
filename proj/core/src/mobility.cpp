#include "bsn/mobility.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "bsn/csv.hpp"
#include "bsn/error.hpp"
#include "bsn/geometry.hpp"
#include "bsn/rng.hpp"

namespace bsn {

using ordered_json = nlohmann::ordered_json;

std::string bus_status_to_string(BusStatus s) {
  switch (s) {
    case BusStatus::in_service: return "in_service";
    case BusStatus::waiting_at_head: return "waiting";
    case BusStatus::retired: return "retired";
  }
  return "retired";
}

Vec2 position_on_path(const Topology& topology, const PathRecord& path,
                      int64_t local) {
  if (local <= 0) return topology.stops[path.stops.front()].pos;
  if (local >= path.arrive_s.back()) {
    return topology.stops[path.stops.back()].pos;
  }
  // Find the segment or dwell containing `local`.
  size_t n = path.stops.size();
  for (size_t i = 0; i + 1 < n; ++i) {
    if (local <= path.depart_s[i]) {
      return topology.stops[path.stops[i]].pos;  // dwelling at stop i
    }
    if (local < path.arrive_s[i + 1]) {
      double f = static_cast<double>(local - path.depart_s[i]) /
                 static_cast<double>(path.arrive_s[i + 1] - path.depart_s[i]);
      Vec2 a = topology.stops[path.stops[i]].pos;
      Vec2 b = topology.stops[path.stops[i + 1]].pos;
      return a + (b - a) * f;
    }
  }
  return topology.stops[path.stops.back()].pos;
}

namespace {

struct ScheduledDeparture {
  int64_t tick;  // perturbed start
  int32_t line_id;
  int32_t path_id;
  int32_t index;  // position in the line's departure list
};

struct ActiveBus {
  int32_t line_id = -1;
  BusStatus status = BusStatus::in_service;
  int32_t path_id = -1;
  int64_t trip_start = 0;
  int64_t trip_arrive = 0;
  int32_t waiting_stop = -1;
  int32_t trips_completed = 0;
  int64_t created = 0;
};

}  // namespace

MobilityTrace run_mobility(const Topology& topology,
                           const MobilityConfig& config) {
  // Validate departures against paths.
  for (const LineRecord& line : topology.lines) {
    for (const Departure& d : line.departures) {
      if (d.path < 0 || static_cast<size_t>(d.path) >= topology.paths.size()) {
        throw DataError("departure references unknown path " +
                        std::to_string(d.path) + " on line " +
                        std::to_string(line.id));
      }
    }
  }
  bool any_departure = false;
  for (const LineRecord& line : topology.lines) {
    if (!line.departures.empty()) any_departure = true;
  }
  if (topology.lines.empty() || !any_departure) {
    throw DataError("no admitted line with departures to simulate");
  }

  SubstreamRng rng(config.seed);
  MobilityTrace trace;
  trace.config = config;
  trace.topology_hash = topology_hash(topology);
  for (const LineRecord& line : topology.lines) {
    trace.admitted_lines.push_back(line.id);
    trace.line_mean_trip_s[line.id] = line.mean_trip_s;
  }
  std::sort(trace.admitted_lines.begin(), trace.admitted_lines.end());

  // Perturb departures. Noise is a pure function of (seed, line, index)
  // so the schedule does not depend on processing order.
  std::vector<ScheduledDeparture> departures;
  for (const LineRecord& line : topology.lines) {
    for (size_t i = 0; i < line.departures.size(); ++i) {
      const Departure& d = line.departures[i];
      int64_t noise =
          config.departure_noise_max_s > 0
              ? static_cast<int64_t>(rng.uniform(
                    "noise",
                    static_cast<uint64_t>(config.departure_noise_max_s + 1),
                    static_cast<uint64_t>(line.id), i))
              : 0;
      departures.push_back(ScheduledDeparture{
          d.start_s + noise, line.id, d.path, static_cast<int32_t>(i)});
    }
  }
  std::sort(departures.begin(), departures.end(),
            [](const ScheduledDeparture& a, const ScheduledDeparture& b) {
              return std::tie(a.tick, a.line_id, a.path_id, a.index) <
                     std::tie(b.tick, b.line_id, b.path_id, b.index);
            });

  int64_t sim_start = departures.front().tick;
  int64_t sim_end = sim_start;
  for (const ScheduledDeparture& d : departures) {
    sim_end = std::max(sim_end, d.tick + topology.paths[d.path_id].duration());
  }
  trace.start_tick = sim_start;
  trace.end_tick = sim_end;

  // Remaining departures per (line, head stop): a bus arriving at a head
  // with nothing left to serve goes out of service.
  std::map<std::pair<int32_t, int32_t>, int64_t> remaining;
  for (const ScheduledDeparture& d : departures) {
    remaining[{d.line_id, topology.paths[d.path_id].first_stop()}]++;
  }

  std::map<std::pair<int32_t, int32_t>, std::deque<int32_t>> head_queues;
  std::vector<ActiveBus> buses;
  std::map<int64_t, std::vector<int32_t>> arrivals_at;

  CorridorIndex corridors(topology.street_geometry(),
                          config.corridor_half_width_m);
  SpatialHashGrid grid(config.radio_range_m);
  std::map<std::pair<int32_t, int32_t>, int64_t> open_contacts;

  auto close_contact = [&](std::pair<int32_t, int32_t> pair, int64_t start,
                           int64_t end) {
    trace.contacts.push_back(ContactEvent{pair.first, pair.second,
                                          buses[pair.first].line_id,
                                          buses[pair.second].line_id, start,
                                          end});
  };

  size_t next_departure = 0;
  for (int64_t t = sim_start; t <= sim_end; ++t) {
    // 1. Arrivals: finish trips, queue at the head or retire.
    auto ait = arrivals_at.find(t);
    if (ait != arrivals_at.end()) {
      std::vector<int32_t> arriving = ait->second;
      arrivals_at.erase(ait);
      std::sort(arriving.begin(), arriving.end());
      for (int32_t bus_id : arriving) {
        ActiveBus& bus = buses[bus_id];
        bus.trips_completed++;
        int32_t head = topology.paths[bus.path_id].last_stop();
        auto key = std::make_pair(bus.line_id, head);
        auto& queue = head_queues[key];
        bool no_more_departures = remaining[key] == 0;
        if (no_more_departures || queue.size() >= 2) {
          int32_t successor = queue.empty() ? -1 : queue.front();
          bus.status = BusStatus::retired;
          trace.retirements.push_back(RetirementEvent{t, bus_id, successor});
          trace.buses[bus_id].ended = t;
          trace.buses[bus_id].final_status = BusStatus::retired;
          trace.buses[bus_id].trips_completed = bus.trips_completed;
        } else {
          bus.status = BusStatus::waiting_at_head;
          bus.waiting_stop = head;
          queue.push_back(bus_id);
        }
      }
    }

    // 2. Departures due this tick: reuse the first waiting bus, else
    // instantiate a new one.
    while (next_departure < departures.size() &&
           departures[next_departure].tick == t) {
      const ScheduledDeparture& d = departures[next_departure++];
      const PathRecord& path = topology.paths[d.path_id];
      auto key = std::make_pair(d.line_id, path.first_stop());
      auto& queue = head_queues[key];
      int32_t bus_id;
      if (!queue.empty()) {
        bus_id = queue.front();
        queue.pop_front();
      } else {
        bus_id = static_cast<int32_t>(buses.size());
        buses.push_back(ActiveBus{});
        buses[bus_id].line_id = d.line_id;
        buses[bus_id].created = t;
        BusInfo info;
        info.bus_id = bus_id;
        info.line_id = d.line_id;
        info.created = t;
        trace.buses.push_back(info);
      }
      ActiveBus& bus = buses[bus_id];
      bus.status = BusStatus::in_service;
      bus.path_id = d.path_id;
      bus.trip_start = t;
      bus.trip_arrive = t + path.duration();
      bus.waiting_stop = -1;
      arrivals_at[bus.trip_arrive].push_back(bus_id);
      trace.trips.push_back(
          TripInterval{bus_id, d.line_id, d.path_id, t, bus.trip_arrive});
      remaining[key]--;
    }

    // 3. Contact detection over present buses (in service or waiting;
    // a waiting bus holds data and can forward).
    grid.clear();
    std::vector<Vec2> pos(buses.size());
    for (size_t i = 0; i < buses.size(); ++i) {
      const ActiveBus& bus = buses[i];
      if (bus.status == BusStatus::retired) continue;
      Vec2 p;
      if (bus.status == BusStatus::waiting_at_head) {
        p = topology.stops[bus.waiting_stop].pos;
      } else {
        p = position_on_path(topology, topology.paths[bus.path_id],
                             t - bus.trip_start);
      }
      pos[i] = p;
      grid.insert(static_cast<uint32_t>(i), p);
    }

    auto candidate_pairs = grid.pairs_within(config.radio_range_m);
    std::vector<std::pair<int32_t, int32_t>> in_contact;
    in_contact.reserve(candidate_pairs.size());
    for (auto [a, b] : candidate_pairs) {
      if (corridors.line_of_sight(pos[a], pos[b])) {
        in_contact.emplace_back(static_cast<int32_t>(a),
                                static_cast<int32_t>(b));
      }
    }

    // Open new events, close vanished ones. Both lists are sorted.
    std::vector<std::pair<int32_t, int32_t>> to_open;
    std::vector<std::pair<int32_t, int32_t>> to_close;
    {
      auto oit = open_contacts.begin();
      size_t ci = 0;
      while (oit != open_contacts.end() || ci < in_contact.size()) {
        if (oit == open_contacts.end()) {
          to_open.push_back(in_contact[ci++]);
        } else if (ci >= in_contact.size()) {
          to_close.push_back((oit++)->first);
        } else if (in_contact[ci] < oit->first) {
          to_open.push_back(in_contact[ci++]);
        } else if (oit->first < in_contact[ci]) {
          to_close.push_back((oit++)->first);
        } else {
          ++oit;
          ++ci;
        }
      }
    }
    for (const auto& pair : to_close) {
      close_contact(pair, open_contacts[pair], t);
      open_contacts.erase(pair);
    }
    for (const auto& pair : to_open) open_contacts[pair] = t;

    // 4. Strided position samples.
    if (config.position_stride > 0 &&
        (t - sim_start) % config.position_stride == 0) {
      for (size_t i = 0; i < buses.size(); ++i) {
        const ActiveBus& bus = buses[i];
        if (bus.status == BusStatus::retired) continue;
        trace.positions.push_back(PositionSample{
            t, static_cast<int32_t>(i), bus.line_id, pos[i].x, pos[i].y,
            bus.status});
      }
    }
  }

  for (auto& [pair, start] : open_contacts) {
    close_contact(pair, start, sim_end + 1);
  }
  std::sort(trace.contacts.begin(), trace.contacts.end(),
            [](const ContactEvent& a, const ContactEvent& b) {
              return std::tie(a.start, a.bus_a, a.bus_b) <
                     std::tie(b.start, b.bus_a, b.bus_b);
            });

  for (size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].status != BusStatus::retired) {
      trace.buses[i].ended = sim_end + 1;
      trace.buses[i].final_status = buses[i].status;
      trace.buses[i].trips_completed = buses[i].trips_completed;
    }
  }
  return trace;
}

namespace {

std::string csv_path(const std::string& dir, const char* name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_csv(const std::string& path, const std::string& provenance,
               const std::string& header,
               const std::vector<std::string>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << header << "\n";
  for (const auto& r : rows) out << r << "\n";
}

}  // namespace

void save_trace(const MobilityTrace& trace, const std::string& dir,
                const std::string& provenance_line) {
  std::filesystem::create_directories(dir);
  char buf[256];

  ordered_json meta;
  meta["format"] = "bsn-trace/1";
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(trace.topology_hash));
  meta["topology_hash"] = buf;
  meta["seed"] = trace.config.seed;
  meta["radio_range_m"] = trace.config.radio_range_m;
  meta["corridor_half_width_m"] = trace.config.corridor_half_width_m;
  meta["departure_noise_max_s"] = trace.config.departure_noise_max_s;
  meta["position_stride"] = trace.config.position_stride;
  meta["start_tick"] = trace.start_tick;
  meta["end_tick"] = trace.end_tick;
  meta["admitted_lines"] = trace.admitted_lines;
  ordered_json mean_trip = ordered_json::object();
  for (const auto& [id, v] : trace.line_mean_trip_s) {
    mean_trip[std::to_string(id)] = v;
  }
  meta["line_mean_trip_s"] = std::move(mean_trip);
  meta["bus_count"] = trace.buses.size();
  meta["contact_count"] = trace.contacts.size();
  meta["trip_count"] = trace.trips.size();
  if (!provenance_line.empty()) meta["provenance"] = provenance_line;
  {
    std::ofstream out(csv_path(dir, "trace_meta.json"));
    if (!out) throw DataError("cannot write trace_meta.json in " + dir);
    out << meta.dump(1) << "\n";
  }

  std::vector<std::string> rows;
  rows.reserve(trace.contacts.size());
  for (const ContactEvent& c : trace.contacts) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%lld,%lld", c.bus_a, c.bus_b,
                  c.line_a, c.line_b, static_cast<long long>(c.start),
                  static_cast<long long>(c.end));
    rows.push_back(buf);
  }
  write_csv(csv_path(dir, "contacts.csv"), provenance_line,
            "bus_a,bus_b,line_a,line_b,start,end", rows);

  rows.clear();
  for (const TripInterval& tr : trace.trips) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%lld,%lld", tr.bus_id,
                  tr.line_id, tr.path_id, static_cast<long long>(tr.depart),
                  static_cast<long long>(tr.arrive));
    rows.push_back(buf);
  }
  write_csv(csv_path(dir, "trips.csv"), provenance_line,
            "bus_id,line_id,path_id,depart,arrive", rows);

  rows.clear();
  for (const RetirementEvent& r : trace.retirements) {
    std::snprintf(buf, sizeof(buf), "%lld,%d,%d",
                  static_cast<long long>(r.tick), r.bus_id, r.successor_bus);
    rows.push_back(buf);
  }
  write_csv(csv_path(dir, "retirements.csv"), provenance_line,
            "tick,bus_id,successor_bus", rows);

  rows.clear();
  for (const BusInfo& b : trace.buses) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%lld,%lld,%s,%d", b.bus_id,
                  b.line_id, static_cast<long long>(b.created),
                  static_cast<long long>(b.ended),
                  bus_status_to_string(b.final_status).c_str(),
                  b.trips_completed);
    rows.push_back(buf);
  }
  write_csv(csv_path(dir, "buses.csv"), provenance_line,
            "bus_id,line_id,created,ended,final_status,trips_completed",
            rows);

  rows.clear();
  for (const PositionSample& p : trace.positions) {
    std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%.3f,%.3f,%s",
                  static_cast<long long>(p.tick), p.bus_id, p.line_id, p.x,
                  p.y, bus_status_to_string(p.status).c_str());
    rows.push_back(buf);
  }
  write_csv(csv_path(dir, "positions.csv"), provenance_line,
            "tick,bus_id,line_id,x,y,status", rows);
}

MobilityTrace load_trace(const std::string& dir) {
  MobilityTrace trace;
  std::string meta_path = csv_path(dir, "trace_meta.json");
  std::ifstream in(meta_path);
  if (!in) throw DataError("cannot open " + meta_path);
  ordered_json meta;
  try {
    in >> meta;
  } catch (const std::exception& e) {
    throw DataError(std::string("bad trace_meta.json: ") + e.what());
  }
  if (meta.value("format", std::string()) != "bsn-trace/1") {
    throw DataError("unrecognized trace format in " + meta_path);
  }
  trace.topology_hash = std::stoull(
      meta.at("topology_hash").get<std::string>(), nullptr, 16);
  trace.config.seed = meta.at("seed").get<uint64_t>();
  trace.config.radio_range_m = meta.at("radio_range_m").get<double>();
  trace.config.corridor_half_width_m =
      meta.at("corridor_half_width_m").get<double>();
  trace.config.departure_noise_max_s =
      meta.at("departure_noise_max_s").get<int64_t>();
  trace.config.position_stride = meta.at("position_stride").get<int64_t>();
  trace.start_tick = meta.at("start_tick").get<int64_t>();
  trace.end_tick = meta.at("end_tick").get<int64_t>();
  trace.admitted_lines = meta.at("admitted_lines").get<std::vector<int32_t>>();
  for (const auto& [k, v] : meta.at("line_mean_trip_s").items()) {
    trace.line_mean_trip_s[std::stoi(k)] = v.get<double>();
  }

  {
    CsvTable t = CsvTable::read_file(csv_path(dir, "contacts.csv"));
    int a = t.column("bus_a"), b = t.column("bus_b");
    int la = t.column("line_a"), lb = t.column("line_b");
    int s = t.column("start"), e = t.column("end");
    for (size_t r = 0; r < t.row_count(); ++r) {
      trace.contacts.push_back(ContactEvent{
          static_cast<int32_t>(*t.field_int(r, a)),
          static_cast<int32_t>(*t.field_int(r, b)),
          static_cast<int32_t>(*t.field_int(r, la)),
          static_cast<int32_t>(*t.field_int(r, lb)), *t.field_int(r, s),
          *t.field_int(r, e)});
    }
  }
  {
    CsvTable t = CsvTable::read_file(csv_path(dir, "trips.csv"));
    int b = t.column("bus_id"), l = t.column("line_id");
    int p = t.column("path_id"), d = t.column("depart"), a = t.column("arrive");
    for (size_t r = 0; r < t.row_count(); ++r) {
      trace.trips.push_back(TripInterval{
          static_cast<int32_t>(*t.field_int(r, b)),
          static_cast<int32_t>(*t.field_int(r, l)),
          static_cast<int32_t>(*t.field_int(r, p)), *t.field_int(r, d),
          *t.field_int(r, a)});
    }
  }
  {
    CsvTable t = CsvTable::read_file(csv_path(dir, "retirements.csv"));
    int tk = t.column("tick"), b = t.column("bus_id");
    int s = t.column("successor_bus");
    for (size_t r = 0; r < t.row_count(); ++r) {
      trace.retirements.push_back(RetirementEvent{
          *t.field_int(r, tk), static_cast<int32_t>(*t.field_int(r, b)),
          static_cast<int32_t>(*t.field_int(r, s))});
    }
  }
  {
    CsvTable t = CsvTable::read_file(csv_path(dir, "buses.csv"));
    int b = t.column("bus_id"), l = t.column("line_id");
    int c = t.column("created"), e = t.column("ended");
    int f = t.column("final_status"), n = t.column("trips_completed");
    for (size_t r = 0; r < t.row_count(); ++r) {
      BusInfo info;
      info.bus_id = static_cast<int32_t>(*t.field_int(r, b));
      info.line_id = static_cast<int32_t>(*t.field_int(r, l));
      info.created = *t.field_int(r, c);
      info.ended = *t.field_int(r, e);
      const std::string& st = t.field(r, f);
      info.final_status = st == "retired" ? BusStatus::retired
                          : st == "waiting" ? BusStatus::waiting_at_head
                                            : BusStatus::in_service;
      info.trips_completed = static_cast<int32_t>(*t.field_int(r, n));
      trace.buses.push_back(info);
    }
  }
  return trace;
}

}  // namespace bsn

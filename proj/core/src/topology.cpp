#include "bsn/topology.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "bsn/error.hpp"
#include "bsn/rng.hpp"

namespace bsn {

using ordered_json = nlohmann::ordered_json;

std::string path_role_to_string(PathRole r) {
  switch (r) {
    case PathRole::canonical: return "canonical";
    case PathRole::reversal: return "reversal";
    case PathRole::alias: return "alias";
  }
  return "canonical";
}

PathRole path_role_from_string(const std::string& s) {
  if (s == "reversal") return PathRole::reversal;
  if (s == "alias") return PathRole::alias;
  return PathRole::canonical;
}

const LineRecord* Topology::find_line(int32_t line_id) const {
  for (const auto& l : lines) {
    if (l.id == line_id) return &l;
  }
  return nullptr;
}

std::vector<Segment> Topology::street_geometry() const {
  std::vector<Segment> out;
  out.reserve(street_segments.size());
  for (const auto& [a, b] : street_segments) {
    out.push_back(Segment{stops[a].pos, stops[b].pos});
  }
  return out;
}

double stop_set_jaccard(const std::vector<int32_t>& a,
                        const std::vector<int32_t>& b) {
  std::set<int32_t> sa(a.begin(), a.end());
  std::set<int32_t> sb(b.begin(), b.end());
  size_t inter = 0;
  for (int32_t v : sa) inter += sb.count(v);
  size_t uni = sa.size() + sb.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

GroupingInput classify_paths(const FeedData& feed, Weekday service_day) {
  GroupingInput out;
  std::map<std::vector<int32_t>, int32_t> path_of_sequence;
  for (const TripRecord& trip : feed.trips) {
    if (!feed.service_covers(trip.service_id, service_day)) continue;
    std::vector<int32_t> seq;
    seq.reserve(trip.stop_times.size());
    for (const auto& st : trip.stop_times) seq.push_back(st.stop_index);

    int32_t path_id;
    auto it = path_of_sequence.find(seq);
    if (it != path_of_sequence.end()) {
      path_id = it->second;
    } else {
      PathRecord path;
      path.id = static_cast<int32_t>(out.paths.size());
      path.stops = seq;
      int64_t base = trip.stop_times.front().departure;
      path.arrive_s.push_back(0);
      path.depart_s.push_back(0);
      for (size_t i = 1; i < trip.stop_times.size(); ++i) {
        int64_t arr = trip.stop_times[i].arrival - base;
        int64_t dep = trip.stop_times[i].departure - base;
        // one-second floor between consecutive stops
        arr = std::max(arr, path.depart_s.back() + 1);
        dep = std::max(dep, arr);
        path.arrive_s.push_back(arr);
        path.depart_s.push_back(dep);
      }
      path_id = path.id;
      path_of_sequence[seq] = path_id;
      out.paths.push_back(std::move(path));
    }
    out.departures.push_back(
        Departure{path_id, trip.stop_times.front().departure});
  }
  return out;
}

std::vector<LineRecord> group_lines(const GroupingInput& input,
                                    double alias_threshold) {
  if (input.paths.empty()) throw DataError("no paths to group");
  if (!(alias_threshold > 0.0 && alias_threshold <= 1.0)) {
    throw UsageError("alias threshold must be in (0, 1]");
  }

  std::vector<LineRecord> lines;
  std::vector<int32_t> line_of_path(input.paths.size(), -1);

  for (const PathRecord& path : input.paths) {
    int best_line = -1;
    double best_sim = -1.0;
    PathRole best_role = PathRole::alias;
    for (const LineRecord& line : lines) {
      const PathRecord& canon = input.paths[line.members.front().path];
      std::vector<int32_t> reversed(canon.stops.rbegin(), canon.stops.rend());
      double sim;
      PathRole role;
      if (path.stops == reversed) {
        sim = 1.0;
        role = PathRole::reversal;
      } else {
        // alias: identical end-of-line stops, similar stop set
        std::pair<int32_t, int32_t> ends{
            std::min(path.first_stop(), path.last_stop()),
            std::max(path.first_stop(), path.last_stop())};
        std::pair<int32_t, int32_t> canon_ends{
            std::min(canon.first_stop(), canon.last_stop()),
            std::max(canon.first_stop(), canon.last_stop())};
        if (ends != canon_ends) continue;
        sim = stop_set_jaccard(path.stops, canon.stops);
        if (sim < alias_threshold) continue;
        role = PathRole::alias;
      }
      if (sim > best_sim) {
        best_sim = sim;
        best_line = line.id;
        best_role = role;
      }
    }
    if (best_line >= 0) {
      lines[best_line].members.push_back(LineMember{path.id, best_role});
      line_of_path[path.id] = best_line;
    } else {
      LineRecord line;
      line.id = static_cast<int32_t>(lines.size());
      line.members.push_back(LineMember{path.id, PathRole::canonical});
      line_of_path[path.id] = line.id;
      lines.push_back(std::move(line));
    }
  }

  for (const Departure& dep : input.departures) {
    lines[line_of_path[dep.path]].departures.push_back(dep);
  }
  for (LineRecord& line : lines) {
    std::sort(line.departures.begin(), line.departures.end(),
              [](const Departure& a, const Departure& b) {
                if (a.start_s != b.start_s) return a.start_s < b.start_s;
                return a.path < b.path;
              });
    int64_t total = 0;
    for (const Departure& d : line.departures) {
      total += input.paths[d.path].duration();
    }
    line.mean_trip_s = line.departures.empty()
                           ? 0.0
                           : static_cast<double>(total) /
                                 static_cast<double>(line.departures.size());
  }
  return lines;
}

std::pair<std::vector<LineRecord>, std::vector<LineRecord>>
filter_closed_lines(std::vector<LineRecord> lines,
                    const std::vector<PathRecord>& paths) {
  std::vector<LineRecord> admitted;
  std::vector<LineRecord> rejected;
  for (LineRecord& line : lines) {
    bool closed = false;
    for (const LineMember& m1 : line.members) {
      for (const LineMember& m2 : line.members) {
        const PathRecord& p = paths[m1.path];
        const PathRecord& q = paths[m2.path];
        if (p.last_stop() == q.first_stop() &&
            q.last_stop() == p.first_stop()) {
          closed = true;
          break;
        }
      }
      if (closed) break;
    }
    line.closed = closed;
    if (closed) admitted.push_back(std::move(line));
    else rejected.push_back(std::move(line));
  }
  return {std::move(admitted), std::move(rejected)};
}

Topology build_topology(const FeedData& feed, const TopologyOptions& opts) {
  GroupingInput grouping = classify_paths(feed, opts.service_day);
  if (grouping.departures.empty()) {
    throw DataError("no trips on service day " +
                    weekday_to_string(opts.service_day));
  }
  auto lines = group_lines(grouping, opts.alias_threshold);
  auto [admitted, rejected] = filter_closed_lines(std::move(lines),
                                                  grouping.paths);

  Topology topo;
  topo.source = "feed";
  topo.paths = std::move(grouping.paths);
  topo.lines = std::move(admitted);
  topo.rejected_lines = std::move(rejected);

  // Equirectangular projection around the stop centroid.
  double lat_sum = 0.0, lon_sum = 0.0;
  for (const StopRecord& s : feed.stops) {
    lat_sum += s.lat;
    lon_sum += s.lon;
  }
  Projection proj;
  proj.origin_lat_deg = lat_sum / static_cast<double>(feed.stops.size());
  proj.origin_lon_deg = lon_sum / static_cast<double>(feed.stops.size());
  topo.projection = proj;
  topo.stops.reserve(feed.stops.size());
  for (const StopRecord& s : feed.stops) {
    topo.stops.push_back(StopNode{s.id, proj.to_planar(s.lat, s.lon)});
  }

  finalize_topology_geometry(topo);
  return topo;
}

void finalize_topology_geometry(Topology& topo) {
  std::set<std::pair<int32_t, int32_t>> segs;
  for (const LineRecord& line : topo.lines) {
    for (const LineMember& m : line.members) {
      const PathRecord& p = topo.paths[m.path];
      for (size_t i = 1; i < p.stops.size(); ++i) {
        int32_t a = p.stops[i - 1];
        int32_t b = p.stops[i];
        if (a == b) continue;
        segs.emplace(std::min(a, b), std::max(a, b));
      }
    }
  }
  topo.street_segments.assign(segs.begin(), segs.end());

  if (!topo.stops.empty()) {
    topo.bounds = Bounds{topo.stops[0].pos.x, topo.stops[0].pos.y,
                         topo.stops[0].pos.x, topo.stops[0].pos.y};
    for (const StopNode& s : topo.stops) {
      topo.bounds.min_x = std::min(topo.bounds.min_x, s.pos.x);
      topo.bounds.min_y = std::min(topo.bounds.min_y, s.pos.y);
      topo.bounds.max_x = std::max(topo.bounds.max_x, s.pos.x);
      topo.bounds.max_y = std::max(topo.bounds.max_y, s.pos.y);
    }
  }
}

namespace {

ordered_json line_to_json(const LineRecord& line) {
  ordered_json members = ordered_json::array();
  for (const LineMember& m : line.members) {
    members.push_back({{"path", m.path},
                       {"role", path_role_to_string(m.role)}});
  }
  ordered_json deps = ordered_json::array();
  for (const Departure& d : line.departures) {
    deps.push_back({{"path", d.path}, {"start_s", d.start_s}});
  }
  return ordered_json{{"id", line.id},
                      {"members", members},
                      {"departures", deps},
                      {"closed", line.closed},
                      {"mean_trip_s", line.mean_trip_s}};
}

LineRecord line_from_json(const ordered_json& j) {
  LineRecord line;
  line.id = j.at("id").get<int32_t>();
  for (const auto& m : j.at("members")) {
    line.members.push_back(
        LineMember{m.at("path").get<int32_t>(),
                   path_role_from_string(m.at("role").get<std::string>())});
  }
  for (const auto& d : j.at("departures")) {
    line.departures.push_back(Departure{d.at("path").get<int32_t>(),
                                        d.at("start_s").get<int64_t>()});
  }
  line.closed = j.at("closed").get<bool>();
  line.mean_trip_s = j.at("mean_trip_s").get<double>();
  return line;
}

}  // namespace

std::string topology_to_json(const Topology& t) {
  ordered_json j;
  j["format"] = "bsn-topology/1";
  j["source"] = t.source;
  if (t.projection) {
    j["projection"] = {{"origin_lat", t.projection->origin_lat_deg},
                       {"origin_lon", t.projection->origin_lon_deg}};
  } else {
    j["projection"] = nullptr;
  }
  j["bounds"] = {{"min_x", t.bounds.min_x},
                 {"min_y", t.bounds.min_y},
                 {"max_x", t.bounds.max_x},
                 {"max_y", t.bounds.max_y}};
  ordered_json stops = ordered_json::array();
  for (const StopNode& s : t.stops) {
    stops.push_back(ordered_json::array({s.id, s.pos.x, s.pos.y}));
  }
  j["stops"] = std::move(stops);
  ordered_json paths = ordered_json::array();
  for (const PathRecord& p : t.paths) {
    paths.push_back({{"id", p.id},
                     {"stops", p.stops},
                     {"arrive_s", p.arrive_s},
                     {"depart_s", p.depart_s}});
  }
  j["paths"] = std::move(paths);
  ordered_json lines = ordered_json::array();
  for (const LineRecord& l : t.lines) lines.push_back(line_to_json(l));
  j["lines"] = std::move(lines);
  ordered_json rejected = ordered_json::array();
  for (const LineRecord& l : t.rejected_lines)
    rejected.push_back(line_to_json(l));
  j["rejected_lines"] = std::move(rejected);
  ordered_json segs = ordered_json::array();
  for (const auto& [a, b] : t.street_segments)
    segs.push_back(ordered_json::array({a, b}));
  j["street_segments"] = std::move(segs);
  return j.dump(1);
}

Topology topology_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw DataError(std::string("bad topology JSON: ") + e.what());
  }
  if (!j.contains("format") || j["format"] != "bsn-topology/1") {
    throw DataError("unrecognized topology format");
  }
  Topology t;
  t.source = j.value("source", std::string());
  if (j.contains("projection") && !j["projection"].is_null()) {
    Projection p;
    p.origin_lat_deg = j["projection"].at("origin_lat").get<double>();
    p.origin_lon_deg = j["projection"].at("origin_lon").get<double>();
    t.projection = p;
  }
  const auto& b = j.at("bounds");
  t.bounds = Bounds{b.at("min_x").get<double>(), b.at("min_y").get<double>(),
                    b.at("max_x").get<double>(), b.at("max_y").get<double>()};
  for (const auto& s : j.at("stops")) {
    t.stops.push_back(StopNode{s.at(0).get<std::string>(),
                               Vec2{s.at(1).get<double>(),
                                    s.at(2).get<double>()}});
  }
  for (const auto& p : j.at("paths")) {
    PathRecord path;
    path.id = p.at("id").get<int32_t>();
    path.stops = p.at("stops").get<std::vector<int32_t>>();
    path.arrive_s = p.at("arrive_s").get<std::vector<int64_t>>();
    path.depart_s = p.at("depart_s").get<std::vector<int64_t>>();
    t.paths.push_back(std::move(path));
  }
  for (const auto& l : j.at("lines")) t.lines.push_back(line_from_json(l));
  for (const auto& l : j.at("rejected_lines"))
    t.rejected_lines.push_back(line_from_json(l));
  for (const auto& s : j.at("street_segments")) {
    t.street_segments.emplace_back(s.at(0).get<int32_t>(),
                                   s.at(1).get<int32_t>());
  }

  // Consistency checks: departures must reference known paths, paths
  // known stops.
  for (const auto& p : t.paths) {
    for (int32_t s : p.stops) {
      if (s < 0 || static_cast<size_t>(s) >= t.stops.size()) {
        throw DataError("path references unknown stop index");
      }
    }
  }
  auto check_line = [&](const LineRecord& line) {
    for (const auto& m : line.members) {
      if (m.path < 0 || static_cast<size_t>(m.path) >= t.paths.size()) {
        throw DataError("line references unknown path");
      }
    }
    for (const auto& d : line.departures) {
      if (d.path < 0 || static_cast<size_t>(d.path) >= t.paths.size()) {
        throw DataError("departure references unknown path");
      }
    }
  };
  for (const auto& l : t.lines) check_line(l);
  for (const auto& l : t.rejected_lines) check_line(l);
  return t;
}

uint64_t topology_hash(const Topology& t) {
  return SubstreamRng::fnv1a(topology_to_json(t));
}

void save_topology(const Topology& t, const std::string& path,
                   const std::string& provenance_json) {
  ordered_json j = ordered_json::parse(topology_to_json(t));
  if (!provenance_json.empty()) {
    ordered_json wrapped;
    wrapped["provenance"] = ordered_json::parse(provenance_json);
    for (auto& [k, v] : j.items()) wrapped[k] = std::move(v);
    j = std::move(wrapped);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(1) << "\n";
}

Topology load_topology(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw DataError(std::string("bad topology JSON: ") + e.what());
  }
  j.erase("provenance");
  return topology_from_json(j.dump(1));
}

}  // namespace bsn

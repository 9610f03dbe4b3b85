#include "bsn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "bsn/error.hpp"
#include "bsn/rng.hpp"

namespace bsn {

using ordered_json = nlohmann::ordered_json;

namespace {

struct GridWalkBuilder {
  const SynthSpec& spec;
  Topology& topo;
  std::map<std::pair<int32_t, int32_t>, int32_t> stop_of_node;
  std::map<std::vector<int32_t>, int32_t> path_of_sequence;

  int32_t stop_at(int32_t col, int32_t row) {
    auto key = std::make_pair(col, row);
    auto it = stop_of_node.find(key);
    if (it != stop_of_node.end()) return it->second;
    int32_t idx = static_cast<int32_t>(topo.stops.size());
    StopNode node;
    node.id = "g" + std::to_string(col) + "_" + std::to_string(row);
    node.pos = Vec2{col * spec.grid_spacing_m, row * spec.grid_spacing_m};
    topo.stops.push_back(std::move(node));
    stop_of_node[key] = idx;
    return idx;
  }

  // Appends grid nodes from the current walk end to (col,row), one cell
  // at a time along a single axis.
  static void extend(std::vector<std::pair<int32_t, int32_t>>& walk,
                     int32_t col, int32_t row) {
    auto [c, r] = walk.back();
    while (c != col) {
      c += (col > c) ? 1 : -1;
      walk.emplace_back(c, r);
    }
    while (r != row) {
      r += (row > r) ? 1 : -1;
      walk.emplace_back(c, r);
    }
  }

  int32_t path_for_walk(const std::vector<std::pair<int32_t, int32_t>>& walk) {
    std::vector<int32_t> seq;
    seq.reserve(walk.size());
    for (auto [c, r] : walk) seq.push_back(stop_at(c, r));
    auto it = path_of_sequence.find(seq);
    if (it != path_of_sequence.end()) return it->second;

    PathRecord path;
    path.id = static_cast<int32_t>(topo.paths.size());
    path.stops = seq;
    path.arrive_s.push_back(0);
    path.depart_s.push_back(0);
    for (size_t i = 1; i < seq.size(); ++i) {
      double dist = distance(topo.stops[seq[i - 1]].pos,
                             topo.stops[seq[i]].pos);
      int64_t travel = std::max<int64_t>(
          1, std::llround(dist / spec.speed_mps));
      int64_t arr = path.depart_s.back() + travel;
      int64_t dep = (i + 1 < seq.size()) ? arr + spec.dwell_s : arr;
      path.arrive_s.push_back(arr);
      path.depart_s.push_back(dep);
    }
    int32_t id = path.id;
    path_of_sequence[seq] = id;
    topo.paths.push_back(std::move(path));
    return id;
  }
};

bool in_rush_window(int64_t t) {
  return (t >= 7 * 3600 && t < 9 * 3600) ||
         (t >= 16 * 3600 + 1800 && t < 19 * 3600);
}

std::vector<int64_t> departure_times(const SynthSpec& spec, int64_t phase) {
  std::vector<int64_t> times;
  for (int64_t t = spec.day_start_s + phase; t <= spec.day_end_s;
       t += spec.headway_s) {
    times.push_back(t);
    if (spec.rush_hours) {
      // quadruple the service density inside the rush windows
      for (int k = 1; k <= 3; ++k) {
        int64_t extra = t + k * spec.headway_s / 4;
        if (in_rush_window(extra) && extra <= spec.day_end_s) {
          times.push_back(extra);
        }
      }
    }
  }
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace

void SynthSpec::validate() const {
  if (grid_cols < 3 || grid_rows < 3) {
    throw UsageError("synthetic grid must be at least 3x3");
  }
  if (grid_spacing_m <= 0) throw UsageError("grid spacing must be positive");
  if (num_lines < 1) throw UsageError("need at least one line");
  if (headway_s <= 0) throw UsageError("headway must be positive");
  if (day_end_s <= day_start_s) throw UsageError("empty service day");
  if (speed_mps <= 0) throw UsageError("speed must be positive");
  double mix = mix_cross + mix_ring + mix_peripheral;
  if (mix <= 0) throw UsageError("line shape mix must be positive");
}

Topology synthesize_city(const SynthSpec& spec, uint64_t seed) {
  spec.validate();
  SubstreamRng rng(seed);
  Topology topo;
  topo.source = "synth";

  GridWalkBuilder builder{spec, topo, {}, {}};
  const int32_t cols = spec.grid_cols;
  const int32_t rows = spec.grid_rows;
  const int32_t cx = (cols - 1) / 2;
  const int32_t cy = (rows - 1) / 2;

  double mix_total = spec.mix_cross + spec.mix_ring + spec.mix_peripheral;
  int32_t n_cross = static_cast<int32_t>(
      std::floor(spec.num_lines * spec.mix_cross / mix_total));
  int32_t n_ring = static_cast<int32_t>(
      std::floor(spec.num_lines * spec.mix_ring / mix_total));

  std::set<std::vector<std::pair<int32_t, int32_t>>> used_walks;

  for (int32_t li = 0; li < spec.num_lines; ++li) {
    enum { kCross, kRing, kPeripheral } shape;
    if (li < n_cross) shape = kCross;
    else if (li < n_cross + n_ring) shape = kRing;
    else shape = kPeripheral;

    std::vector<std::pair<int32_t, int32_t>> walk;
    bool loop = false;
    for (uint64_t attempt = 0; attempt < 64; ++attempt) {
      walk.clear();
      auto draw = [&](uint64_t salt, uint64_t n) {
        return static_cast<int32_t>(
            rng.uniform("synth", n, static_cast<uint64_t>(li),
                        attempt * 16 + salt));
      };
      if (shape == kCross) {
        bool horizontal = draw(0, 2) == 0;
        bool straight = draw(1, 2) == 0;
        if (horizontal) {
          int32_t r = 1 + draw(2, rows - 2);
          walk.emplace_back(0, r);
          if (straight) {
            GridWalkBuilder::extend(walk, cols - 1, r);
          } else {
            int32_t t = 1 + draw(3, cols - 2);
            GridWalkBuilder::extend(walk, t, r);
            GridWalkBuilder::extend(walk, t, draw(4, 2) ? rows - 1 : 0);
          }
        } else {
          int32_t c = 1 + draw(2, cols - 2);
          walk.emplace_back(c, 0);
          if (straight) {
            GridWalkBuilder::extend(walk, c, rows - 1);
          } else {
            int32_t t = 1 + draw(3, rows - 2);
            GridWalkBuilder::extend(walk, c, t);
            GridWalkBuilder::extend(walk, draw(4, 2) ? cols - 1 : 0, t);
          }
        }
        loop = false;
      } else if (shape == kRing) {
        int32_t max_r = std::min(cx, cy) - 1;
        int32_t rx = 1 + draw(2, std::max(1, max_r));
        int32_t ry = 1 + draw(3, std::max(1, max_r));
        rx = std::min(rx, std::min(cx, cols - 1 - cx));
        ry = std::min(ry, std::min(cy, rows - 1 - cy));
        walk.emplace_back(cx - rx, cy - ry);
        GridWalkBuilder::extend(walk, cx + rx, cy - ry);
        GridWalkBuilder::extend(walk, cx + rx, cy + ry);
        GridWalkBuilder::extend(walk, cx - rx, cy + ry);
        GridWalkBuilder::extend(walk, cx - rx, cy - ry);
        loop = true;
      } else {
        int32_t w = 1 + draw(2, std::min(3, cols - 2));
        int32_t h = 1 + draw(3, std::min(3, rows - 2));
        int side = draw(4, 4);
        int32_t c0 = 0, r0 = 0;
        switch (side) {
          case 0:  // south edge
            c0 = draw(5, cols - w);
            r0 = 0;
            break;
          case 1:  // north edge
            c0 = draw(5, cols - w);
            r0 = rows - 1 - h;
            break;
          case 2:  // west edge
            c0 = 0;
            r0 = draw(5, rows - h);
            break;
          default:  // east edge
            c0 = cols - 1 - w;
            r0 = draw(5, rows - h);
            break;
        }
        walk.emplace_back(c0, r0);
        GridWalkBuilder::extend(walk, c0 + w, r0);
        GridWalkBuilder::extend(walk, c0 + w, r0 + h);
        GridWalkBuilder::extend(walk, c0, r0 + h);
        GridWalkBuilder::extend(walk, c0, r0);
        loop = true;
      }
      if (!used_walks.count(walk)) break;
    }
    used_walks.insert(walk);

    LineRecord line;
    line.id = li;
    int32_t fwd = builder.path_for_walk(walk);
    line.members.push_back(LineMember{fwd, PathRole::canonical});
    int64_t phase = static_cast<int64_t>(
        rng.uniform("synth", static_cast<uint64_t>(spec.headway_s),
                    static_cast<uint64_t>(li), 1000));
    for (int64_t t : departure_times(spec, phase)) {
      line.departures.push_back(Departure{fwd, t});
    }
    if (!loop) {
      std::vector<std::pair<int32_t, int32_t>> rev(walk.rbegin(),
                                                   walk.rend());
      int32_t bwd = builder.path_for_walk(rev);
      line.members.push_back(LineMember{bwd, PathRole::reversal});
      int64_t rev_phase = (phase + spec.headway_s / 2) % spec.headway_s;
      for (int64_t t : departure_times(spec, rev_phase)) {
        line.departures.push_back(Departure{bwd, t});
      }
    }
    std::sort(line.departures.begin(), line.departures.end(),
              [](const Departure& a, const Departure& b) {
                if (a.start_s != b.start_s) return a.start_s < b.start_s;
                return a.path < b.path;
              });
    int64_t total = 0;
    for (const Departure& d : line.departures) {
      total += topo.paths[d.path].duration();
    }
    line.mean_trip_s =
        static_cast<double>(total) /
        static_cast<double>(std::max<size_t>(1, line.departures.size()));
    line.closed = true;
    topo.lines.push_back(std::move(line));
  }

  finalize_topology_geometry(topo);
  return topo;
}

std::string synth_spec_to_json(const SynthSpec& s) {
  ordered_json j{{"grid_cols", s.grid_cols},
                 {"grid_rows", s.grid_rows},
                 {"grid_spacing_m", s.grid_spacing_m},
                 {"num_lines", s.num_lines},
                 {"mix_cross", s.mix_cross},
                 {"mix_ring", s.mix_ring},
                 {"mix_peripheral", s.mix_peripheral},
                 {"headway_s", s.headway_s},
                 {"day_start_s", s.day_start_s},
                 {"day_end_s", s.day_end_s},
                 {"rush_hours", s.rush_hours},
                 {"dwell_s", s.dwell_s},
                 {"speed_mps", s.speed_mps}};
  return j.dump(1);
}

SynthSpec synth_spec_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw DataError(std::string("bad synth spec JSON: ") + e.what());
  }
  SynthSpec s;
  s.grid_cols = j.value("grid_cols", s.grid_cols);
  s.grid_rows = j.value("grid_rows", s.grid_rows);
  s.grid_spacing_m = j.value("grid_spacing_m", s.grid_spacing_m);
  s.num_lines = j.value("num_lines", s.num_lines);
  s.mix_cross = j.value("mix_cross", s.mix_cross);
  s.mix_ring = j.value("mix_ring", s.mix_ring);
  s.mix_peripheral = j.value("mix_peripheral", s.mix_peripheral);
  s.headway_s = j.value("headway_s", s.headway_s);
  s.day_start_s = j.value("day_start_s", s.day_start_s);
  s.day_end_s = j.value("day_end_s", s.day_end_s);
  s.rush_hours = j.value("rush_hours", s.rush_hours);
  s.dwell_s = j.value("dwell_s", s.dwell_s);
  s.speed_mps = j.value("speed_mps", s.speed_mps);
  return s;
}

SynthSpec load_synth_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return synth_spec_from_json(text);
}

}  // namespace bsn

#include "bsn/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace bsn {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
constexpr double kCoverEps = 1e-9;

inline uint64_t cell_key(int64_t cx, int64_t cy) {
  return (static_cast<uint64_t>(cx) << 32) ^
         (static_cast<uint64_t>(cy) & 0xffffffffull);
}

inline int64_t cell_of(double v, double size) {
  return static_cast<int64_t>(std::floor(v / size));
}

}  // namespace

double distance(Vec2 a, Vec2 b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

Vec2 Projection::to_planar(double lat_deg, double lon_deg) const {
  double dlat = (lat_deg - origin_lat_deg) * kDegToRad;
  double dlon = (lon_deg - origin_lon_deg) * kDegToRad;
  double x = kEarthRadiusM * dlon * std::cos(origin_lat_deg * kDegToRad);
  double y = kEarthRadiusM * dlat;
  return {x, y};
}

CorridorIndex::CorridorIndex(const std::vector<Segment>& streets,
                             double half_width_m)
    : half_width_(half_width_m) {
  corridors_.reserve(streets.size());
  for (const Segment& s : streets) {
    Vec2 d = s.b - s.a;
    double len = std::sqrt(dot(d, d));
    if (len <= 0.0) continue;  // degenerate segment, no corridor area
    Corridor c;
    c.origin = s.a;
    c.dir = d * (1.0 / len);
    c.length = len;
    c.min_x = std::min(s.a.x, s.b.x) - half_width_m;
    c.max_x = std::max(s.a.x, s.b.x) + half_width_m;
    c.min_y = std::min(s.a.y, s.b.y) - half_width_m;
    c.max_y = std::max(s.a.y, s.b.y) + half_width_m;
    corridors_.push_back(c);
  }
  for (uint32_t i = 0; i < corridors_.size(); ++i) {
    const Corridor& c = corridors_[i];
    std::vector<uint64_t> cells;
    cells_overlapping(c.min_x, c.min_y, c.max_x, c.max_y, cells);
    for (uint64_t k : cells) grid_[k].push_back(i);
  }
}

void CorridorIndex::cells_overlapping(double min_x, double min_y, double max_x,
                                      double max_y,
                                      std::vector<uint64_t>& out) const {
  int64_t cx0 = cell_of(min_x, cell_size_);
  int64_t cx1 = cell_of(max_x, cell_size_);
  int64_t cy0 = cell_of(min_y, cell_size_);
  int64_t cy1 = cell_of(max_y, cell_size_);
  for (int64_t cx = cx0; cx <= cx1; ++cx)
    for (int64_t cy = cy0; cy <= cy1; ++cy) out.push_back(cell_key(cx, cy));
}

bool CorridorIndex::line_of_sight(Vec2 p, Vec2 q) const {
  Vec2 d = q - p;
  double len2 = dot(d, d);
  if (len2 == 0.0) return true;  // coincident positions

  // Gather candidate corridors from the grid cells the query touches.
  std::vector<uint64_t> cells;
  cells_overlapping(std::min(p.x, q.x), std::min(p.y, q.y),
                    std::max(p.x, q.x), std::max(p.y, q.y), cells);
  std::vector<uint32_t> candidates;
  for (uint64_t k : cells) {
    auto it = grid_.find(k);
    if (it == grid_.end()) continue;
    candidates.insert(candidates.end(), it->second.begin(), it->second.end());
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  // Clip the parametric segment p + t*d, t in [0,1], against each
  // corridor rectangle; the rectangle is the intersection of four
  // half-planes. Collect covered intervals and test for full cover.
  std::vector<std::pair<double, double>> intervals;
  for (uint32_t ci : candidates) {
    const Corridor& c = corridors_[ci];
    double t0 = 0.0, t1 = 1.0;
    Vec2 rel = p - c.origin;
    Vec2 n{-c.dir.y, c.dir.x};

    auto clip = [&](double value_at_p, double deriv, double lo, double hi) {
      // lo <= value_at_p + t*deriv <= hi
      if (deriv == 0.0) {
        if (value_at_p < lo || value_at_p > hi) t0 = 1.0, t1 = 0.0;
        return;
      }
      double ta = (lo - value_at_p) / deriv;
      double tb = (hi - value_at_p) / deriv;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    };

    clip(dot(rel, c.dir), dot(d, c.dir), 0.0, c.length);
    if (t0 > t1) continue;
    clip(dot(rel, n), dot(d, n), -half_width_, half_width_);
    if (t0 > t1) continue;
    intervals.emplace_back(t0, t1);
  }

  if (intervals.empty()) return false;
  std::sort(intervals.begin(), intervals.end());
  double covered = 0.0;
  for (const auto& [a, b] : intervals) {
    if (a > covered + kCoverEps) return false;
    covered = std::max(covered, b);
    if (covered >= 1.0 - kCoverEps) return true;
  }
  return covered >= 1.0 - kCoverEps;
}

SpatialHashGrid::SpatialHashGrid(double cell_size) : cell_size_(cell_size) {}

void SpatialHashGrid::clear() { cells_.clear(); }

uint64_t SpatialHashGrid::key(Vec2 p) const {
  return cell_key(cell_of(p.x, cell_size_), cell_of(p.y, cell_size_));
}

void SpatialHashGrid::insert(uint32_t id, Vec2 p) {
  cells_[key(p)].push_back(Entry{id, p});
}

std::vector<std::pair<uint32_t, uint32_t>> SpatialHashGrid::pairs_within(
    double radius) const {
  std::vector<std::pair<uint32_t, uint32_t>> out;
  double r2 = radius * radius;
  for (const auto& [k, entries] : cells_) {
    int64_t cx = static_cast<int64_t>(k >> 32);
    int64_t cy = static_cast<int64_t>(static_cast<int32_t>(k & 0xffffffffull));
    for (const Entry& e : entries) {
      for (int64_t dx = -1; dx <= 1; ++dx) {
        for (int64_t dy = -1; dy <= 1; ++dy) {
          auto it = cells_.find(cell_key(cx + dx, cy + dy));
          if (it == cells_.end()) continue;
          for (const Entry& f : it->second) {
            if (f.id <= e.id) continue;
            double ddx = e.p.x - f.p.x;
            double ddy = e.p.y - f.p.y;
            if (ddx * ddx + ddy * ddy <= r2) out.emplace_back(e.id, f.id);
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace bsn

#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace bsn {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double distance(Vec2 a, Vec2 b);

constexpr double kEarthRadiusM = 6371000.0;

// Equirectangular projection around a fixed origin. Adequate at city
// scale: within 10 km the planar distance stays within 1% of the
// great-circle distance.
struct Projection {
  double origin_lat_deg = 0.0;
  double origin_lon_deg = 0.0;

  Vec2 to_planar(double lat_deg, double lon_deg) const;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Streets as corridors: each street segment buffered laterally by a
// half-width. Two positions have line of sight iff the straight segment
// joining them is fully covered by the union of corridor rectangles.
// This blocks radio across street corners (urban canyons) while keeping
// same-corridor and intersection-clearance contacts.
class CorridorIndex {
 public:
  CorridorIndex() = default;
  CorridorIndex(const std::vector<Segment>& streets, double half_width_m);

  bool line_of_sight(Vec2 p, Vec2 q) const;

  size_t corridor_count() const { return corridors_.size(); }
  double half_width() const { return half_width_; }

 private:
  struct Corridor {
    Vec2 origin;     // segment start
    Vec2 dir;        // unit direction
    double length;   // segment length
    double min_x, min_y, max_x, max_y;  // AABB including half-width
  };

  void cells_overlapping(double min_x, double min_y, double max_x,
                         double max_y, std::vector<uint64_t>& out) const;

  std::vector<Corridor> corridors_;
  std::unordered_map<uint64_t, std::vector<uint32_t>> grid_;
  double half_width_ = 0.0;
  double cell_size_ = 200.0;
};

// Uniform grid over 2D points for radius queries; cell size equals the
// query radius so candidates come from the 3x3 neighborhood.
class SpatialHashGrid {
 public:
  explicit SpatialHashGrid(double cell_size);

  void clear();
  void insert(uint32_t id, Vec2 p);

  // All unordered pairs (i < j by insertion id) within `radius`.
  // Results are sorted for determinism.
  std::vector<std::pair<uint32_t, uint32_t>> pairs_within(
      double radius) const;

 private:
  struct Entry {
    uint32_t id;
    Vec2 p;
  };
  uint64_t key(Vec2 p) const;
  double cell_size_;
  std::unordered_map<uint64_t, std::vector<Entry>> cells_;
};

}  // namespace bsn

#include "bsn/geometry.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace bsn {
namespace {

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  double dlat = (lat2 - lat1) * kDegToRad;
  double dlon = (lon2 - lon1) * kDegToRad;
  double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1 * kDegToRad) * std::cos(lat2 * kDegToRad) *
                 std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::atan2(std::sqrt(a), std::sqrt(1.0 - a));
}

TEST(Projection, OriginMapsToZero) {
  Projection p{45.0, 9.0};
  Vec2 v = p.to_planar(45.0, 9.0);
  EXPECT_DOUBLE_EQ(v.x, 0.0);
  EXPECT_DOUBLE_EQ(v.y, 0.0);
}

TEST(Projection, SmallNorthOffset) {
  Projection p{45.0, 9.0};
  Vec2 v = p.to_planar(45.001, 9.0);
  EXPECT_NEAR(v.y, 111.19, 0.05);
  EXPECT_DOUBLE_EQ(v.x, 0.0);
}

TEST(Projection, SmallEastOffsetAtLat45) {
  Projection p{45.0, 9.0};
  Vec2 v = p.to_planar(45.0, 9.001);
  EXPECT_NEAR(v.x, 78.63, 0.05);
  EXPECT_DOUBLE_EQ(v.y, 0.0);
}

TEST(Projection, LocalDistancesWithinOnePercentOfGreatCircle) {
  Projection p{45.4642, 9.19};  // city-scale origin
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dlat(-0.045, 0.045);  // ~5 km
  std::uniform_real_distribution<double> dlon(-0.06, 0.06);
  for (int i = 0; i < 500; ++i) {
    double lat1 = p.origin_lat_deg + dlat(rng);
    double lon1 = p.origin_lon_deg + dlon(rng);
    double lat2 = p.origin_lat_deg + dlat(rng);
    double lon2 = p.origin_lon_deg + dlon(rng);
    double planar = distance(p.to_planar(lat1, lon1), p.to_planar(lat2, lon2));
    double sphere = haversine_m(lat1, lon1, lat2, lon2);
    if (sphere < 50.0) continue;  // relative error unstable near zero
    EXPECT_NEAR(planar, sphere, sphere * 0.01)
        << "points (" << lat1 << "," << lon1 << ") (" << lat2 << "," << lon2
        << ")";
  }
}

TEST(CorridorIndex, SameCorridorHasLineOfSight) {
  std::vector<Segment> streets = {{{0, 0}, {1000, 0}}};
  CorridorIndex idx(streets, 15.0);
  EXPECT_TRUE(idx.line_of_sight({100, 0}, {180, 0}));
  EXPECT_TRUE(idx.line_of_sight({100, 10}, {180, -10}));
}

TEST(CorridorIndex, PerpendicularCornerBlocks) {
  // Streets meet at the origin; buses 80 m out on each arm have no
  // line of sight because the connecting segment cuts the corner.
  std::vector<Segment> streets = {{{-1000, 0}, {0, 0}}, {{0, 0}, {0, 1000}}};
  CorridorIndex idx(streets, 15.0);
  EXPECT_FALSE(idx.line_of_sight({-80, 0}, {0, 80}));
}

TEST(CorridorIndex, IntersectionClearanceAllowsNearCorner) {
  std::vector<Segment> streets = {{{-1000, 0}, {0, 0}}, {{0, 0}, {0, 1000}}};
  CorridorIndex idx(streets, 15.0);
  // Both buses within the corridor overlap near the junction.
  EXPECT_TRUE(idx.line_of_sight({-10, 0}, {0, 10}));
}

TEST(CorridorIndex, CollinearCorridorsChainCoverage) {
  std::vector<Segment> streets = {{{0, 0}, {500, 0}}, {{500, 0}, {1000, 0}}};
  CorridorIndex idx(streets, 15.0);
  EXPECT_TRUE(idx.line_of_sight({450, 0}, {550, 0}));
}

TEST(CorridorIndex, OffStreetHasNoLineOfSight) {
  std::vector<Segment> streets = {{{0, 0}, {1000, 0}}};
  CorridorIndex idx(streets, 15.0);
  EXPECT_FALSE(idx.line_of_sight({100, 200}, {180, 200}));
}

TEST(CorridorIndex, CoincidentPositionsAlwaysSee) {
  CorridorIndex idx({}, 15.0);
  EXPECT_TRUE(idx.line_of_sight({5, 5}, {5, 5}));
}

TEST(SpatialHashGrid, MatchesBruteForce) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coord(-2000.0, 2000.0);
  for (int round = 0; round < 20; ++round) {
    std::vector<Vec2> pts;
    SpatialHashGrid grid(100.0);
    for (uint32_t i = 0; i < 60; ++i) {
      Vec2 p{coord(rng), coord(rng)};
      pts.push_back(p);
      grid.insert(i, p);
    }
    auto pairs = grid.pairs_within(100.0);
    std::vector<std::pair<uint32_t, uint32_t>> brute;
    for (uint32_t i = 0; i < pts.size(); ++i) {
      for (uint32_t j = i + 1; j < pts.size(); ++j) {
        if (distance(pts[i], pts[j]) <= 100.0) brute.emplace_back(i, j);
      }
    }
    EXPECT_EQ(pairs, brute);
  }
}

}  // namespace
}  // namespace bsn

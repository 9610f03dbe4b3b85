#include "bsn/encounter.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "testutil.hpp"

namespace bsn {
namespace {

using test::PathOracle;
using test::TraceBuilder;

TEST(TruncateProbability, PaperRule) {
  EXPECT_DOUBLE_EQ(truncate_probability(0.97), 0.9);
  EXPECT_DOUBLE_EQ(truncate_probability(1.0), 0.9);
  EXPECT_DOUBLE_EQ(truncate_probability(0.04), 0.1);
  EXPECT_DOUBLE_EQ(truncate_probability(0.0), 0.0);
  EXPECT_DOUBLE_EQ(truncate_probability(0.35), 0.3);
  EXPECT_DOUBLE_EQ(truncate_probability(0.3), 0.3);  // exact tenths stay
  EXPECT_DOUBLE_EQ(truncate_probability(0.999), 0.9);
}

TEST(TruncateProbability, IdempotentAndMonotone) {
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    double p = i / 1000.0;
    double t = truncate_probability(p);
    EXPECT_DOUBLE_EQ(truncate_probability(t), t) << p;
    EXPECT_GE(t + 1e-12, prev) << p;  // order-preserving
    if (p >= 0.1) prev = t;
    if (p > 0.0) {
      EXPECT_GE(t, 0.1);
      EXPECT_LE(t, 0.9);
    }
  }
}

// Line 0: bus 0 runs 3 trips and meets line 1 on two of them; bus 1 runs
// 2 trips and meets line 1 on one. p(0,1) = (2+1)/(3+2) = 0.6.
TEST(EstimateMatrix, DirectFrequency) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 1000)
                            .line(0)
                            .line(1)
                            .bus(0, 0, 0, 600)
                            .bus(1, 0, 0, 400)
                            .bus(2, 1, 0, 1000)
                            .trip(0, 0, 100)
                            .trip(0, 200, 300)
                            .trip(0, 400, 500)
                            .trip(1, 0, 100)
                            .trip(1, 200, 300)
                            .contact(0, 2, 10, 20)
                            .contact(0, 2, 50, 60)    // same trip, counts once
                            .contact(0, 2, 210, 220)
                            .contact(1, 2, 30, 40)
                            .build();
  EncounterMatrix m = estimate_matrix(trace);
  int i = m.index_of(0), j = m.index_of(1);
  EXPECT_EQ(m.line_trips(i), 5);
  EXPECT_EQ(m.encounter_trips(i, j), 3);
  EXPECT_DOUBLE_EQ(m.probability(i, j), 0.6);
  // estimator bounds: numerator never exceeds the denominator
  EXPECT_LE(m.encounter_trips(i, j), m.line_trips(i));
  EXPECT_LE(m.encounter_trips(j, i), m.line_trips(j));
}

TEST(EstimateMatrix, NoContactsMeansZero) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 100)
                            .line(0)
                            .line(1)
                            .bus(0, 0, 0, 100)
                            .bus(1, 1, 0, 100)
                            .trip(0, 0, 50)
                            .trip(1, 0, 50)
                            .build();
  EncounterMatrix m = estimate_matrix(trace);
  EXPECT_DOUBLE_EQ(m.probability_by_id(0, 1), 0.0);
  LineGraph g = build_graph(m);
  for (const auto& edges : g.out) EXPECT_TRUE(edges.empty());
}

TEST(EstimateMatrix, LineWithoutTripsIsUndefined) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 100)
                            .line(0)
                            .line(1)
                            .bus(0, 0, 0, 100)
                            .trip(0, 0, 50)
                            .build();
  EncounterMatrix m = estimate_matrix(trace);
  EXPECT_TRUE(m.defined(m.index_of(0)));
  EXPECT_FALSE(m.defined(m.index_of(1)));
}

// Two lines crossing on one street; the staggered timetable gives line 0
// four trips (two with encounters) and line 1 two trips (both with
// encounters): hand tally p(0,1) = 2/4, p(1,0) = 2/2.
TEST(EstimateMatrix, CrossingFixtureMatchesHandTally) {
  test::TopologyBuilder b;
  int32_t w = b.stop("w", 0, 0);
  int32_t e = b.stop("e", 4000, 0);
  int32_t fwd = b.path({w, e}, 400);
  int32_t bwd = b.path({e, w}, 400);
  b.line({{fwd, PathRole::canonical}},
         {{fwd, 0}, {fwd, 1000}, {fwd, 2000}, {fwd, 3000}});
  b.line({{bwd, PathRole::canonical}}, {{bwd, 0}, {bwd, 1000}});
  Topology topo = b.build();
  MobilityConfig mc;
  mc.departure_noise_max_s = 0;
  mc.seed = 1;
  mc.position_stride = 0;
  MobilityTrace trace = run_mobility(topo, mc);
  EncounterMatrix m = estimate_matrix(trace);
  EXPECT_DOUBLE_EQ(m.probability_by_id(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(m.probability_by_id(1, 0), 1.0);
}

EncounterMatrix matrix_from_tenths(
    const std::vector<std::vector<int>>& tenths) {
  std::vector<int32_t> ids;
  for (size_t i = 0; i < tenths.size(); ++i) {
    ids.push_back(static_cast<int32_t>(i));
  }
  EncounterMatrix m(ids);
  for (size_t i = 0; i < tenths.size(); ++i) {
    m.add_line_trips(static_cast<int>(i), 10);
    for (size_t j = 0; j < tenths.size(); ++j) {
      for (int k = 0; k < tenths[i][j]; ++k) {
        m.add_encounter_trip(static_cast<int>(i), static_cast<int>(j));
      }
    }
  }
  return m;
}

TEST(BuildGraph, LogInverseWeights) {
  EncounterMatrix m = matrix_from_tenths({{0, 5}, {9, 0}});
  LineGraph g = build_graph(m);
  ASSERT_EQ(g.out[0].size(), 1u);
  EXPECT_NEAR(g.out[0][0].weight, std::log(2.0), 1e-12);  // p=0.5
  ASSERT_EQ(g.out[1].size(), 1u);
  EXPECT_NEAR(g.out[1][0].weight, std::log(10.0 / 9.0), 1e-12);  // p=0.9
}

TEST(ShortestPaths, TriangleRoutesAroundWeakEdge) {
  // A-B 0.9, B-C 0.9, A-C 0.1 (symmetric): best A->C is A->B->C.
  EncounterMatrix m =
      matrix_from_tenths({{0, 9, 1}, {9, 0, 9}, {1, 9, 0}});
  RoutingTable t = shortest_paths(build_graph(m).weighted());
  const RouteEntry& e = t.entry(0, 2);
  ASSERT_TRUE(e.reachable);
  EXPECT_EQ(e.next_hop, 1);
  EXPECT_EQ(e.hops, 2);
  EXPECT_NEAR(t.route_probability(0, 2), 0.81, 1e-9);
  EXPECT_EQ(t.path(0, 2), (std::vector<int32_t>{0, 1, 2}));
}

TEST(ShortestPaths, SourceEqualsDestination) {
  EncounterMatrix m = matrix_from_tenths({{0, 9}, {9, 0}});
  RoutingTable t = shortest_paths(build_graph(m).weighted());
  const RouteEntry& e = t.entry(0, 0);
  EXPECT_TRUE(e.reachable);
  EXPECT_DOUBLE_EQ(e.weight, 0.0);
  EXPECT_EQ(e.hops, 0);
  EXPECT_DOUBLE_EQ(t.route_probability(0, 0), 1.0);
  EXPECT_EQ(t.path(0, 0), (std::vector<int32_t>{0}));
}

TEST(ShortestPaths, UnreachableIsMarked) {
  EncounterMatrix m = matrix_from_tenths({{0, 9, 0}, {0, 0, 0}, {0, 0, 0}});
  RoutingTable t = shortest_paths(build_graph(m).weighted());
  EXPECT_FALSE(t.entry(1, 0).reachable);
  EXPECT_FALSE(t.entry(0, 2).reachable || t.entry(2, 0).reachable);
  EXPECT_TRUE(t.entry(0, 1).reachable);
}

std::vector<std::vector<double>> random_tenths_matrix(std::mt19937_64& rng,
                                                      int n,
                                                      double edge_prob) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> tenth(1, 9);
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && unit(rng) < edge_prob) p[i][j] = tenth(rng) / 10.0;
    }
  }
  return p;
}

RoutingTable table_from_prob(const std::vector<std::vector<double>>& p) {
  std::vector<std::vector<int>> tenths(p.size(),
                                       std::vector<int>(p.size(), 0));
  for (size_t i = 0; i < p.size(); ++i) {
    for (size_t j = 0; j < p.size(); ++j) {
      tenths[i][j] = static_cast<int>(std::lround(p[i][j] * 10));
    }
  }
  return shortest_paths(build_graph(matrix_from_tenths(tenths)).weighted());
}

TEST(ShortestPaths, MatchesExhaustiveEnumerationOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 25; ++round) {
    int n = 8;
    auto p = random_tenths_matrix(rng, n, 0.45);
    PathOracle oracle(p);
    RoutingTable t = table_from_prob(p);
    for (int s = 0; s < n; ++s) {
      for (int d = 0; d < n; ++d) {
        if (s == d) continue;
        double want = oracle.best_probability(s, d);
        const RouteEntry& e = t.entry(s, d);
        if (want <= 0.0) {
          EXPECT_FALSE(e.reachable) << "round " << round;
          continue;
        }
        ASSERT_TRUE(e.reachable) << "round " << round;
        EXPECT_NEAR(t.route_probability(s, d), want, 1e-9)
            << "round " << round << " pair " << s << "->" << d;
        EXPECT_EQ(e.hops, oracle.best_hops(s, d))
            << "round " << round << " pair " << s << "->" << d;
        auto oracle_path = oracle.canonical_path(s, d);
        std::vector<int32_t> want_path(oracle_path.begin(),
                                       oracle_path.end());
        EXPECT_EQ(t.path(s, d), want_path)
            << "round " << round << " pair " << s << "->" << d;
      }
    }
  }
}

TEST(ShortestPaths, WeightEqualsSumAlongReconstructedPath) {
  std::mt19937_64 rng(7);
  auto p = random_tenths_matrix(rng, 9, 0.5);
  RoutingTable t = table_from_prob(p);
  for (size_t s = 0; s < p.size(); ++s) {
    for (size_t d = 0; d < p.size(); ++d) {
      const RouteEntry& e = t.entry(static_cast<int>(s),
                                    static_cast<int>(d));
      if (!e.reachable) continue;
      auto path = t.path(static_cast<int>(s), static_cast<int>(d));
      double sum = 0.0;
      double prod = 1.0;
      for (size_t k = 0; k + 1 < path.size(); ++k) {
        double trunc = truncate_probability(p[path[k]][path[k + 1]]);
        ASSERT_GT(trunc, 0.0);
        sum += std::log(1.0 / trunc);
        prod *= trunc;
      }
      EXPECT_NEAR(e.weight, sum, 1e-9);
      EXPECT_NEAR(std::exp(-e.weight), prod, 1e-9);
    }
  }
}

TEST(ShortestPaths, RaisingAProbabilityNeverIncreasesAnyWeight) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 10; ++round) {
    auto p = random_tenths_matrix(rng, 7, 0.5);
    // find an improvable edge
    int ei = -1, ej = -1;
    for (int i = 0; i < 7 && ei < 0; ++i) {
      for (int j = 0; j < 7; ++j) {
        if (i != j && p[i][j] > 0.0 && p[i][j] < 0.9) {
          ei = i;
          ej = j;
          break;
        }
      }
    }
    if (ei < 0) continue;
    RoutingTable before = table_from_prob(p);
    p[ei][ej] += 0.1;
    RoutingTable after = table_from_prob(p);
    for (int s = 0; s < 7; ++s) {
      for (int d = 0; d < 7; ++d) {
        if (!before.entry(s, d).reachable) continue;
        ASSERT_TRUE(after.entry(s, d).reachable);
        EXPECT_LE(after.entry(s, d).weight,
                  before.entry(s, d).weight + 1e-9);
      }
    }
  }
}

TEST(ShortestPaths, NextHopTableInvariantUnderLogBase) {
  std::mt19937_64 rng(13);
  for (int round = 0; round < 10; ++round) {
    auto p = random_tenths_matrix(rng, 8, 0.45);
    std::vector<std::vector<int>> tenths(8, std::vector<int>(8, 0));
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        tenths[i][j] = static_cast<int>(std::lround(p[i][j] * 10));
      }
    }
    LineGraph g = build_graph(matrix_from_tenths(tenths));
    WeightedLineGraph natural = g.weighted();
    WeightedLineGraph base10 = natural;
    for (auto& edges : base10.out) {
      for (auto& e : edges) e.weight /= std::log(10.0);
    }
    RoutingTable tn = shortest_paths(natural);
    RoutingTable t10 = shortest_paths(base10);
    for (int s = 0; s < 8; ++s) {
      for (int d = 0; d < 8; ++d) {
        EXPECT_EQ(tn.entry(s, d).reachable, t10.entry(s, d).reachable);
        if (tn.entry(s, d).reachable) {
          EXPECT_EQ(tn.entry(s, d).next_hop, t10.entry(s, d).next_hop)
              << s << "->" << d;
          EXPECT_EQ(tn.entry(s, d).hops, t10.entry(s, d).hops);
        }
      }
    }
  }
}

TEST(ExpectedDelay, SingleHopClosedForm) {
  EncounterMatrix m = matrix_from_tenths({{0, 5}, {5, 0}});
  std::map<int32_t, double> trip_s{{0, 600.0}, {1, 600.0}};
  DelayEstimate est = expected_delay({0, 1}, m, trip_s);
  ASSERT_TRUE(est.finite);
  EXPECT_DOUBLE_EQ(est.expected_s, 900.0);  // 300 + 600
  ASSERT_EQ(est.hops.size(), 1u);
  EXPECT_DOUBLE_EQ(est.hops[0].waiting_term_s, 600.0);
}

TEST(ExpectedDelay, CertainEncounterIsHalfTrip) {
  EncounterMatrix m = matrix_from_tenths({{0, 10}, {10, 0}});
  std::map<int32_t, double> trip_s{{0, 600.0}, {1, 600.0}};
  DelayEstimate est = expected_delay({0, 1}, m, trip_s);
  ASSERT_TRUE(est.finite);
  EXPECT_DOUBLE_EQ(est.expected_s, 300.0);
}

TEST(ExpectedDelay, ZeroProbabilityHopIsInfinite) {
  EncounterMatrix m = matrix_from_tenths({{0, 0}, {0, 0}});
  std::map<int32_t, double> trip_s{{0, 600.0}, {1, 600.0}};
  DelayEstimate est = expected_delay({0, 1}, m, trip_s);
  EXPECT_FALSE(est.finite);
  EXPECT_TRUE(std::isinf(est.expected_s));
}

TEST(ExpectedDelay, ExpectedDelayAtLeastSumOfHalfTrips) {
  EncounterMatrix m = matrix_from_tenths(
      {{0, 3, 0, 0}, {0, 0, 7, 0}, {0, 0, 0, 5}, {0, 0, 0, 0}});
  std::map<int32_t, double> trip_s{
      {0, 600.0}, {1, 1200.0}, {2, 900.0}, {3, 300.0}};
  DelayEstimate est = expected_delay({0, 1, 2, 3}, m, trip_s);
  ASSERT_TRUE(est.finite);
  EXPECT_GE(est.expected_s, (600.0 + 1200.0 + 900.0) / 2.0);
}

// Monte Carlo oracle for the per-hop waiting model: uniform residual
// trip time plus a geometric number of whole trips.
double monte_carlo_delay(const std::vector<double>& trip_s,
                         const std::vector<double>& p, int samples,
                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double total = 0.0;
  for (int s = 0; s < samples; ++s) {
    double delay = 0.0;
    for (size_t h = 0; h < p.size(); ++h) {
      delay += unit(rng) * trip_s[h];  // residual within the current trip
      std::geometric_distribution<int> misses(p[h]);
      delay += static_cast<double>(misses(rng)) * trip_s[h];
    }
    total += delay;
  }
  return total / samples;
}

TEST(ExpectedDelay, ThreeHopRouteMatchesMonteCarlo) {
  EncounterMatrix m = matrix_from_tenths(
      {{0, 4, 0, 0}, {0, 0, 7, 0}, {0, 0, 0, 2}, {0, 0, 0, 0}});
  std::map<int32_t, double> trip_s{
      {0, 600.0}, {1, 900.0}, {2, 450.0}, {3, 300.0}};
  DelayEstimate est = expected_delay({0, 1, 2, 3}, m, trip_s);
  ASSERT_TRUE(est.finite);
  double mc = monte_carlo_delay({600.0, 900.0, 450.0}, {0.4, 0.7, 0.2},
                                100000, 99);
  EXPECT_NEAR(est.expected_s, mc, est.expected_s * 0.02);
}

TEST(Serialization, MatrixAndTableJsonShapes) {
  EncounterMatrix m = matrix_from_tenths({{0, 6}, {3, 0}});
  std::string mj = encounter_matrix_to_json(m);
  EXPECT_NE(mj.find("\"encounter_trips\""), std::string::npos);
  std::string csv = encounter_matrix_to_csv(m);
  EXPECT_NE(csv.find("0,1,6,10,0.600000000"), std::string::npos);
  RoutingTable t = shortest_paths(build_graph(m).weighted());
  std::string tj = routing_table_to_json(t, "log_inverse_probability");
  EXPECT_NE(tj.find("\"metric\""), std::string::npos);
  EXPECT_NE(tj.find("\"next_hop\""), std::string::npos);
}

}  // namespace
}  // namespace bsn

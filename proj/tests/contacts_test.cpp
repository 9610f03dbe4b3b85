#include "bsn/contacts.hpp"

#include <fstream>

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "testutil.hpp"

namespace bsn {
namespace {

using test::TopologyBuilder;
using test::TraceBuilder;

TEST(StatsFromSamples, MedianMeanStd) {
  ContactStats st = stats_from_samples({10, 20, 30});
  EXPECT_DOUBLE_EQ(st.median, 20);
  EXPECT_DOUBLE_EQ(st.mean, 20);
  EXPECT_EQ(st.sample_count, 3);

  ContactStats single = stats_from_samples({45});
  EXPECT_DOUBLE_EQ(single.median, 45);
  EXPECT_DOUBLE_EQ(single.mean, 45);
  EXPECT_DOUBLE_EQ(single.std_dev, 0);

  // even-sized samples take the lower middle value
  ContactStats even = stats_from_samples({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(even.median, 2);
}

TEST(IntraContact, StatsOverDurations) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 1000)
                            .line(0)
                            .line(1)
                            .bus(0, 0, 0, 1000)
                            .bus(1, 1, 0, 1000)
                            .contact(0, 1, 100, 110)
                            .contact(0, 1, 300, 320)
                            .contact(0, 1, 500, 530)
                            .build();
  auto st = intra_contact_stats(trace.contacts);
  ASSERT_TRUE(st.has_value());
  EXPECT_DOUBLE_EQ(st->median, 20);
  EXPECT_DOUBLE_EQ(st->mean, 20);
  EXPECT_EQ(st->sample_count, 3);
}

TEST(IntraContact, EmptyLogIsExplicitNoContacts) {
  EXPECT_FALSE(intra_contact_stats({}).has_value());
}

// Two lines crossing head-on at 10 m/s each on a 4000 m street: within
// 100 m radio range while |4000 - 20t| <= 100, i.e. ticks 195..205.
TEST(IntraContact, CrossingFixtureMatchesHandEnumeration) {
  TopologyBuilder b;
  int32_t w = b.stop("w", 0, 0);
  int32_t e = b.stop("e", 4000, 0);
  int32_t fwd = b.path({w, e}, 400);
  int32_t bwd = b.path({e, w}, 400);
  b.line({{fwd, PathRole::canonical}}, {{fwd, 0}, {fwd, 1000}});
  b.line({{bwd, PathRole::canonical}}, {{bwd, 0}, {bwd, 1000}});
  Topology topo = b.build();
  MobilityConfig mc;
  mc.departure_noise_max_s = 0;
  mc.seed = 1;
  mc.position_stride = 0;
  MobilityTrace trace = run_mobility(topo, mc);

  ASSERT_EQ(trace.contacts.size(), 2u);
  for (const ContactEvent& c : trace.contacts) {
    EXPECT_EQ(c.end - c.start, 11);
  }
  EXPECT_EQ(trace.contacts[0].start, 195);
  EXPECT_EQ(trace.contacts[1].start, 1195);
  auto st = intra_contact_stats(trace.contacts);
  ASSERT_TRUE(st.has_value());
  EXPECT_DOUBLE_EQ(st->median, 11);
  EXPECT_DOUBLE_EQ(st->mean, 11);
  EXPECT_DOUBLE_EQ(st->std_dev, 0);
}

TEST(InterContact, GapBetweenExposuresToALine) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 1000)
                            .line(0)
                            .line(1)
                            .bus(0, 0, 0, 1000)
                            .bus(1, 1, 0, 1000)
                            .contact(0, 1, 100, 110)
                            .contact(0, 1, 400, 420)
                            .build();
  auto st = inter_contact_stats(trace.contacts);
  ASSERT_TRUE(st.has_value());
  // bus 0 vs line 1 and bus 1 vs line 0 each contribute the same gap
  EXPECT_EQ(st->sample_count, 2);
  EXPECT_DOUBLE_EQ(st->mean, 290);
}

TEST(InterContact, OverlappingExposuresToOneLineMerge) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 1000)
                            .line(0)
                            .line(1)
                            .bus(0, 0, 0, 1000)
                            .bus(1, 1, 0, 1000)
                            .bus(2, 1, 0, 1000)
                            .contact(0, 1, 100, 200)
                            .contact(0, 2, 150, 250)
                            .contact(0, 1, 400, 500)
                            .build();
  auto st = inter_contact_stats(trace.contacts);
  ASSERT_TRUE(st.has_value());
  // bus 0's exposures to line 1 merge into [100,250); one gap of 150.
  // buses 1 and 2 meet line 0 via merged/single exposures: no gap from
  // bus 2, one gap of 200 from bus 1.
  EXPECT_EQ(st->sample_count, 2);
  EXPECT_DOUBLE_EQ(st->median, 150);
}

TEST(InterContact, SingleEncounterYieldsNoSamples) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 1000)
                            .line(0)
                            .line(1)
                            .bus(0, 0, 0, 1000)
                            .bus(1, 1, 0, 1000)
                            .contact(0, 1, 100, 110)
                            .build();
  EXPECT_FALSE(inter_contact_stats(trace.contacts).has_value());
}

TEST(NeighborHistogram, CliqueCountsPerTick) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 100)
                            .line(0)
                            .bus(0, 0, 0, 100)
                            .bus(1, 0, 0, 100)
                            .bus(2, 0, 0, 100)
                            .contact(0, 1, 50, 60)
                            .contact(0, 2, 50, 60)
                            .contact(1, 2, 50, 60)
                            .build();
  NeighborHistogram hist = neighbor_histogram(trace);
  EXPECT_EQ(hist.counts.at(2), 30);
  EXPECT_EQ(hist.total_samples, 30);
}

TEST(NeighborHistogram, EmptyWhenNoContacts) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 100)
                            .line(0)
                            .bus(0, 0, 0, 100)
                            .bus(1, 0, 0, 100)
                            .build();
  NeighborHistogram hist = neighbor_histogram(trace);
  EXPECT_TRUE(hist.counts.empty());
  EXPECT_EQ(hist.total_samples, 0);
}

TEST(NeighborHistogram, QueueHubHasHeavyTail) {
  // Five buses co-located at a head: each sees four neighbors.
  TraceBuilder b;
  b.span(0, 200).line(0);
  for (int i = 0; i < 5; ++i) b.bus(i, 0, 0, 200);
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) b.contact(i, j, 0, 100);
  }
  MobilityTrace trace = b.build();
  NeighborHistogram hist = neighbor_histogram(trace);
  EXPECT_EQ(hist.counts.at(4), 500);
  EXPECT_EQ(hist.counts.size(), 1u);
}

TEST(NeighborHistogram, MassMatchesPerTickOracle) {
  Topology topo = test::crossing_topology(300, 6 * 3600, 7 * 3600);
  MobilityConfig mc;
  mc.seed = 17;
  mc.departure_noise_max_s = 200;
  mc.position_stride = 0;
  MobilityTrace trace = run_mobility(topo, mc);
  NeighborHistogram hist = neighbor_histogram(trace);

  // Brute-force oracle: per (bus, tick) neighbor counts from the log.
  std::map<std::pair<int32_t, int64_t>, int32_t> counts;
  for (const ContactEvent& c : trace.contacts) {
    for (int64_t t = c.start; t < c.end; ++t) {
      counts[{c.bus_a, t}]++;
      counts[{c.bus_b, t}]++;
    }
  }
  std::map<int32_t, int64_t> expect;
  for (const auto& [key, n] : counts) expect[n]++;
  int64_t mass = 0;
  for (const auto& [n, cnt] : expect) mass += cnt;
  EXPECT_EQ(hist.total_samples, mass);
  EXPECT_EQ(hist.counts.size(), expect.size());
  for (const auto& [n, cnt] : expect) {
    EXPECT_EQ(hist.counts.at(n), cnt) << "level " << n;
  }
}

TEST(ActivityCurves, EmptyTraceGivesEmptySeries) {
  MobilityTrace trace;
  trace.start_tick = 0;
  trace.end_tick = -1;
  ActivityCurves curves = activity_curves(trace, 60);
  EXPECT_TRUE(curves.population.empty());
  EXPECT_TRUE(curves.active_contacts.empty());
}

TEST(ActivityCurves, ContactPeakTracksPopulationPeak) {
  MobilityTrace trace = TraceBuilder()
                            .span(0, 99)
                            .line(0)
                            .bus(0, 0, 0, 100)
                            .bus(1, 0, 0, 100)
                            .bus(2, 0, 40, 60)
                            .bus(3, 0, 40, 60)
                            .contact(2, 3, 40, 60)
                            .contact(0, 1, 45, 55)
                            .build();
  ActivityCurves curves = activity_curves(trace, 10);
  size_t pop_peak = 0, con_peak = 0;
  for (size_t i = 0; i < curves.population.size(); ++i) {
    if (curves.population[i] > curves.population[pop_peak]) pop_peak = i;
    if (curves.active_contacts[i] > curves.active_contacts[con_peak]) {
      con_peak = i;
    }
  }
  EXPECT_LE(std::abs(static_cast<int>(pop_peak) - static_cast<int>(con_peak)),
            1);
}

TEST(SaveContactAnalytics, WritesTotalsAndStats) {
  Topology topo = test::crossing_topology(600, 6 * 3600, 7 * 3600);
  MobilityConfig mc;
  mc.seed = 2;
  mc.departure_noise_max_s = 0;
  mc.position_stride = 0;
  MobilityTrace trace = run_mobility(topo, mc);
  test::TempDir dir;
  save_contact_analytics(trace, dir.str(), 60, "config=x seed=2");
  std::ifstream in(dir.path() / "contact_stats.json");
  ASSERT_TRUE(in.good());
  nlohmann::json j;
  in >> j;
  EXPECT_EQ(j["total_contacts"].get<size_t>(), trace.contacts.size());
  EXPECT_TRUE(j.contains("intra_contact"));
  EXPECT_TRUE(j.contains("inter_contact"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "neighbor_histogram.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "population.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "contact_count.csv"));
}

}  // namespace
}  // namespace bsn

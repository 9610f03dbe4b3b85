#include "bsn/synth.hpp"

#include <set>

#include <gtest/gtest.h>

#include "bsn/error.hpp"
#include "testutil.hpp"

namespace bsn {
namespace {

TEST(Synth, DeterministicForSeed) {
  SynthSpec spec = test::small_city_spec(10);
  Topology a = synthesize_city(spec, 123);
  Topology b = synthesize_city(spec, 123);
  Topology c = synthesize_city(spec, 124);
  EXPECT_EQ(topology_hash(a), topology_hash(b));
  EXPECT_NE(topology_hash(a), topology_hash(c));
}

TEST(Synth, AllLinesClosedWithDepartures) {
  SynthSpec spec = test::small_city_spec(20);
  Topology topo = synthesize_city(spec, 9);
  EXPECT_EQ(topo.lines.size(), 20u);
  EXPECT_TRUE(topo.rejected_lines.empty());
  for (const LineRecord& line : topo.lines) {
    EXPECT_TRUE(line.closed);
    EXPECT_FALSE(line.departures.empty());
    EXPECT_GT(line.mean_trip_s, 0.0);
    // closed by construction: a loop or an out-and-back pair
    const PathRecord& first = topo.paths[line.members.front().path];
    if (line.members.size() == 1) {
      EXPECT_EQ(first.first_stop(), first.last_stop());
    } else {
      const PathRecord& second = topo.paths[line.members[1].path];
      EXPECT_EQ(first.first_stop(), second.last_stop());
      EXPECT_EQ(first.last_stop(), second.first_stop());
    }
  }
}

TEST(Synth, ShapeMixProducesLoopsAndCrossLines) {
  SynthSpec spec = test::small_city_spec(20);
  Topology topo = synthesize_city(spec, 21);
  int loops = 0, out_and_back = 0;
  for (const LineRecord& line : topo.lines) {
    if (line.members.size() == 1) loops++;
    else out_and_back++;
  }
  EXPECT_GT(loops, 0);
  EXPECT_GT(out_and_back, 0);
}

TEST(Synth, OffsetsStrictlyMoveAndDwell) {
  SynthSpec spec = test::small_city_spec(6);
  spec.dwell_s = 10;
  Topology topo = synthesize_city(spec, 3);
  for (const PathRecord& p : topo.paths) {
    for (size_t i = 0; i + 1 < p.stops.size(); ++i) {
      EXPECT_GT(p.arrive_s[i + 1], p.depart_s[i]);
      EXPECT_GE(p.depart_s[i], p.arrive_s[i]);
    }
  }
}

TEST(Synth, SpecJsonRoundTrip) {
  SynthSpec spec = test::small_city_spec(12);
  spec.mix_cross = 0.4;
  spec.mix_ring = 0.4;
  spec.mix_peripheral = 0.2;
  SynthSpec back = synth_spec_from_json(synth_spec_to_json(spec));
  EXPECT_EQ(back.num_lines, spec.num_lines);
  EXPECT_EQ(back.grid_cols, spec.grid_cols);
  EXPECT_EQ(back.headway_s, spec.headway_s);
  EXPECT_DOUBLE_EQ(back.mix_ring, spec.mix_ring);
  EXPECT_EQ(back.rush_hours, spec.rush_hours);
}

TEST(Synth, RejectsDegenerateSpecs) {
  SynthSpec bad = test::small_city_spec(0);
  EXPECT_THROW(synthesize_city(bad, 1), UsageError);
  SynthSpec tiny = test::small_city_spec(4);
  tiny.grid_cols = 2;
  EXPECT_THROW(synthesize_city(tiny, 1), UsageError);
  SynthSpec empty_day = test::small_city_spec(4);
  empty_day.day_end_s = empty_day.day_start_s;
  EXPECT_THROW(synthesize_city(empty_day, 1), UsageError);
}

TEST(Synth, SharedGridNodesShareStops) {
  SynthSpec spec = test::small_city_spec(16);
  Topology topo = synthesize_city(spec, 8);
  std::set<std::string> ids;
  for (const StopNode& s : topo.stops) {
    EXPECT_TRUE(ids.insert(s.id).second) << "duplicate stop " << s.id;
  }
}

}  // namespace
}  // namespace bsn

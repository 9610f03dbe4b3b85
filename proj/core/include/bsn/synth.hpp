#pragma once

#include <cstdint>
#include <string>

#include "bsn/topology.hpp"

namespace bsn {

// Synthetic city on a street grid. Lines come in three shapes: out-and-
// back routes spanning the city (optionally with one turn), rings around
// the center, and small peripheral loops. Every generated line is closed
// by construction, so the whole set is admitted to routing.
struct SynthSpec {
  int32_t grid_cols = 12;
  int32_t grid_rows = 12;
  double grid_spacing_m = 400.0;
  int32_t num_lines = 10;
  double mix_cross = 0.5;       // fraction of city-spanning lines
  double mix_ring = 0.3;        // fraction of center rings
  double mix_peripheral = 0.2;  // fraction of small peripheral loops
  int64_t headway_s = 900;
  int64_t day_start_s = 6 * 3600;
  int64_t day_end_s = 22 * 3600;
  bool rush_hours = true;  // extra departures 07-09 and 16:30-19
  int64_t dwell_s = 10;
  double speed_mps = 8.33;

  void validate() const;
};

std::string synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const std::string& json_text);
SynthSpec load_synth_spec(const std::string& path);

Topology synthesize_city(const SynthSpec& spec, uint64_t seed);

}  // namespace bsn

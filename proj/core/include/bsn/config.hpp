#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace bsn {

// Effective parameters of one pipeline run. Loaded from a JSON config
// file, overridden by CLI flags. The seed is mandatory: runs never seed
// from the wall clock.
struct RunConfig {
  // Inputs (one of feed / synth spec for extract; topology / trace
  // paths are given per command).
  std::string feed_path;
  std::string synth_spec_path;

  // Feed extraction.
  std::string service_day = "monday";
  double alias_threshold = 0.8;

  // Mobility.
  double radio_range_m = 100.0;
  double corridor_half_width_m = 15.0;
  int64_t departure_noise_max_s = 600;
  int64_t position_stride = 60;
  int64_t activity_bucket_s = 60;

  // Traffic.
  int64_t bandwidth_bps = 10'000'000;
  int64_t packet_size_bytes = 64 * 1024;
  int64_t buffer_capacity_bytes = 512ll * 1024 * 1024;
  double rate_per_hour = 12.0;
  int64_t window_start_s = 8 * 3600;
  int64_t window_end_s = 18 * 3600;
  bool include_own_line_dest = false;
  std::vector<std::string> policies = {"ophop"};

  bool seed_set = false;
  uint64_t seed = 0;
  std::string output_dir;

  void require_seed() const;
  void validate() const;
};

RunConfig load_run_config(const std::string& path);
void apply_config_json(RunConfig& cfg, const std::string& json_text);
std::string run_config_to_json(const RunConfig& cfg);

// Hash over every result-affecting parameter (not paths or the output
// directory); embedded in every output file alongside the seed.
uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(uint64_t h);

struct Provenance {
  std::string config_hash_hex;
  uint64_t seed = 0;
  std::string topology_hash_hex;  // empty before a topology exists

  std::string line() const;  // "config=... seed=... topology=..."
  std::string json() const;
};

Provenance make_provenance(const RunConfig& cfg, uint64_t topology_hash_value);

}  // namespace bsn

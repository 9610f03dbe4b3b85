#include "bsn/config.hpp"

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "bsn/error.hpp"
#include "bsn/gtfs.hpp"
#include "bsn/rng.hpp"

namespace bsn {

using ordered_json = nlohmann::ordered_json;

void RunConfig::require_seed() const {
  if (!seed_set) {
    throw UsageError("seed is mandatory: pass --seed or set \"seed\" in the "
                     "config file");
  }
}

void RunConfig::validate() const {
  if (radio_range_m <= 0 || corridor_half_width_m <= 0) {
    throw UsageError("radio range and corridor half-width must be positive");
  }
  if (departure_noise_max_s < 0) {
    throw UsageError("departure noise bound must be nonnegative");
  }
  if (!(alias_threshold > 0.0 && alias_threshold <= 1.0)) {
    throw UsageError("alias threshold must be in (0, 1]");
  }
  if (bandwidth_bps <= 0 || packet_size_bytes <= 0 ||
      buffer_capacity_bytes <= 0) {
    throw UsageError("bandwidth, packet size and buffer capacity must be "
                     "positive");
  }
  if (rate_per_hour <= 0) throw UsageError("traffic rate must be positive");
  if (window_end_s <= window_start_s) {
    throw UsageError("traffic window is empty");
  }
  weekday_from_string(service_day);  // throws on bad name
}

void apply_config_json(RunConfig& cfg, const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw DataError(std::string("bad config JSON: ") + e.what());
  }
  cfg.feed_path = j.value("feed", cfg.feed_path);
  cfg.synth_spec_path = j.value("synth_spec", cfg.synth_spec_path);
  cfg.service_day = j.value("service_day", cfg.service_day);
  cfg.alias_threshold = j.value("alias_threshold", cfg.alias_threshold);
  cfg.radio_range_m = j.value("radio_range_m", cfg.radio_range_m);
  cfg.corridor_half_width_m =
      j.value("corridor_half_width_m", cfg.corridor_half_width_m);
  cfg.departure_noise_max_s =
      j.value("departure_noise_max_s", cfg.departure_noise_max_s);
  cfg.position_stride = j.value("position_stride", cfg.position_stride);
  cfg.activity_bucket_s = j.value("activity_bucket_s", cfg.activity_bucket_s);
  cfg.bandwidth_bps = j.value("bandwidth_bps", cfg.bandwidth_bps);
  cfg.packet_size_bytes = j.value("packet_size_bytes", cfg.packet_size_bytes);
  cfg.buffer_capacity_bytes =
      j.value("buffer_capacity_bytes", cfg.buffer_capacity_bytes);
  cfg.rate_per_hour = j.value("rate_per_hour", cfg.rate_per_hour);
  cfg.window_start_s = j.value("window_start_s", cfg.window_start_s);
  cfg.window_end_s = j.value("window_end_s", cfg.window_end_s);
  cfg.include_own_line_dest =
      j.value("include_own_line_dest", cfg.include_own_line_dest);
  if (j.contains("policies")) {
    cfg.policies = j.at("policies").get<std::vector<std::string>>();
  }
  if (j.contains("seed")) {
    cfg.seed = j.at("seed").get<uint64_t>();
    cfg.seed_set = true;
  }
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  RunConfig cfg;
  apply_config_json(cfg, text);
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["feed"] = cfg.feed_path;
  j["synth_spec"] = cfg.synth_spec_path;
  j["service_day"] = cfg.service_day;
  j["alias_threshold"] = cfg.alias_threshold;
  j["radio_range_m"] = cfg.radio_range_m;
  j["corridor_half_width_m"] = cfg.corridor_half_width_m;
  j["departure_noise_max_s"] = cfg.departure_noise_max_s;
  j["position_stride"] = cfg.position_stride;
  j["activity_bucket_s"] = cfg.activity_bucket_s;
  j["bandwidth_bps"] = cfg.bandwidth_bps;
  j["packet_size_bytes"] = cfg.packet_size_bytes;
  j["buffer_capacity_bytes"] = cfg.buffer_capacity_bytes;
  j["rate_per_hour"] = cfg.rate_per_hour;
  j["window_start_s"] = cfg.window_start_s;
  j["window_end_s"] = cfg.window_end_s;
  j["include_own_line_dest"] = cfg.include_own_line_dest;
  j["policies"] = cfg.policies;
  if (cfg.seed_set) j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j.dump(1);
}

uint64_t config_hash(const RunConfig& cfg) {
  ordered_json j;
  j["service_day"] = cfg.service_day;
  j["alias_threshold"] = cfg.alias_threshold;
  j["radio_range_m"] = cfg.radio_range_m;
  j["corridor_half_width_m"] = cfg.corridor_half_width_m;
  j["departure_noise_max_s"] = cfg.departure_noise_max_s;
  j["bandwidth_bps"] = cfg.bandwidth_bps;
  j["packet_size_bytes"] = cfg.packet_size_bytes;
  j["buffer_capacity_bytes"] = cfg.buffer_capacity_bytes;
  j["rate_per_hour"] = cfg.rate_per_hour;
  j["window_start_s"] = cfg.window_start_s;
  j["window_end_s"] = cfg.window_end_s;
  j["include_own_line_dest"] = cfg.include_own_line_dest;
  j["policies"] = cfg.policies;
  j["seed"] = cfg.seed;
  return SubstreamRng::fnv1a(j.dump());
}

std::string hash_hex(uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string Provenance::line() const {
  std::string out = "config=" + config_hash_hex +
                    " seed=" + std::to_string(seed);
  if (!topology_hash_hex.empty()) out += " topology=" + topology_hash_hex;
  return out;
}

std::string Provenance::json() const {
  ordered_json j;
  j["config_hash"] = config_hash_hex;
  j["seed"] = seed;
  if (!topology_hash_hex.empty()) j["topology_hash"] = topology_hash_hex;
  return j.dump();
}

Provenance make_provenance(const RunConfig& cfg,
                           uint64_t topology_hash_value) {
  Provenance p;
  p.config_hash_hex = hash_hex(config_hash(cfg));
  p.seed = cfg.seed;
  if (topology_hash_value != 0) {
    p.topology_hash_hex = hash_hex(topology_hash_value);
  }
  return p;
}

}  // namespace bsn

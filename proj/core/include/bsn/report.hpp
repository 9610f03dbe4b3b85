#pragma once

#include <string>
#include <vector>

#include "bsn/traffic.hpp"

namespace bsn {

// Table-IV-style per-policy comparison (delivery ratio, delay stats,
// drops, replicas, peak buffer).
std::string comparison_csv(const std::vector<MetricsReport>& reports);

// Fraction of generated traffic delivered within T, per policy, on a
// minute grid (QoS diagram data).
std::string qos_csv(const std::vector<TrafficResult>& results,
                    int64_t grid_minutes = 10);

// Renders a bundle directory as a markdown summary with provenance.
// Missing optional artifacts are reported as explicit gaps; a directory
// with no recognizable bundle at all is a DataError.
std::string render_bundle_summary(const std::string& dir);

// Side-by-side comparison of two bundles. Refuses bundles whose
// topology hashes differ.
std::string render_bundle_diff(const std::string& dir_a,
                               const std::string& dir_b);

}  // namespace bsn

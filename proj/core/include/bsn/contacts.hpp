#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bsn/mobility.hpp"

namespace bsn {

struct ContactStats {
  double median = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
  int64_t sample_count = 0;
};

// Median of an even-sized sample is the lower middle value; std_dev is
// the population standard deviation (zero for a singleton).
ContactStats stats_from_samples(std::vector<double> samples);

// Durations of individual contacts. Empty log yields nullopt, an
// explicit "no contacts" rather than zeros.
std::optional<ContactStats> intra_contact_stats(
    const std::vector<ContactEvent>& contacts);

// For each bus and each line: gaps between successive exposures to any
// bus of that line. Overlapping or touching encounters with the same
// line merge into one exposure first; a bus that meets a line fewer than
// twice contributes no samples.
std::optional<ContactStats> inter_contact_stats(
    const std::vector<ContactEvent>& contacts);

struct NeighborHistogram {
  std::map<int32_t, int64_t> counts;  // simultaneous neighbors -> tick samples
  int64_t total_samples = 0;          // (bus, tick) pairs with >= 1 neighbor
};

NeighborHistogram neighbor_histogram(const MobilityTrace& trace);

struct ActivityCurves {
  int64_t bucket_s = 60;
  int64_t first_bucket_start = 0;
  std::vector<double> population;       // mean present buses per bucket
  std::vector<double> active_contacts;  // mean simultaneous contacts
};

ActivityCurves activity_curves(const MobilityTrace& trace, int64_t bucket_s);

// Writes contact_stats.json, neighbor_histogram.csv, population.csv and
// contact_count.csv into `dir`.
void save_contact_analytics(const MobilityTrace& trace, const std::string& dir,
                            int64_t bucket_s,
                            const std::string& provenance_line);

}  // namespace bsn

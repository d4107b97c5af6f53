#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/session/footprint.hpp"

namespace fraudaware::analytics {

/// Truncated normal: draws below `floor` are redrawn. Counts are rounded.
struct MetricDistribution {
  double mean = 0;
  double spread = 0;
  double floor = 0;

  bool operator==(const MetricDistribution&) const = default;
};

/// One distribution per metric. n_articles_read has none: it is always
/// n_untrusted_read + n_trusted_read.
struct ArchetypeSpec {
  std::array<std::optional<MetricDistribution>, session::kMetricCount> metrics;

  bool operator==(const ArchetypeSpec&) const = default;
};

struct CohortSpec {
  std::string id = "default";
  int n_total = 33;
  int n_novice = 16;
  int n_experienced = 17;
  std::uint64_t seed = 42;
  ArchetypeSpec novice;
  ArchetypeSpec experienced;

  bool operator==(const CohortSpec&) const = default;
};

inline constexpr int kCohortSpecVersion = 1;

/// Throws Validation on count mismatch, negative or non-finite parameters,
/// a floor so far above the mean that redraws would stall, or a missing
/// distribution.
void validate(const CohortSpec& spec);

json to_json(const CohortSpec& spec);
CohortSpec cohort_spec_from_json(const json& doc);
CohortSpec default_cohort_spec();

/// Novices first, then Experienced; labels attached. Footprint i draws its
/// metrics in column order from SplitMix64(mix_seed(seed, i)).
std::vector<session::DigitalFootprint> generate_cohort(const CohortSpec& spec);

inline constexpr int kFootprintFileVersion = 1;

/// {"version", "cohort", "footprints": [...]}; the exchange format between
/// `cohort generate`, `bots run` and the commands that read footprints.
json footprints_to_json(const std::string& cohort_id, std::span<const session::DigitalFootprint> footprints);
std::vector<session::DigitalFootprint> footprints_from_json(const json& doc);

}  // namespace fraudaware::analytics

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraudaware/session/footprint.hpp"

namespace fraudaware::analytics {

struct Summary {
  std::size_t n = 0;
  double mean = 0;
  double median = 0;
  double std = 0;           // sample standard deviation (divisor n - 1)
  bool degenerate = false;  // n < 2: std is reported as 0

  bool operator==(const Summary&) const = default;
};

/// Throws Domain on empty input.
Summary summarize(std::span<const double> values);

struct GroupStats {
  std::string group;  // "Novice", "Experienced", or "all" when unlabeled
  std::size_t n = 0;
  std::array<Summary, session::kMetricCount> metrics;
  std::size_t trapped = 0;  // members with n_fraud_bought >= 1
  double fraud_trap_fraction = 0;
};

struct DescriptiveStats {
  std::vector<GroupStats> groups;  // Novice before Experienced; empty groups omitted
  /// mean(Experienced) / mean(Novice) for every duration metric, when both
  /// groups exist and the novice mean is positive.
  std::array<std::optional<double>, session::kMetricCount> dwell_ratio;

  const GroupStats* find(std::string_view group) const;
};

/// Groups by label category. A cohort with no labels forms one "all" group;
/// a mix of labeled and unlabeled footprints is a Validation error, as is
/// an empty cohort.
DescriptiveStats descriptive_stats(std::span<const session::DigitalFootprint> footprints);

/// Rows of one metric for one group, in input order.
std::vector<double> metric_values(std::span<const session::DigitalFootprint> footprints, session::Metric m,
                                  std::optional<InvestorCategory> category);

struct WelchResult {
  double t = 0;
  double df = 0;
  double p_value = 1;
};

/// Two-sided Welch test of equal means, t = (mean_a - mean_b) / se.
/// Needs n >= 2 in both groups. Two constant groups with equal means give
/// t = 0, p = 1; with different means they are a Domain error.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace fraudaware::analytics

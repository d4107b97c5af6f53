#include "fraudaware/analytics/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "fraudaware/error.hpp"

namespace fraudaware::analytics {

using session::Metric;

Summary summarize(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::Domain, "summary of an empty sample");
  Summary s;
  s.n = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  if (s.n < 2) {
    s.degenerate = true;
    return s;
  }
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  return s;
}

const GroupStats* DescriptiveStats::find(std::string_view group) const {
  for (const auto& g : groups) {
    if (g.group == group) return &g;
  }
  return nullptr;
}

std::vector<double> metric_values(std::span<const session::DigitalFootprint> footprints, Metric m,
                                  std::optional<InvestorCategory> category) {
  std::vector<double> out;
  for (const auto& fp : footprints) {
    if (category && (!fp.label || fp.label->category() != *category)) continue;
    out.push_back(fp[m]);
  }
  return out;
}

namespace {

GroupStats group_stats(std::span<const session::DigitalFootprint> fps, std::string name,
                       std::optional<InvestorCategory> category) {
  GroupStats g;
  g.group = std::move(name);
  for (std::size_t c = 0; c < session::kMetricCount; ++c) {
    const auto v = metric_values(fps, session::metric_at(c), category);
    g.metrics[c] = summarize(v);
    g.n = v.size();
  }
  for (double v : metric_values(fps, Metric::FraudBought, category)) g.trapped += v >= 1;
  g.fraud_trap_fraction = static_cast<double>(g.trapped) / static_cast<double>(g.n);
  return g;
}

}  // namespace

DescriptiveStats descriptive_stats(std::span<const session::DigitalFootprint> footprints) {
  if (footprints.empty()) throw Error(ErrorCode::Validation, "descriptive stats: no footprints");
  const auto labeled = static_cast<std::size_t>(
      std::count_if(footprints.begin(), footprints.end(), [](const auto& fp) { return fp.label.has_value(); }));
  DescriptiveStats d;
  if (labeled == 0) {
    d.groups.push_back(group_stats(footprints, "all", std::nullopt));
    return d;
  }
  if (labeled != footprints.size()) {
    throw Error(ErrorCode::Validation, "descriptive stats: some footprints are labeled and some are not");
  }
  for (auto cat : {InvestorCategory::Novice, InvestorCategory::Experienced}) {
    if (metric_values(footprints, Metric::Age, cat).empty()) continue;
    d.groups.push_back(group_stats(footprints, std::string(to_string(cat)), cat));
  }
  const auto* nov = d.find("Novice");
  const auto* exp = d.find("Experienced");
  if (nov && exp) {
    for (std::size_t c = 0; c < session::kMetricCount; ++c) {
      if (!session::is_duration(session::metric_at(c)) || nov->metrics[c].mean <= 0) continue;
      d.dwell_ratio[c] = exp->metrics[c].mean / nov->metrics[c].mean;
    }
  }
  return d;
}

WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw Error(ErrorCode::Domain, "welch test needs at least 2 values per group");
  const auto sa = summarize(a);
  const auto sb = summarize(b);
  const double na = static_cast<double>(sa.n);
  const double nb = static_cast<double>(sb.n);
  const double qa = sa.std * sa.std / na;
  const double qb = sb.std * sb.std / nb;
  const double se2 = qa + qb;
  if (se2 <= 0) {
    if (sa.mean != sb.mean) throw Error(ErrorCode::Domain, "welch test: both groups constant with different means");
    return {0.0, na + nb - 2, 1.0};
  }
  WelchResult r;
  r.t = (sa.mean - sb.mean) / std::sqrt(se2);
  r.df = se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1));
  // Two-sided tail of Student's t: I_{df/(df+t^2)}(df/2, 1/2).
  r.p_value = std::clamp(boost::math::ibeta(r.df / 2, 0.5, r.df / (r.df + r.t * r.t)), 0.0, 1.0);
  return r;
}

}  // namespace fraudaware::analytics

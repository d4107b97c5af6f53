#include "fraudaware/analytics/cohort.hpp"

#include <cmath>
#include <cstdio>

#include "fraudaware/defaults.hpp"
#include "fraudaware/error.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::analytics {

using session::Metric;

namespace {

constexpr int kMaxRedraws = 64;

bool derived(Metric m) { return m == Metric::ArticlesRead; }

void validate_archetype(const ArchetypeSpec& a, std::string_view name) {
  for (std::size_t i = 0; i < session::kMetricCount; ++i) {
    const auto m = session::metric_at(i);
    const std::string where = std::string(name) + "." + std::string(session::name(m));
    const auto& d = a.metrics[i];
    if (derived(m)) {
      if (d) throw Error(ErrorCode::Validation, where + " is derived and cannot have a distribution");
      continue;
    }
    if (!d) throw Error(ErrorCode::Validation, where + ": missing distribution");
    if (!std::isfinite(d->mean) || !std::isfinite(d->spread) || !std::isfinite(d->floor)) {
      throw Error(ErrorCode::Validation, where + ": non-finite parameter");
    }
    if (d->mean < 0) throw Error(ErrorCode::Validation, where + ": negative mean");
    if (d->spread < 0) throw Error(ErrorCode::Validation, where + ": negative spread");
    if (d->floor < 0) throw Error(ErrorCode::Validation, where + ": negative floor");
    // Past ~4 sd the redraw loop would almost never accept.
    if (d->floor > d->mean + 4 * d->spread) {
      throw Error(ErrorCode::Validation, where + ": floor lies too far above the mean");
    }
  }
}

double draw(const MetricDistribution& d, SplitMix64& rng) {
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const double x = d.mean + d.spread * rng.normal();
    if (x >= d.floor) return x;
  }
  return d.floor;
}

json archetype_to_json(const ArchetypeSpec& a) {
  json out = json::object();
  for (std::size_t i = 0; i < session::kMetricCount; ++i) {
    if (!a.metrics[i]) continue;
    const auto& d = *a.metrics[i];
    out[std::string(session::kMetricNames[i])] = {{"mean", d.mean}, {"spread", d.spread}, {"floor", d.floor}};
  }
  return out;
}

ArchetypeSpec archetype_from_json(const json& doc, std::string_view what) {
  if (!doc.is_object()) throw Error(ErrorCode::Schema, std::string(what) + ": expected an object");
  ArchetypeSpec a;
  for (const auto& [key, value] : doc.items()) {
    const auto m = session::metric_from_name(key);
    if (!m) throw Error(ErrorCode::Schema, std::string(what) + ": unknown metric '" + key + "'");
    const std::string where = std::string(what) + "." + key;
    a.metrics[session::index(*m)] = MetricDistribution{require_field<double>(value, "mean", where),
                                                       require_field<double>(value, "spread", where),
                                                       value.value("floor", 0.0)};
  }
  return a;
}

}  // namespace

void validate(const CohortSpec& spec) {
  if (spec.n_novice < 0 || spec.n_experienced < 0) throw Error(ErrorCode::Validation, "cohort: negative group size");
  if (spec.n_novice + spec.n_experienced != spec.n_total) {
    throw Error(ErrorCode::Validation, "cohort: n_novice + n_experienced must equal n_total");
  }
  validate_archetype(spec.novice, "Novice");
  validate_archetype(spec.experienced, "Experienced");
}

json to_json(const CohortSpec& spec) {
  return {{"version", kCohortSpecVersion},
          {"id", spec.id},
          {"n_total", spec.n_total},
          {"n_novice", spec.n_novice},
          {"n_experienced", spec.n_experienced},
          {"seed", spec.seed},
          {"archetypes", {{"Novice", archetype_to_json(spec.novice)}, {"Experienced", archetype_to_json(spec.experienced)}}}};
}

CohortSpec cohort_spec_from_json(const json& doc) {
  require_version(doc, kCohortSpecVersion, "cohort spec");
  CohortSpec s;
  s.id = doc.value("id", s.id);
  s.n_total = require_field<int>(doc, "n_total", "cohort spec");
  s.n_novice = require_field<int>(doc, "n_novice", "cohort spec");
  s.n_experienced = require_field<int>(doc, "n_experienced", "cohort spec");
  s.seed = doc.value("seed", s.seed);
  const auto archetypes = require_field<json>(doc, "archetypes", "cohort spec");
  s.novice = archetype_from_json(require_field<json>(archetypes, "Novice", "cohort spec archetypes"), "Novice");
  s.experienced =
      archetype_from_json(require_field<json>(archetypes, "Experienced", "cohort spec archetypes"), "Experienced");
  validate(s);
  return s;
}

CohortSpec default_cohort_spec() {
  return cohort_spec_from_json(parse_json(defaults::cohort_json(), "default cohort spec"));
}

std::vector<session::DigitalFootprint> generate_cohort(const CohortSpec& spec) {
  validate(spec);
  std::vector<session::DigitalFootprint> out;
  out.reserve(static_cast<std::size_t>(spec.n_total));
  for (int i = 0; i < spec.n_total; ++i) {
    const bool novice = i < spec.n_novice;
    const ArchetypeSpec& arch = novice ? spec.novice : spec.experienced;
    SplitMix64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(i)));

    session::DigitalFootprint fp;
    char id[64];
    std::snprintf(id, sizeof id, "-%03d", i);
    fp.session_id = spec.id + id;
    fp.label = novice ? InvestorType::novice() : InvestorType::experienced();
    for (std::size_t c = 0; c < session::kMetricCount; ++c) {
      const auto m = session::metric_at(c);
      if (derived(m)) continue;
      double v = draw(*arch.metrics[c], rng);
      if (session::is_count(m) || m == Metric::Age) v = std::max(0.0, std::round(v));
      fp.metrics[c] = v;
    }
    fp[Metric::ArticlesRead] = fp[Metric::UntrustedRead] + fp[Metric::TrustedRead];
    const double buys = fp[Metric::FakeBought] + fp[Metric::FraudBought] + fp[Metric::RealBought];
    fp[Metric::Transactions] = std::max(fp[Metric::Transactions], buys);
    out.push_back(std::move(fp));
  }
  return out;
}

json footprints_to_json(const std::string& cohort_id, std::span<const session::DigitalFootprint> footprints) {
  json list = json::array();
  for (const auto& fp : footprints) list.push_back(session::to_json(fp));
  return {{"version", kFootprintFileVersion}, {"cohort", cohort_id}, {"footprints", std::move(list)}};
}

std::vector<session::DigitalFootprint> footprints_from_json(const json& doc) {
  require_version(doc, kFootprintFileVersion, "footprint file");
  const auto list = require_field<json>(doc, "footprints", "footprint file");
  if (!list.is_array()) throw Error(ErrorCode::Schema, "footprint file: 'footprints' must be an array");
  std::vector<session::DigitalFootprint> out;
  for (const auto& j : list) {
    out.push_back(session::footprint_from_json(j));
    session::validate_footprint(out.back());
  }
  return out;
}

}  // namespace fraudaware::analytics

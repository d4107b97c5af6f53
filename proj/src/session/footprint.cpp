#include "fraudaware/session/footprint.hpp"

#include <algorithm>
#include <cmath>

#include "fraudaware/error.hpp"

namespace fraudaware::session {

using simkit::Authenticity;
using simkit::Sentiment;
using simkit::SourceTrust;

std::optional<Metric> metric_from_name(std::string_view n) {
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    if (kMetricNames[i] == n) return metric_at(i);
  }
  return std::nullopt;
}

bool is_count(Metric m) { return name(m).starts_with("n_"); }
bool is_duration(Metric m) { return name(m).starts_with("t_"); }

void validate_footprint(const DigitalFootprint& fp) {
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    const double v = fp.metrics[i];
    const auto n = std::string(kMetricNames[i]);
    if (!std::isfinite(v)) throw Error(ErrorCode::Schema, "footprint field '" + n + "' is not finite");
    if (v < 0.0) throw Error(ErrorCode::Schema, "footprint field '" + n + "' is negative");
    if (is_count(metric_at(i)) && v != std::floor(v)) {
      throw Error(ErrorCode::Schema, "footprint field '" + n + "' must be an integer count");
    }
  }
  if (fp[Metric::ArticlesRead] != fp[Metric::UntrustedRead] + fp[Metric::TrustedRead]) {
    throw Error(ErrorCode::Schema, "footprint: n_articles_read != n_untrusted_read + n_trusted_read");
  }
  if (fp[Metric::Transactions] < fp[Metric::FakeBought] + fp[Metric::FraudBought] + fp[Metric::RealBought]) {
    throw Error(ErrorCode::Schema, "footprint: n_transactions smaller than the number of buys");
  }
}

json to_json(const DigitalFootprint& fp) {
  json metrics = json::object();
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    const auto m = metric_at(i);
    if (is_count(m)) {
      metrics[std::string(kMetricNames[i])] = static_cast<std::int64_t>(fp.metrics[i]);
    } else {
      metrics[std::string(kMetricNames[i])] = fp.metrics[i];
    }
  }
  json j = {{"session", fp.session_id}, {"metrics", std::move(metrics)}};
  j["label"] = fp.label ? json(fp.label->to_string()) : json(nullptr);
  return j;
}

DigitalFootprint footprint_from_json(const json& doc) {
  DigitalFootprint fp;
  fp.session_id = doc.value("session", "");
  const json& metrics = doc.contains("metrics") ? doc.at("metrics") : doc;
  for (std::size_t i = 0; i < kMetricCount; ++i) {
    fp.metrics[i] = require_field<double>(metrics, kMetricNames[i], "footprint");
  }
  if (doc.contains("label") && !doc.at("label").is_null()) {
    fp.label = InvestorType::parse(doc.at("label").get<std::string>());
  }
  return fp;
}

// ---- accumulator ------------------------------------------------------------------

FootprintAccumulator::FootprintAccumulator(double user_age, std::string session_id, FoldOptions options)
    : options_(options) {
  footprint_.session_id = std::move(session_id);
  footprint_[Metric::Age] = user_age;
}

double FootprintAccumulator::dwell(const OpenInterval& open, const SessionEvent& close) const {
  const double raw = close.duration ? *close.duration : close.wall_time - open.wall_time;
  return std::clamp(raw, 0.0, options_.max_dwell_seconds);
}

void FootprintAccumulator::apply(const SessionEvent& e) {
  validate_event(e);
  auto& fp = footprint_;
  switch (e.kind) {
    case EventKind::PageEnter:
      pages_.push_back({e.seq, e.wall_time, *e.page, e.stock_id, e.authenticity, std::nullopt});
      break;
    case EventKind::PageLeave: {
      if (pages_.empty() || pages_.back().page != *e.page || pages_.back().key != e.stock_id) {
        throw TelemetryError("PageLeave " + std::to_string(e.seq) + " does not match the open page", {e.seq});
      }
      const auto open = pages_.back();
      pages_.pop_back();
      const double d = dwell(open, e);
      switch (open.page) {
        case PageKind::Market: fp[Metric::MarketPageTime] += d; break;
        case PageKind::Portfolio: fp[Metric::PortfolioPageTime] += d; break;
        case PageKind::News: fp[Metric::NewsPageTime] += d; break;
        case PageKind::StockDetail:
          switch (*open.authenticity) {
            case Authenticity::Fraud: fp[Metric::FraudStockPageTime] += d; break;
            case Authenticity::Real: fp[Metric::RealStockPageTime] += d; break;
            case Authenticity::Fake: fp[Metric::FakeStockPageTime] += d; break;
          }
          break;
        case PageKind::Analytics:
        case PageKind::Chat:
          break;  // logged, not part of the footprint
      }
      break;
    }
    case EventKind::ReadArticleStart:
      reads_.push_back({e.seq, e.wall_time, PageKind::News, e.article_id, std::nullopt, e.sentiment});
      break;
    case EventKind::ReadArticleEnd: {
      if (reads_.empty() || reads_.back().key != e.article_id) {
        throw TelemetryError("ReadArticleEnd " + std::to_string(e.seq) + " does not match the open article", {e.seq});
      }
      const auto open = reads_.back();
      reads_.pop_back();
      const double d = dwell(open, e);
      if (*open.sentiment == Sentiment::Positive) fp[Metric::PositiveNewsReadTime] += d;
      if (*open.sentiment == Sentiment::Neutral) fp[Metric::NeutralNewsReadTime] += d;
      fp[Metric::ArticlesRead] += 1;
      fp[*e.source_trust == SourceTrust::Trusted ? Metric::TrustedRead : Metric::UntrustedRead] += 1;
      break;
    }
    case EventKind::Buy:
      fp[Metric::Transactions] += 1;
      switch (*e.authenticity) {
        case Authenticity::Fraud: fp[Metric::FraudBought] += 1; break;
        case Authenticity::Real: fp[Metric::RealBought] += 1; break;
        case Authenticity::Fake: fp[Metric::FakeBought] += 1; break;
      }
      break;
    case EventKind::Sell:
      fp[Metric::Transactions] += 1;
      break;
    case EventKind::ReportFraud:
      fp[Metric::FraudsReported] += 1;
      break;
    case EventKind::ChatReply:
      break;
  }
  ++applied_;
}

std::vector<std::uint64_t> FootprintAccumulator::open_event_ids() const {
  std::vector<std::uint64_t> ids;
  for (const auto& o : pages_) ids.push_back(o.seq);
  for (const auto& o : reads_) ids.push_back(o.seq);
  std::sort(ids.begin(), ids.end());
  return ids;
}

DigitalFootprint fold_footprint(std::span<const SessionEvent> events, double user_age, FoldOptions options) {
  FootprintAccumulator acc(user_age, events.empty() ? std::string{} : events.front().session_id, options);
  std::vector<std::uint64_t> orphans;
  for (const auto& e : events) {
    try {
      acc.apply(e);
    } catch (const TelemetryError&) {
      orphans.push_back(e.seq);
    }
  }
  for (auto id : acc.open_event_ids()) orphans.push_back(id);
  if (!orphans.empty()) {
    std::sort(orphans.begin(), orphans.end());
    std::string ids;
    for (auto id : orphans) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
    throw TelemetryError("unmatched Start/End events: " + ids, std::move(orphans));
  }
  return acc.snapshot();
}

}  // namespace fraudaware::session

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraudaware/investor_type.hpp"
#include "fraudaware/io.hpp"
#include "fraudaware/session/event.hpp"

namespace fraudaware::session {

/// The seventeen recorded metrics, in their canonical column order.
enum class Metric : std::size_t {
  Age,
  FraudStockPageTime,
  RealStockPageTime,
  FakeStockPageTime,
  MarketPageTime,
  PortfolioPageTime,
  NewsPageTime,
  PositiveNewsReadTime,
  NeutralNewsReadTime,
  FakeBought,
  FraudBought,
  RealBought,
  FraudsReported,
  ArticlesRead,
  Transactions,
  UntrustedRead,
  TrustedRead,
};

inline constexpr std::size_t kMetricCount = 17;

inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "age",
    "t_fraud_stock_page",
    "t_real_stock_page",
    "t_fake_stock_page",
    "t_market_page",
    "t_portfolio_page",
    "t_news_page",
    "t_read_positive_news",
    "t_read_neutral_news",
    "n_fake_bought",
    "n_fraud_bought",
    "n_real_bought",
    "n_frauds_reported",
    "n_articles_read",
    "n_transactions",
    "n_untrusted_read",
    "n_trusted_read",
};

constexpr std::size_t index(Metric m) { return static_cast<std::size_t>(m); }
constexpr std::string_view name(Metric m) { return kMetricNames[index(m)]; }
constexpr Metric metric_at(std::size_t i) { return static_cast<Metric>(i); }
std::optional<Metric> metric_from_name(std::string_view name);
/// Counts (n_*) are integers; durations (t_*) are seconds; age is years.
bool is_count(Metric m);
bool is_duration(Metric m);

struct DigitalFootprint {
  std::string session_id;
  std::array<double, kMetricCount> metrics{};
  std::optional<InvestorType> label;

  double& operator[](Metric m) { return metrics[index(m)]; }
  double operator[](Metric m) const { return metrics[index(m)]; }

  bool operator==(const DigitalFootprint&) const = default;
};

/// Throws Schema naming the first field that is non-finite, negative, or
/// a non-integral count, or when a consistency invariant is broken.
void validate_footprint(const DigitalFootprint& fp);

json to_json(const DigitalFootprint& fp);
/// Every metric must be present; a missing one is a Schema error naming it.
DigitalFootprint footprint_from_json(const json& doc);

struct FoldOptions {
  double max_dwell_seconds = 1800.0;  // per page visit or article read
};

/// Incremental footprint fold. Open Start/Enter events are carried across
/// apply() calls, so folding a prefix and then the suffix equals folding the
/// whole log. Intervals still open are not counted by snapshot().
class FootprintAccumulator {
 public:
  explicit FootprintAccumulator(double user_age, std::string session_id = {}, FoldOptions options = {});

  /// Throws TelemetryError (state unchanged) when an End/Leave does not
  /// match the latest open Start/Enter, or Validation on a malformed payload.
  void apply(const SessionEvent& event);

  DigitalFootprint snapshot() const { return footprint_; }
  /// seq of every Start/Enter still open.
  std::vector<std::uint64_t> open_event_ids() const;
  std::size_t applied() const { return applied_; }

 private:
  struct OpenInterval {
    std::uint64_t seq;
    double wall_time;
    PageKind page;
    std::string key;  // stock id for pages, article id for reads
    std::optional<simkit::Authenticity> authenticity;
    std::optional<simkit::Sentiment> sentiment;
  };

  double dwell(const OpenInterval& open, const SessionEvent& close) const;

  FoldOptions options_;
  DigitalFootprint footprint_;
  std::vector<OpenInterval> pages_;
  std::vector<OpenInterval> reads_;
  std::size_t applied_ = 0;
};

/// Strict fold over a complete log: unmatched Ends and Starts left open at
/// the end both raise one TelemetryError listing every orphan's seq.
DigitalFootprint fold_footprint(std::span<const SessionEvent> events, double user_age, FoldOptions options = {});

}  // namespace fraudaware::session

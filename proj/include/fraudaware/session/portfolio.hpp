#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "fraudaware/io.hpp"
#include "fraudaware/money.hpp"
#include "fraudaware/session/event.hpp"
#include "fraudaware/simkit/scenario.hpp"

namespace fraudaware::session {

enum class Side { Buy, Sell };

struct Position {
  std::int64_t shares = 0;
  Money cost_basis;  // total paid for the shares still held

  bool operator==(const Position&) const = default;
};

/// Progression arithmetic. Defaults are ours; all of it is configurable.
struct XpRules {
  std::int64_t correct_report = 50;
  std::int64_t false_report = -10;
  std::int64_t profitable_sell = 10;
  std::int64_t xp_per_level = 500;
};

int level_for_xp(std::int64_t xp, const XpRules& rules = {});

struct Portfolio {
  Money cash;
  std::map<std::string, Position> positions;
  std::int64_t xp = 0;
  int level = 1;

  static Portfolio initial(Money cash, std::int64_t xp, const XpRules& rules = {});

  std::int64_t shares_of(const std::string& stock_id) const;
  /// cash + sum(shares * price at tick); delisted fakes are worth 0.
  Money value_at(const simkit::Scenario& scenario, int tick) const;

  bool operator==(const Portfolio&) const = default;
};

struct TradeResult {
  Portfolio portfolio;
  SessionEvent event;  // Buy/Sell with payload filled; seq/session/wall_time left to the caller
};

/// Zero-fee market order at the stock's price for `tick`.
/// Errors: Validation (shares < 1), StockDelisted, InsufficientFunds, InsufficientShares.
TradeResult execute_trade(const Portfolio& portfolio, const simkit::Stock& stock, Side side, std::int64_t shares,
                          int tick);

/// XP for a validated event: ReportFraud on Fraud/Fake +correct_report, on
/// Real +false_report (floored at 0); a Sell with positive realized P&L
/// earns profitable_sell. Other kinds leave the portfolio unchanged.
Portfolio award_xp(const Portfolio& portfolio, const SessionEvent& event, const simkit::Scenario& scenario,
                   const XpRules& rules = {});

/// Applies one logged event: trades from their payload (price, shares), then award_xp.
Portfolio apply_event(const Portfolio& portfolio, const SessionEvent& event, const simkit::Scenario& scenario,
                      const XpRules& rules = {});

Portfolio replay_portfolio(std::span<const SessionEvent> events, const simkit::Scenario& scenario,
                           const XpRules& rules = {});

json to_json(const Portfolio& portfolio);

}  // namespace fraudaware::session

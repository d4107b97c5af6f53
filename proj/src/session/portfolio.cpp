#include "fraudaware/session/portfolio.hpp"

#include <algorithm>

#include "fraudaware/error.hpp"

namespace fraudaware::session {

using simkit::Authenticity;

int level_for_xp(std::int64_t xp, const XpRules& rules) {
  return 1 + static_cast<int>(std::max<std::int64_t>(0, xp) / rules.xp_per_level);
}

Portfolio Portfolio::initial(Money cash, std::int64_t xp, const XpRules& rules) {
  Portfolio p;
  p.cash = cash;
  p.xp = xp;
  p.level = level_for_xp(xp, rules);
  return p;
}

std::int64_t Portfolio::shares_of(const std::string& stock_id) const {
  auto it = positions.find(stock_id);
  return it == positions.end() ? 0 : it->second.shares;
}

Money Portfolio::value_at(const simkit::Scenario& scenario, int tick) const {
  Money total = cash;
  for (const auto& [id, pos] : positions) {
    const auto* stock = scenario.find_stock(id);
    if (!stock) throw Error(ErrorCode::NotFound, "portfolio holds unknown stock " + id);
    total += stock->price_at(tick) * pos.shares;
  }
  return total;
}

namespace {

// Moves `shares` at `price` between cash and the position. Cost basis
// leaves proportionally on a sell; a full exit takes the remainder.
Portfolio settle(const Portfolio& in, const std::string& stock_id, Side side, std::int64_t shares, Money price,
                 Money* realized) {
  Portfolio out = in;
  const Money notional = price * shares;
  auto& pos = out.positions[stock_id];
  if (side == Side::Buy) {
    out.cash -= notional;
    pos.shares += shares;
    pos.cost_basis += notional;
  } else {
    const std::int64_t held = pos.shares;
    const Money cost_out = shares == held ? pos.cost_basis
                                          : Money::from_cents(pos.cost_basis.cents() * shares / held);
    out.cash += notional;
    pos.shares -= shares;
    pos.cost_basis -= cost_out;
    if (realized) *realized = notional - cost_out;
  }
  if (pos.shares == 0) out.positions.erase(stock_id);
  return out;
}

}  // namespace

TradeResult execute_trade(const Portfolio& portfolio, const simkit::Stock& stock, Side side, std::int64_t shares,
                          int tick) {
  if (shares < 1) throw Error(ErrorCode::Validation, "trade needs at least one share");
  if (stock.delisted_at(tick)) throw Error(ErrorCode::StockDelisted, stock.id + " has been delisted");
  const Money price = stock.price_at(tick);
  if (side == Side::Buy && portfolio.cash < price * shares) {
    throw Error(ErrorCode::InsufficientFunds, "buying " + std::to_string(shares) + " " + stock.id + " needs " +
                                                  (price * shares).to_string() + ", cash is " +
                                                  portfolio.cash.to_string());
  }
  if (side == Side::Sell && portfolio.shares_of(stock.id) < shares) {
    throw Error(ErrorCode::InsufficientShares, "holding " + std::to_string(portfolio.shares_of(stock.id)) + " " +
                                                   stock.id + ", cannot sell " + std::to_string(shares));
  }

  TradeResult result;
  Money realized;
  result.portfolio = settle(portfolio, stock.id, side, shares, price, &realized);
  auto& ev = result.event;
  ev.kind = side == Side::Buy ? EventKind::Buy : EventKind::Sell;
  ev.tick = tick;
  ev.stock_id = stock.id;
  ev.authenticity = stock.authenticity;
  ev.shares = shares;
  ev.price = price;
  if (side == Side::Sell) ev.realized_pnl = realized;
  return result;
}

Portfolio award_xp(const Portfolio& portfolio, const SessionEvent& event, const simkit::Scenario& scenario,
                   const XpRules& rules) {
  std::int64_t delta = 0;
  if (event.kind == EventKind::ReportFraud) {
    const auto* stock = scenario.find_stock(event.stock_id);
    if (!stock) throw Error(ErrorCode::NotFound, "report on unknown stock " + event.stock_id);
    delta = stock->authenticity == Authenticity::Real ? rules.false_report : rules.correct_report;
  } else if (event.kind == EventKind::Sell && event.realized_pnl > Money{}) {
    delta = rules.profitable_sell;
  } else {
    return portfolio;
  }
  Portfolio out = portfolio;
  out.xp = std::max<std::int64_t>(0, out.xp + delta);
  out.level = level_for_xp(out.xp, rules);
  return out;
}

Portfolio apply_event(const Portfolio& portfolio, const SessionEvent& event, const simkit::Scenario& scenario,
                      const XpRules& rules) {
  Portfolio out = portfolio;
  if (event.kind == EventKind::Buy || event.kind == EventKind::Sell) {
    out = settle(out, event.stock_id, event.kind == EventKind::Buy ? Side::Buy : Side::Sell, event.shares,
                 event.price, nullptr);
  }
  return award_xp(out, event, scenario, rules);
}

Portfolio replay_portfolio(std::span<const SessionEvent> events, const simkit::Scenario& scenario,
                           const XpRules& rules) {
  Portfolio p = Portfolio::initial(scenario.initial_cash, scenario.initial_xp, rules);
  for (const auto& e : events) p = apply_event(p, e, scenario, rules);
  return p;
}

json to_json(const Portfolio& p) {
  json positions = json::array();
  for (const auto& [id, pos] : p.positions) {
    positions.push_back({{"stock", id}, {"shares", pos.shares}, {"cost_basis", pos.cost_basis.to_string()}});
  }
  return {{"cash", p.cash.to_string()}, {"xp", p.xp}, {"level", p.level}, {"positions", std::move(positions)}};
}

}  // namespace fraudaware::session

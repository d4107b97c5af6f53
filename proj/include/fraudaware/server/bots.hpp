#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/personalize/feedback.hpp"
#include "fraudaware/server/service.hpp"

namespace fraudaware::server {

enum class BotArchetype { NoviceBot, ExperiencedBot };

std::string_view to_string(BotArchetype a);
BotArchetype parse_bot_archetype(std::string_view s);

/// Normal draw clamped below at `floor`.
struct Spread {
  double mean = 0;
  double spread = 0;
  double floor = 0;
};

/// Named outcomes with probabilities summing to 1.
using ChoiceTable = std::vector<std::pair<std::string, double>>;

struct StockReaction {
  ChoiceTable choice;  // outcomes: buy, report, leave
};

struct BotPolicy {
  BotArchetype archetype = BotArchetype::NoviceBot;
  Spread age;
  int actions_per_tick = 1;
  ChoiceTable action;       // market, stock, news, portfolio, chat, idle
  ChoiceTable stock_pick;   // Real, Fraud, Fake: which kind of listing draws the bot in
  StockReaction on_real;
  StockReaction on_fraud;
  StockReaction on_fake;
  ChoiceTable read;         // per read slot on the news page: untrusted, trusted, none
  int reads_per_visit = 2;
  ChoiceTable portfolio;    // sell, hold
  ChoiceTable chat;         // reply, ignore
  Spread dwell_market;
  Spread dwell_stock;
  Spread dwell_news;
  Spread dwell_portfolio;
  Spread dwell_chat;
  Spread read_time;
  double buy_budget = 0.1;  // fraction of cash spent per purchase
};

inline constexpr int kBotPolicyVersion = 1;

/// Throws Config when a table does not sum to 1 (within 1e-9), holds a
/// negative weight or an unknown outcome, or a count is negative.
void validate(const BotPolicy& policy);

json to_json(const BotPolicy& policy);
BotPolicy bot_policy_from_json(const json& doc);

struct BotPolicies {
  BotPolicy novice;
  BotPolicy experienced;

  const BotPolicy& get(BotArchetype a) const { return a == BotArchetype::NoviceBot ? novice : experienced; }
};

BotPolicies bot_policies_from_json(const json& doc);
BotPolicies default_bot_policies();

struct BotRun {
  std::string session_id;
  std::vector<session::SessionEvent> events;
  session::DigitalFootprint footprint;  // as the server reports it
  session::Portfolio portfolio;
  std::size_t rejected_trades = 0;  // refused by the server and skipped
  std::optional<personalize::FeedbackBundle> feedback;
};

/// Plays a full-horizon session through the service calls the HTTP API
/// uses. (policy, seed, scenario) fixes the event log.
BotRun run_bot_session(Service& service, const BotPolicy& policy, std::uint64_t seed);

}  // namespace fraudaware::server

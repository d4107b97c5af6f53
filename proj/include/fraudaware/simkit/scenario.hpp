#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/money.hpp"
#include "fraudaware/simkit/price_process.hpp"

namespace fraudaware::simkit {

enum class Authenticity { Real, Fraud, Fake };
enum class Sentiment { Positive, Negative, Neutral };
enum class SourceTrust { Trusted, Untrusted };
enum class ScamTag { PennyStockPumpAndDump, PyramidScheme };
enum class ChatAuthor { Mascot, Recruiter, User };
enum class Difficulty { Easy, Medium, Hard };

std::string_view to_string(Authenticity v);
std::string_view to_string(Sentiment v);
std::string_view to_string(SourceTrust v);
std::string_view to_string(ScamTag v);
std::string_view to_string(ChatAuthor v);
std::string_view to_string(Difficulty v);

Authenticity parse_authenticity(std::string_view s);
Sentiment parse_sentiment(std::string_view s);
SourceTrust parse_source_trust(std::string_view s);
ScamTag parse_scam_tag(std::string_view s);
ChatAuthor parse_chat_author(std::string_view s);
Difficulty parse_difficulty(std::string_view s);

struct PricePoint {
  int tick = 0;
  Money price;

  bool operator==(const PricePoint&) const = default;
};

struct Stock {
  std::string id;
  std::string ticker;
  std::string name;
  Authenticity authenticity = Authenticity::Real;
  std::string sector;
  std::vector<PricePoint> price_history;
  std::int64_t float_shares = 0;
  std::optional<int> delist_tick;  // Fake stocks only
  PriceProcessParams process;

  /// Price at `tick`; ticks past the end of the history hold the last price.
  Money price_at(int tick) const;
  bool delisted_at(int tick) const;

  bool operator==(const Stock&) const = default;
};

struct NewsArticle {
  std::string id;
  std::string stock_id;
  std::string headline;
  std::string body;
  Sentiment sentiment = Sentiment::Neutral;
  SourceTrust source_trust = SourceTrust::Trusted;
  int publish_tick = 0;
  std::optional<ScamTag> trap_tag;

  bool operator==(const NewsArticle&) const = default;
};

struct ChatMessage {
  std::string id;
  ChatAuthor author = ChatAuthor::Mascot;
  std::string text;
  std::optional<ScamTag> trap_tag;
  std::vector<std::string> reply_options;
  int publish_tick = 0;

  bool operator==(const ChatMessage&) const = default;
};

/// One stock row of the scenario config.
struct StockSpec {
  std::string id;
  std::string ticker;
  std::string name;
  std::string sector;
  Authenticity authenticity = Authenticity::Real;
  double initial_price = 10.0;
  std::int64_t float_shares = 1'000'000;
  PriceProcessParams process;  // seed is derived per stock at generation time
  std::optional<int> delist_tick;
};

/// Parsed scenario config document (see docs/formats.md).
struct ScenarioConfig {
  std::string name;
  int horizon = 52;
  Money initial_cash = Money::from_cents(2'000'000);
  std::int64_t initial_xp = 100;
  Difficulty difficulty = Difficulty::Medium;
  std::vector<StockSpec> stocks;
  std::vector<NewsArticle> articles;
  std::vector<ChatMessage> chat_script;
};

struct Scenario {
  std::string id;
  std::uint64_t seed = 0;
  int horizon = 52;
  Difficulty difficulty = Difficulty::Medium;
  std::vector<Stock> stocks;
  std::vector<NewsArticle> articles;
  std::vector<ChatMessage> chat_script;
  Money initial_cash;
  std::int64_t initial_xp = 0;

  const Stock* find_stock(std::string_view id) const;
  const NewsArticle* find_article(std::string_view id) const;

  bool operator==(const Scenario&) const = default;
};

ScenarioConfig parse_scenario_config(const json& doc);
ScenarioConfig load_scenario_config(const std::filesystem::path& path);
/// The shipped default: ten stocks, four of them pump-and-dump frauds.
ScenarioConfig default_scenario_config();

/// Throws Config when the config cannot produce a valid scenario (no
/// stocks, fraud phases not fitting the horizon, missing news coverage).
void validate_scenario_config(const ScenarioConfig& config);

/// Materializes all price histories, the news schedule and the chat
/// script. Pure function of (config, seed).
Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Zeroes a Fake stock's prices from `tick` onward. Throws
/// ContractViolation for non-Fake stocks or ticks before its delist tick.
Stock delist_fake(const Stock& stock, int tick);

json to_json(const Scenario& scenario);

}  // namespace fraudaware::simkit

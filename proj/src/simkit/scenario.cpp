#include "fraudaware/simkit/scenario.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "fraudaware/defaults.hpp"
#include "fraudaware/error.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::simkit {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& values, std::string_view what) {
  for (E v : values) {
    if (to_string(v) == s) return v;
  }
  throw Error(ErrorCode::Schema, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

Money money_field(const json& obj, std::string_view key, std::string_view what) {
  const std::string k(key);
  if (!obj.contains(k)) throw Error(ErrorCode::Schema, std::string(what) + ": missing field '" + k + "'");
  const auto& v = obj.at(k);
  if (v.is_string()) return Money::parse(v.get<std::string>());
  if (v.is_number()) return Money::from_units(v.get<double>());
  throw Error(ErrorCode::Schema, std::string(what) + ": field '" + k + "' is not a currency amount");
}

std::optional<ScamTag> optional_trap(const json& obj) {
  if (!obj.contains("trap") || obj.at("trap").is_null()) return std::nullopt;
  return parse_scam_tag(obj.at("trap").get<std::string>());
}

StockSpec parse_stock(const json& j, int horizon) {
  StockSpec s;
  const std::string what = "scenario stock";
  s.id = require_field<std::string>(j, "id", what);
  s.ticker = j.value("ticker", s.id);
  s.name = j.value("name", s.id);
  s.sector = j.value("sector", "");
  s.authenticity = parse_authenticity(require_field<std::string>(j, "authenticity", what));
  s.initial_price = money_field(j, "initial_price", what).units();
  s.float_shares = j.value("float_shares", std::int64_t{1'000'000});
  if (j.contains("delist_tick")) s.delist_tick = j.at("delist_tick").get<int>();
  const json process = j.value("process", json::object());
  s.process.drift = process.value("drift", 0.0);
  s.process.volatility = process.value("volatility", 0.0);
  s.process.pump_start = process.value("pump_start", 1);
  s.process.pump_len = process.value("pump_len", 1);
  s.process.dump_len = process.value("dump_len", 1);
  s.process.pump_multiple = process.value("pump_multiple", 3.0);
  s.process.crash_floor = process.value("crash_floor", 0.2);
  s.process.horizon = horizon;
  return s;
}

NewsArticle parse_article(const json& j) {
  const std::string what = "scenario article";
  NewsArticle a;
  a.id = require_field<std::string>(j, "id", what);
  a.stock_id = require_field<std::string>(j, "stock", what);
  a.headline = require_field<std::string>(j, "headline", what);
  a.body = j.value("body", "");
  a.sentiment = parse_sentiment(require_field<std::string>(j, "sentiment", what));
  a.source_trust = parse_source_trust(require_field<std::string>(j, "source", what));
  a.publish_tick = require_field<int>(j, "publish_tick", what);
  a.trap_tag = optional_trap(j);
  return a;
}

ChatMessage parse_chat(const json& j) {
  const std::string what = "scenario chat message";
  ChatMessage m;
  m.id = require_field<std::string>(j, "id", what);
  m.author = parse_chat_author(require_field<std::string>(j, "author", what));
  m.text = require_field<std::string>(j, "text", what);
  m.trap_tag = optional_trap(j);
  m.reply_options = j.value("reply_options", std::vector<std::string>{});
  m.publish_tick = j.value("publish_tick", 0);
  return m;
}

json optional_trap_json(const std::optional<ScamTag>& tag) {
  return tag ? json(std::string(to_string(*tag))) : json(nullptr);
}

}  // namespace

// ---- enum text ---------------------------------------------------------------

std::string_view to_string(Authenticity v) {
  switch (v) {
    case Authenticity::Real: return "Real";
    case Authenticity::Fraud: return "Fraud";
    case Authenticity::Fake: return "Fake";
  }
  return "?";
}
std::string_view to_string(Sentiment v) {
  switch (v) {
    case Sentiment::Positive: return "Positive";
    case Sentiment::Negative: return "Negative";
    case Sentiment::Neutral: return "Neutral";
  }
  return "?";
}
std::string_view to_string(SourceTrust v) { return v == SourceTrust::Trusted ? "Trusted" : "Untrusted"; }
std::string_view to_string(ScamTag v) {
  return v == ScamTag::PennyStockPumpAndDump ? "PennyStockPumpAndDump" : "PyramidScheme";
}
std::string_view to_string(ChatAuthor v) {
  switch (v) {
    case ChatAuthor::Mascot: return "Mascot";
    case ChatAuthor::Recruiter: return "Recruiter";
    case ChatAuthor::User: return "User";
  }
  return "?";
}
std::string_view to_string(Difficulty v) {
  switch (v) {
    case Difficulty::Easy: return "Easy";
    case Difficulty::Medium: return "Medium";
    case Difficulty::Hard: return "Hard";
  }
  return "?";
}

Authenticity parse_authenticity(std::string_view s) {
  return parse_enum(s, std::array{Authenticity::Real, Authenticity::Fraud, Authenticity::Fake}, "authenticity");
}
Sentiment parse_sentiment(std::string_view s) {
  return parse_enum(s, std::array{Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral}, "sentiment");
}
SourceTrust parse_source_trust(std::string_view s) {
  return parse_enum(s, std::array{SourceTrust::Trusted, SourceTrust::Untrusted}, "source trust");
}
ScamTag parse_scam_tag(std::string_view s) {
  return parse_enum(s, std::array{ScamTag::PennyStockPumpAndDump, ScamTag::PyramidScheme}, "scam tag");
}
ChatAuthor parse_chat_author(std::string_view s) {
  return parse_enum(s, std::array{ChatAuthor::Mascot, ChatAuthor::Recruiter, ChatAuthor::User}, "chat author");
}
Difficulty parse_difficulty(std::string_view s) {
  return parse_enum(s, std::array{Difficulty::Easy, Difficulty::Medium, Difficulty::Hard}, "difficulty");
}

// ---- Stock / Scenario lookups -------------------------------------------------

Money Stock::price_at(int tick) const {
  if (price_history.empty()) throw Error(ErrorCode::Domain, "stock " + id + " has no price history");
  if (tick < 0) throw Error(ErrorCode::Domain, "negative tick");
  const auto idx = std::min<std::size_t>(static_cast<std::size_t>(tick), price_history.size() - 1);
  return price_history[idx].price;
}

bool Stock::delisted_at(int tick) const {
  return authenticity == Authenticity::Fake && delist_tick && tick >= *delist_tick;
}

const Stock* Scenario::find_stock(std::string_view id) const {
  auto it = std::find_if(stocks.begin(), stocks.end(), [&](const Stock& s) { return s.id == id; });
  return it == stocks.end() ? nullptr : &*it;
}

const NewsArticle* Scenario::find_article(std::string_view id) const {
  auto it = std::find_if(articles.begin(), articles.end(), [&](const NewsArticle& a) { return a.id == id; });
  return it == articles.end() ? nullptr : &*it;
}

// ---- config ------------------------------------------------------------------

ScenarioConfig parse_scenario_config(const json& doc) {
  require_version(doc, 1, "scenario config");
  ScenarioConfig c;
  c.name = doc.value("name", "scenario");
  c.horizon = doc.value("horizon", 52);
  if (doc.contains("initial_cash")) c.initial_cash = money_field(doc, "initial_cash", "scenario config");
  c.initial_xp = doc.value("initial_xp", std::int64_t{100});
  c.difficulty = parse_difficulty(doc.value("difficulty", "Medium"));
  for (const auto& s : doc.value("stocks", json::array())) c.stocks.push_back(parse_stock(s, c.horizon));
  for (const auto& a : doc.value("articles", json::array())) c.articles.push_back(parse_article(a));
  for (const auto& m : doc.value("chat", json::array())) c.chat_script.push_back(parse_chat(m));
  return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  return parse_scenario_config(load_json_file(path));
}

ScenarioConfig default_scenario_config() {
  return parse_scenario_config(parse_json(defaults::scenario_json(), "default scenario"));
}

void validate_scenario_config(const ScenarioConfig& c) {
  auto fail = [](const std::string& msg) { return Error(ErrorCode::Config, "scenario config: " + msg); };
  if (c.stocks.empty()) throw fail("at least one stock is required");
  if (c.horizon < 2) throw fail("horizon must be >= 2");
  if (c.initial_cash < Money{}) throw fail("initial_cash must be >= 0");
  if (c.initial_xp < 0) throw fail("initial_xp must be >= 0");

  std::set<std::string> ids;
  for (const auto& s : c.stocks) {
    if (!ids.insert(s.id).second) throw fail("duplicate stock id " + s.id);
    if (!(s.initial_price > 0.0)) throw fail("stock " + s.id + ": initial_price must be > 0");
    if (s.process.volatility < 0.0) throw fail("stock " + s.id + ": volatility must be >= 0");
    if (s.authenticity == Authenticity::Fraud) {
      auto p = s.process;
      p.horizon = c.horizon;
      try {
        validate_fraud_params(p);
      } catch (const Error& e) {
        throw fail("stock " + s.id + ": " + e.what());
      }
    }
    if (s.authenticity == Authenticity::Fake) {
      if (!s.delist_tick) throw fail("fake stock " + s.id + " needs a delist_tick");
      if (*s.delist_tick < 1 || *s.delist_tick >= c.horizon) throw fail("stock " + s.id + ": delist_tick outside horizon");
    } else if (s.delist_tick) {
      throw fail("stock " + s.id + ": only Fake stocks can delist");
    }
  }

  std::set<std::string> article_ids;
  for (const auto& a : c.articles) {
    if (!article_ids.insert(a.id).second) throw fail("duplicate article id " + a.id);
    if (!ids.contains(a.stock_id)) throw fail("article " + a.id + " references unknown stock " + a.stock_id);
    if (a.publish_tick < 0 || a.publish_tick >= c.horizon) throw fail("article " + a.id + ": publish_tick outside horizon");
    if (a.trap_tag && a.source_trust != SourceTrust::Untrusted) throw fail("article " + a.id + ": only untrusted articles carry traps");
  }

  for (const auto& s : c.stocks) {
    const bool trusted = std::any_of(c.articles.begin(), c.articles.end(), [&](const NewsArticle& a) {
      return a.stock_id == s.id && a.source_trust == SourceTrust::Trusted;
    });
    if (!trusted) throw fail("stock " + s.id + " has no trusted article");
    if (s.authenticity == Authenticity::Fraud) {
      const int lo = s.process.pump_start;
      const int hi = s.process.pump_start + s.process.pump_len;
      const bool bait = std::any_of(c.articles.begin(), c.articles.end(), [&](const NewsArticle& a) {
        return a.stock_id == s.id && a.source_trust == SourceTrust::Untrusted && a.sentiment == Sentiment::Positive &&
               a.trap_tag == ScamTag::PennyStockPumpAndDump && a.publish_tick >= lo && a.publish_tick < hi;
      });
      if (!bait) throw fail("fraud stock " + s.id + " has no untrusted pump article inside its pump window");
    }
  }

  std::set<std::string> chat_ids;
  int recruiter = 0;
  for (const auto& m : c.chat_script) {
    if (!chat_ids.insert(m.id).second) throw fail("duplicate chat id " + m.id);
    if (m.author == ChatAuthor::Recruiter) {
      ++recruiter;
      if (m.trap_tag != ScamTag::PyramidScheme) throw fail("recruiter message " + m.id + " must carry PyramidScheme");
    }
  }
  if (recruiter < 3) throw fail("chat script needs at least 3 recruiter messages");
}

// ---- generation ----------------------------------------------------------------

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  validate_scenario_config(config);

  Scenario sc;
  sc.id = config.name + "-" + std::to_string(seed);
  sc.seed = seed;
  sc.horizon = config.horizon;
  sc.difficulty = config.difficulty;
  sc.initial_cash = config.initial_cash;
  sc.initial_xp = config.initial_xp;

  for (std::size_t i = 0; i < config.stocks.size(); ++i) {
    const auto& spec = config.stocks[i];
    Stock st;
    st.id = spec.id;
    st.ticker = spec.ticker;
    st.name = spec.name;
    st.sector = spec.sector;
    st.authenticity = spec.authenticity;
    st.float_shares = spec.float_shares;
    st.delist_tick = spec.delist_tick;
    st.process = spec.process;
    st.process.horizon = config.horizon;
    st.process.seed = mix_seed(seed, i);

    Money price = quantize_price(spec.initial_price, Rounding::Nearest);
    st.price_history.push_back({0, price});
    for (int t = 1; t < config.horizon; ++t) {
      const double prev = price.units();
      if (st.authenticity == Authenticity::Fraud) {
        // Rounding follows the phase direction so quantization cannot break
        // the pump target or the crash floor.
        Rounding r = Rounding::Nearest;
        switch (fraud_phase(st.process, t)) {
          case FraudPhase::Accumulation: r = Rounding::Nearest; break;
          case FraudPhase::Pump: r = Rounding::Up; break;
          case FraudPhase::Dump:
          case FraudPhase::Aftermath: r = Rounding::Down; break;
        }
        price = quantize_price(step_fraud_price(prev, st.process, t), r);
      } else {
        price = quantize_price(step_real_price(prev, st.process, t), Rounding::Nearest);
      }
      st.price_history.push_back({t, price});
    }
    if (st.authenticity == Authenticity::Fake) st = delist_fake(st, *st.delist_tick);
    sc.stocks.push_back(std::move(st));
  }

  sc.articles = config.articles;
  std::stable_sort(sc.articles.begin(), sc.articles.end(),
                   [](const NewsArticle& a, const NewsArticle& b) { return a.publish_tick < b.publish_tick; });
  sc.chat_script = config.chat_script;
  std::stable_sort(sc.chat_script.begin(), sc.chat_script.end(),
                   [](const ChatMessage& a, const ChatMessage& b) { return a.publish_tick < b.publish_tick; });
  return sc;
}

Stock delist_fake(const Stock& stock, int tick) {
  if (stock.authenticity != Authenticity::Fake) {
    throw Error(ErrorCode::ContractViolation, "delist_fake called on non-Fake stock " + stock.id);
  }
  if (!stock.delist_tick || tick < *stock.delist_tick) {
    throw Error(ErrorCode::ContractViolation, "delist_fake: tick precedes the configured delist tick of " + stock.id);
  }
  Stock out = stock;
  for (auto& p : out.price_history) {
    if (p.tick >= tick) p.price = Money{};
  }
  return out;
}

json to_json(const Scenario& sc) {
  json stocks = json::array();
  for (const auto& s : sc.stocks) {
    json history = json::array();
    for (const auto& p : s.price_history) history.push_back({{"tick", p.tick}, {"price", p.price.to_string()}});
    json js = {{"id", s.id},
               {"ticker", s.ticker},
               {"name", s.name},
               {"sector", s.sector},
               {"authenticity", to_string(s.authenticity)},
               {"float_shares", s.float_shares},
               {"price_history", std::move(history)}};
    js["delist_tick"] = s.delist_tick ? json(*s.delist_tick) : json(nullptr);
    stocks.push_back(std::move(js));
  }
  json articles = json::array();
  for (const auto& a : sc.articles) {
    articles.push_back({{"id", a.id},
                        {"stock", a.stock_id},
                        {"headline", a.headline},
                        {"body", a.body},
                        {"sentiment", to_string(a.sentiment)},
                        {"source", to_string(a.source_trust)},
                        {"publish_tick", a.publish_tick},
                        {"trap", optional_trap_json(a.trap_tag)}});
  }
  json chat = json::array();
  for (const auto& m : sc.chat_script) {
    chat.push_back({{"id", m.id},
                    {"author", to_string(m.author)},
                    {"text", m.text},
                    {"trap", optional_trap_json(m.trap_tag)},
                    {"reply_options", m.reply_options},
                    {"publish_tick", m.publish_tick}});
  }
  return {{"format", "fraudaware.scenario.materialized"},
          {"version", 1},
          {"id", sc.id},
          {"seed", sc.seed},
          {"horizon", sc.horizon},
          {"difficulty", to_string(sc.difficulty)},
          {"initial_cash", sc.initial_cash.to_string()},
          {"initial_xp", sc.initial_xp},
          {"stocks", std::move(stocks)},
          {"articles", std::move(articles)},
          {"chat", std::move(chat)}};
}

}  // namespace fraudaware::simkit

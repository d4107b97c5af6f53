#include "fraudaware/server/bots.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fraudaware/defaults.hpp"
#include "fraudaware/error.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::server {

using session::EventKind;
using session::PageKind;
using session::SessionEvent;
using simkit::Authenticity;

std::string_view to_string(BotArchetype a) { return a == BotArchetype::NoviceBot ? "NoviceBot" : "ExperiencedBot"; }

BotArchetype parse_bot_archetype(std::string_view s) {
  if (s == "NoviceBot") return BotArchetype::NoviceBot;
  if (s == "ExperiencedBot") return BotArchetype::ExperiencedBot;
  throw Error(ErrorCode::Config, "unknown bot archetype '" + std::string(s) + "'");
}

namespace {

void check_table(const ChoiceTable& t, std::set<std::string> allowed, const std::string& what) {
  if (t.empty()) throw Error(ErrorCode::Config, "bot policy: " + what + " is empty");
  double sum = 0;
  for (const auto& [name, p] : t) {
    if (!allowed.count(name)) throw Error(ErrorCode::Config, "bot policy: " + what + " has unknown outcome '" + name + "'");
    if (!(p >= 0)) throw Error(ErrorCode::Config, "bot policy: " + what + " has a negative weight");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::Config, "bot policy: " + what + " does not sum to 1");
}

void check_spread(const Spread& s, const std::string& what) {
  if (!std::isfinite(s.mean) || !(s.spread >= 0) || !(s.floor >= 0)) {
    throw Error(ErrorCode::Config, "bot policy: " + what + " needs finite mean, spread >= 0 and floor >= 0");
  }
}

json table_to_json(const ChoiceTable& t) {
  json out = json::object();
  for (const auto& [k, v] : t) out[k] = v;
  return out;
}

ChoiceTable table_from_json(const json& doc, const std::string& what) {
  if (!doc.is_object()) throw Error(ErrorCode::Config, "bot policy: " + what + " must be an object");
  ChoiceTable t;
  for (const auto& [k, v] : doc.items()) t.emplace_back(k, v.get<double>());
  return t;
}

json spread_to_json(const Spread& s) { return {{"mean", s.mean}, {"spread", s.spread}, {"floor", s.floor}}; }

Spread spread_from_json(const json& doc) {
  return {doc.at("mean").get<double>(), doc.at("spread").get<double>(), doc.value("floor", 0.0)};
}

const std::set<std::string> kReactions{"buy", "report", "leave"};

}  // namespace

void validate(const BotPolicy& p) {
  if (p.actions_per_tick < 0) throw Error(ErrorCode::Config, "bot policy: actions_per_tick must be >= 0");
  if (p.reads_per_visit < 0) throw Error(ErrorCode::Config, "bot policy: reads_per_visit must be >= 0");
  if (!(p.buy_budget > 0 && p.buy_budget <= 1)) throw Error(ErrorCode::Config, "bot policy: buy_budget must lie in (0, 1]");
  check_table(p.action, {"market", "stock", "news", "portfolio", "chat", "idle"}, "action");
  check_table(p.stock_pick, {"Real", "Fraud", "Fake"}, "stock_pick");
  check_table(p.on_real.choice, kReactions, "on_real");
  check_table(p.on_fraud.choice, kReactions, "on_fraud");
  check_table(p.on_fake.choice, kReactions, "on_fake");
  check_table(p.read, {"untrusted", "trusted", "none"}, "read");
  check_table(p.portfolio, {"sell", "hold"}, "portfolio");
  check_table(p.chat, {"reply", "ignore"}, "chat");
  check_spread(p.age, "age");
  check_spread(p.dwell_market, "dwell.market");
  check_spread(p.dwell_stock, "dwell.stock");
  check_spread(p.dwell_news, "dwell.news");
  check_spread(p.dwell_portfolio, "dwell.portfolio");
  check_spread(p.dwell_chat, "dwell.chat");
  check_spread(p.read_time, "read_time");
}

json to_json(const BotPolicy& p) {
  return {{"archetype", to_string(p.archetype)},
          {"age", spread_to_json(p.age)},
          {"actions_per_tick", p.actions_per_tick},
          {"action", table_to_json(p.action)},
          {"stock_pick", table_to_json(p.stock_pick)},
          {"on_stock",
           {{"Real", table_to_json(p.on_real.choice)},
            {"Fraud", table_to_json(p.on_fraud.choice)},
            {"Fake", table_to_json(p.on_fake.choice)}}},
          {"read", table_to_json(p.read)},
          {"reads_per_visit", p.reads_per_visit},
          {"portfolio", table_to_json(p.portfolio)},
          {"chat", table_to_json(p.chat)},
          {"dwell",
           {{"market", spread_to_json(p.dwell_market)},
            {"stock", spread_to_json(p.dwell_stock)},
            {"news", spread_to_json(p.dwell_news)},
            {"portfolio", spread_to_json(p.dwell_portfolio)},
            {"chat", spread_to_json(p.dwell_chat)}}},
          {"read_time", spread_to_json(p.read_time)},
          {"buy_budget", p.buy_budget}};
}

BotPolicy bot_policy_from_json(const json& doc) {
  BotPolicy p;
  try {
    p.archetype = parse_bot_archetype(doc.at("archetype").get<std::string>());
    p.age = spread_from_json(doc.at("age"));
    p.actions_per_tick = doc.at("actions_per_tick").get<int>();
    p.action = table_from_json(doc.at("action"), "action");
    p.stock_pick = table_from_json(doc.at("stock_pick"), "stock_pick");
    p.on_real.choice = table_from_json(doc.at("on_stock").at("Real"), "on_stock.Real");
    p.on_fraud.choice = table_from_json(doc.at("on_stock").at("Fraud"), "on_stock.Fraud");
    p.on_fake.choice = table_from_json(doc.at("on_stock").at("Fake"), "on_stock.Fake");
    p.read = table_from_json(doc.at("read"), "read");
    p.reads_per_visit = doc.at("reads_per_visit").get<int>();
    p.portfolio = table_from_json(doc.at("portfolio"), "portfolio");
    p.chat = table_from_json(doc.at("chat"), "chat");
    const auto& d = doc.at("dwell");
    p.dwell_market = spread_from_json(d.at("market"));
    p.dwell_stock = spread_from_json(d.at("stock"));
    p.dwell_news = spread_from_json(d.at("news"));
    p.dwell_portfolio = spread_from_json(d.at("portfolio"));
    p.dwell_chat = spread_from_json(d.at("chat"));
    p.read_time = spread_from_json(doc.at("read_time"));
    p.buy_budget = doc.at("buy_budget").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("bot policy: ") + e.what());
  }
  validate(p);
  return p;
}

BotPolicies bot_policies_from_json(const json& doc) {
  require_version(doc, kBotPolicyVersion, "bot policies");
  std::optional<BotPolicy> novice, experienced;
  for (const auto& entry : require_field<json>(doc, "policies", "bot policies")) {
    auto p = bot_policy_from_json(entry);
    (p.archetype == BotArchetype::NoviceBot ? novice : experienced) = std::move(p);
  }
  if (!novice || !experienced) throw Error(ErrorCode::Config, "bot policies: need one NoviceBot and one ExperiencedBot");
  return {*novice, *experienced};
}

BotPolicies default_bot_policies() {
  return bot_policies_from_json(parse_json(defaults::bot_policies_json(), "default bot policies"));
}

namespace {

class Bot {
 public:
  Bot(Service& service, const BotPolicy& policy, std::uint64_t seed)
      : service_(service), policy_(policy), rng_(mix_seed(seed, 0xb07)) {}

  BotRun run() {
    const double age = std::max(policy_.age.floor, std::round(draw(policy_.age)));
    const auto meta = service_.create_session(age);
    id_ = meta.id;
    const auto& sc = service_.scenario();
    for (int tick = meta.current_tick; tick < sc.horizon; ++tick) {
      tick_ = tick;
      for (int a = 0; a < policy_.actions_per_tick; ++a) act();
      service_.advance(id_, 1);
    }
    BotRun r;
    r.session_id = id_;
    r.events = service_.events(id_);
    r.footprint = service_.footprint(id_);
    r.portfolio = service_.portfolio(id_);
    r.rejected_trades = rejected_;
    if (service_.model()) r.feedback = service_.feedback(id_);
    return r;
  }

 private:
  double draw(const Spread& s) { return std::max(s.floor, s.mean + s.spread * rng_.normal()); }

  const std::string& pick(const ChoiceTable& t) {
    double u = rng_.uniform();
    for (const auto& entry : t) {
      if (u < entry.second) return entry.first;
      u -= entry.second;
    }
    return t.back().first;
  }

  void send(std::vector<SessionEvent> batch) { service_.append_events(id_, std::move(batch)); }

  SessionEvent page_event(EventKind kind, PageKind page, double t, const std::string& stock = {}) {
    SessionEvent e;
    e.kind = kind;
    e.page = page;
    e.wall_time = t;
    e.stock_id = stock;
    return e;
  }

  void visit(PageKind page, const Spread& dwell) {
    const double start = clock_;
    send({page_event(EventKind::PageEnter, page, start)});
    clock_ = start + draw(dwell);
    send({page_event(EventKind::PageLeave, page, clock_)});
  }

  void act() {
    const auto& a = pick(policy_.action);
    clock_ += 1 + 4 * rng_.uniform();  // navigation gap
    if (a == "market") visit(PageKind::Market, policy_.dwell_market);
    else if (a == "stock") stock_visit();
    else if (a == "news") news_visit();
    else if (a == "portfolio") portfolio_visit();
    else if (a == "chat") chat_visit();
  }

  void stock_visit() {
    const auto& sc = service_.scenario();
    const auto kind = simkit::parse_authenticity(pick(policy_.stock_pick));
    std::vector<const simkit::Stock*> pool;
    for (const auto& s : sc.stocks) {
      if (s.authenticity == kind) pool.push_back(&s);
    }
    if (pool.empty()) return;
    const auto* stock = pool[rng_.below(pool.size())];
    const double start = clock_;
    const double dwell = draw(policy_.dwell_stock);
    send({page_event(EventKind::PageEnter, PageKind::StockDetail, start, stock->id)});
    const auto& table = kind == Authenticity::Real ? policy_.on_real : kind == Authenticity::Fraud ? policy_.on_fraud
                                                                                                     : policy_.on_fake;
    const auto& choice = pick(table.choice);
    const double at = start + dwell / 2;
    try {
      if (choice == "buy") {
        const auto cash = service_.portfolio(id_).cash;
        const auto price = stock->price_at(tick_);
        const auto budget = static_cast<double>(cash.cents()) * policy_.buy_budget;
        const auto shares = price.cents() > 0 ? static_cast<std::int64_t>(budget / static_cast<double>(price.cents())) : 0;
        service_.trade(id_, stock->id, session::Side::Buy, std::max<std::int64_t>(1, shares), at);
      } else if (choice == "report") {
        service_.report_fraud(id_, stock->id, at);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Telemetry) throw;
      ++rejected_;
    }
    clock_ = start + dwell;
    send({page_event(EventKind::PageLeave, PageKind::StockDetail, clock_, stock->id)});
  }

  void news_visit() {
    const auto& sc = service_.scenario();
    const double start = clock_;
    send({page_event(EventKind::PageEnter, PageKind::News, start)});
    clock_ = start + draw(policy_.dwell_news);
    for (int r = 0; r < policy_.reads_per_visit; ++r) {
      const auto& choice = pick(policy_.read);
      if (choice == "none") continue;
      const auto trust = choice == "untrusted" ? simkit::SourceTrust::Untrusted : simkit::SourceTrust::Trusted;
      std::vector<const simkit::NewsArticle*> pool;
      for (const auto& art : sc.articles) {
        if (art.publish_tick <= tick_ && art.source_trust == trust) pool.push_back(&art);
      }
      if (pool.empty()) continue;
      const auto* art = pool[rng_.below(pool.size())];
      SessionEvent s;
      s.kind = EventKind::ReadArticleStart;
      s.article_id = art->id;
      s.wall_time = clock_;
      clock_ += draw(policy_.read_time);
      SessionEvent e = s;
      e.kind = EventKind::ReadArticleEnd;
      e.wall_time = clock_;
      send({s, e});
    }
    clock_ += 1;
    send({page_event(EventKind::PageLeave, PageKind::News, clock_)});
  }

  void portfolio_visit() {
    const double start = clock_;
    const double dwell = draw(policy_.dwell_portfolio);
    send({page_event(EventKind::PageEnter, PageKind::Portfolio, start)});
    if (pick(policy_.portfolio) == "sell") {
      const auto p = service_.portfolio(id_);
      std::vector<std::pair<std::string, std::int64_t>> held;
      for (const auto& [id, pos] : p.positions) {
        if (pos.shares > 0) held.emplace_back(id, pos.shares);
      }
      if (!held.empty()) {
        const auto& [stock, shares] = held[rng_.below(held.size())];
        try {
          service_.trade(id_, stock, session::Side::Sell, shares, start + dwell / 2);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::Telemetry) throw;
          ++rejected_;
        }
      }
    }
    clock_ = start + dwell;
    send({page_event(EventKind::PageLeave, PageKind::Portfolio, clock_)});
  }

  void chat_visit() {
    const auto& sc = service_.scenario();
    const double start = clock_;
    send({page_event(EventKind::PageEnter, PageKind::Chat, start)});
    clock_ = start + draw(policy_.dwell_chat);
    if (pick(policy_.chat) == "reply") {
      std::vector<const simkit::ChatMessage*> open;
      for (const auto& m : sc.chat_script) {
        if (m.publish_tick <= tick_ && !m.reply_options.empty()) open.push_back(&m);
      }
      if (!open.empty()) {
        const auto* m = open[rng_.below(open.size())];
        SessionEvent e;
        e.kind = EventKind::ChatReply;
        e.message_id = m->id;
        e.reply = m->reply_options[rng_.below(m->reply_options.size())];
        e.wall_time = clock_;
        send({e});
      }
    }
    send({page_event(EventKind::PageLeave, PageKind::Chat, clock_)});
  }

  Service& service_;
  const BotPolicy& policy_;
  SplitMix64 rng_;
  std::string id_;
  int tick_ = 0;
  double clock_ = 0;
  std::size_t rejected_ = 0;
};

}  // namespace

BotRun run_bot_session(Service& service, const BotPolicy& policy, std::uint64_t seed) {
  validate(policy);
  return Bot(service, policy, seed).run();
}

}  // namespace fraudaware::server

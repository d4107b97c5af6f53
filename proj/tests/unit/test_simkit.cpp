#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "fraudaware/error.hpp"
#include "fraudaware/simkit/scenario.hpp"

using namespace fraudaware;
using namespace fraudaware::simkit;

namespace {

PriceProcessParams fraud_params() {
  PriceProcessParams p;
  p.seed = 42;
  p.volatility = 0.03;
  p.pump_start = 10;
  p.pump_len = 5;
  p.dump_len = 4;
  p.pump_multiple = 3.0;
  p.crash_floor = 0.2;
  p.horizon = 52;
  return p;
}

std::size_t argmax_tick(const Stock& s) {
  auto it = std::max_element(s.price_history.begin(), s.price_history.end(),
                             [](const PricePoint& a, const PricePoint& b) { return a.price < b.price; });
  return static_cast<std::size_t>(it->tick);
}

}  // namespace

TEST_CASE("step_real_price") {
  PriceProcessParams p;
  p.seed = 7;

  SUBCASE("zero noise and zero drift is the identity") { CHECK(step_real_price(100.0, p, 3) == 100.0); }

  SUBCASE("deterministic drift") {
    p.drift = std::log(1.01);
    CHECK(std::abs(step_real_price(100.0, p, 3) - 101.0) < 1e-9);
  }

  SUBCASE("golden value for seed 7, tick 1") {
    // Frozen from the first run; independently reproduced by a Python port
    // of SplitMix64 + Box-Muller.
    p.volatility = 0.02;
    CHECK(std::abs(step_real_price(100.0, p, 1) - 102.18421047188076) < 1e-10);
  }

  SUBCASE("identical inputs give identical outputs") {
    p.volatility = 0.05;
    CHECK(step_real_price(12.5, p, 9) == step_real_price(12.5, p, 9));
  }

  SUBCASE("non-finite or non-positive previous price") {
    CHECK_THROWS_AS(step_real_price(std::numeric_limits<double>::quiet_NaN(), p, 1), Error);
    CHECK_THROWS_AS(step_real_price(std::numeric_limits<double>::infinity(), p, 1), Error);
    CHECK_THROWS_AS(step_real_price(0.0, p, 1), Error);
  }
}

TEST_CASE("step_fraud_price envelope") {
  const auto p = fraud_params();

  SUBCASE("pump reaches the multiple and dump reaches the floor") {
    double price = 1.0;
    // Price entering the first pump step is the pump-start price.
    const double start = price;
    double peak = price;
    for (int t = p.pump_start; t < p.pump_start + p.pump_len; ++t) {
      price = step_fraud_price(price, p, t);
      peak = std::max(peak, price);
    }
    CHECK(price >= 3.0 * start);
    for (int t = p.pump_start + p.pump_len; t < p.pump_start + p.pump_len + p.dump_len; ++t) {
      price = step_fraud_price(price, p, t);
    }
    CHECK(price <= 0.2 * peak);
  }

  SUBCASE("zero volatility hits the envelope exactly") {
    auto q = p;
    q.volatility = 0.0;
    double price = 1.0;
    for (int t = q.pump_start; t < q.pump_start + q.pump_len; ++t) price = step_fraud_price(price, q, t);
    CHECK(price == doctest::Approx(3.0).epsilon(1e-12));
  }

  SUBCASE("tick beyond the horizon is a domain error") {
    CHECK_THROWS_AS(step_fraud_price(1.0, p, 52), Error);
    CHECK_THROWS_AS(step_fraud_price(1.0, p, -1), Error);
  }

  SUBCASE("phases") {
    CHECK(fraud_phase(p, 9) == FraudPhase::Accumulation);
    CHECK(fraud_phase(p, 10) == FraudPhase::Pump);
    CHECK(fraud_phase(p, 14) == FraudPhase::Pump);
    CHECK(fraud_phase(p, 15) == FraudPhase::Dump);
    CHECK(fraud_phase(p, 19) == FraudPhase::Aftermath);
  }
}

TEST_CASE("fraud params validation") {
  auto p = fraud_params();
  CHECK_NOTHROW(validate_fraud_params(p));
  p.pump_multiple = 1.0;
  CHECK_THROWS_AS(validate_fraud_params(p), Error);
  p = fraud_params();
  p.crash_floor = 1.0;
  CHECK_THROWS_AS(validate_fraud_params(p), Error);
  p = fraud_params();
  p.pump_start = 45;  // 45 + 5 + 4 > 52
  CHECK_THROWS_AS(validate_fraud_params(p), Error);
}

TEST_CASE("default scenario") {
  const auto config = default_scenario_config();
  const auto sc = generate_scenario(config, 42);

  CHECK(sc.stocks.size() == 10);
  CHECK(std::count_if(sc.stocks.begin(), sc.stocks.end(),
                      [](const Stock& s) { return s.authenticity == Authenticity::Fraud; }) == 4);
  CHECK(sc.initial_cash == Money::from_cents(2'000'000));
  CHECK(sc.initial_xp == 100);
  CHECK(sc.horizon == 52);

  SUBCASE("histories cover ticks 0..51 strictly increasing") {
    for (const auto& s : sc.stocks) {
      REQUIRE(s.price_history.size() == 52);
      for (std::size_t i = 0; i < s.price_history.size(); ++i) CHECK(s.price_history[i].tick == static_cast<int>(i));
    }
  }

  SUBCASE("fraud shape: argmax inside the pump window, final under the floor") {
    for (const auto& s : sc.stocks) {
      if (s.authenticity != Authenticity::Fraud) continue;
      const auto peak_tick = static_cast<int>(argmax_tick(s));
      CHECK(peak_tick >= s.process.pump_start);
      CHECK(peak_tick <= s.process.pump_start + s.process.pump_len);
      const auto peak = std::max_element(s.price_history.begin(), s.price_history.end(),
                                         [](auto& a, auto& b) { return a.price < b.price; })
                            ->price;
      CHECK(static_cast<double>(s.price_history.back().price.cents()) <=
            s.process.crash_floor * static_cast<double>(peak.cents()));
      // Pump-start price is the one entering the first pump step.
      const auto start = s.price_history[static_cast<std::size_t>(s.process.pump_start - 1)].price;
      const auto end = s.price_history[static_cast<std::size_t>(s.process.pump_start + s.process.pump_len - 1)].price;
      CHECK(static_cast<double>(end.cents()) >= s.process.pump_multiple * static_cast<double>(start.cents()));
    }
  }

  SUBCASE("positivity and delisting") {
    for (const auto& s : sc.stocks) {
      for (const auto& pt : s.price_history) {
        if (s.delisted_at(pt.tick)) {
          CHECK(pt.price == Money{});
        } else {
          CHECK(pt.price > Money{});
        }
      }
    }
  }

  SUBCASE("news coverage") {
    for (const auto& s : sc.stocks) {
      const bool trusted = std::any_of(sc.articles.begin(), sc.articles.end(), [&](const NewsArticle& a) {
        return a.stock_id == s.id && a.source_trust == SourceTrust::Trusted;
      });
      CHECK(trusted);
      if (s.authenticity == Authenticity::Fraud) {
        const bool bait = std::any_of(sc.articles.begin(), sc.articles.end(), [&](const NewsArticle& a) {
          return a.stock_id == s.id && a.source_trust == SourceTrust::Untrusted &&
                 a.sentiment == Sentiment::Positive && a.trap_tag == ScamTag::PennyStockPumpAndDump &&
                 a.publish_tick >= s.process.pump_start && a.publish_tick < s.process.pump_start + s.process.pump_len;
        });
        CHECK(bait);
      }
    }
    const auto recruiters = std::count_if(sc.chat_script.begin(), sc.chat_script.end(), [](const ChatMessage& m) {
      return m.author == ChatAuthor::Recruiter;
    });
    CHECK(recruiters >= 3);
    for (const auto& m : sc.chat_script) {
      if (m.author == ChatAuthor::Recruiter) CHECK(m.trap_tag == ScamTag::PyramidScheme);
    }
  }

  SUBCASE("determinism") {
    const auto again = generate_scenario(config, 42);
    CHECK(again == sc);
    CHECK(dump_json(to_json(again)) == dump_json(to_json(sc)));
    const auto other = generate_scenario(config, 43);
    CHECK_FALSE(other == sc);
  }
}

TEST_CASE("scenario config errors") {
  auto config = default_scenario_config();

  SUBCASE("no stocks") {
    config.stocks.clear();
    CHECK_THROWS_AS(generate_scenario(config, 1), Error);
  }
  SUBCASE("horizon too short for the fraud phases") {
    config.horizon = 30;
    for (auto& s : config.stocks) s.process.horizon = 30;
    try {
      (void)generate_scenario(config, 1);
      FAIL("expected config error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Config);
    }
  }
  SUBCASE("fraud stock without pump bait") {
    std::erase_if(config.articles, [](const NewsArticle& a) { return a.id == "N08"; });
    CHECK_THROWS_AS(generate_scenario(config, 1), Error);
  }
  SUBCASE("unsupported version") {
    json doc = {{"version", 2}};
    CHECK_THROWS_AS(parse_scenario_config(doc), Error);
  }
}

TEST_CASE("delist_fake") {
  const auto sc = generate_scenario(default_scenario_config(), 42);
  const Stock* fake = nullptr;
  const Stock* real = nullptr;
  for (const auto& s : sc.stocks) {
    if (s.authenticity == Authenticity::Fake) fake = &s;
    if (s.authenticity == Authenticity::Real && !real) real = &s;
  }
  REQUIRE(fake);
  REQUIRE(real);

  SUBCASE("zeroes prices from the delist tick") {
    Stock s = *fake;
    s.delist_tick = 30;
    for (auto& p : s.price_history) p.price = Money::from_cents(500);
    const auto out = delist_fake(s, 30);
    for (const auto& p : out.price_history) {
      if (p.tick >= 30) {
        CHECK(p.price == Money{});
      } else {
        CHECK(p.price == Money::from_cents(500));
      }
    }
  }
  SUBCASE("non-fake stock is a contract violation") {
    try {
      (void)delist_fake(*real, 40);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ContractViolation);
    }
  }
  SUBCASE("tick before the configured delist tick") { CHECK_THROWS_AS(delist_fake(*fake, *fake->delist_tick - 1), Error); }
}

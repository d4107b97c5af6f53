#include <doctest.h>

#include <algorithm>
#include <set>

#include "fraudaware/analytics/cohort.hpp"
#include "fraudaware/defaults.hpp"
#include "fraudaware/error.hpp"
#include "fraudaware/personalize/feedback.hpp"
#include "fraudaware/personalize/knowledge_pool.hpp"
#include "fraudaware/personalize/pipeline.hpp"

using namespace fraudaware;
using namespace fraudaware::personalize;
using mlcore::ClassifierKind;
using session::EventKind;
using session::Metric;
using session::PageKind;
using session::SessionEvent;
using simkit::Authenticity;
using simkit::Sentiment;
using simkit::SourceTrust;

namespace {

const std::vector<session::DigitalFootprint>& cohort() {
  static const auto c = analytics::generate_cohort(analytics::default_cohort_spec());
  return c;
}

const PipelineModel& trained() {
  static const auto m = train_pipeline(build_training_table(cohort()), default_pipeline_config());
  return m;
}

std::shared_ptr<const PipelineModel> shared_model() {
  static const auto p = std::make_shared<const PipelineModel>(trained());
  return p;
}

std::shared_ptr<const KnowledgePool> shared_pool() {
  static const auto p = std::make_shared<const KnowledgePool>(default_knowledge_pool());
  return p;
}

struct Log {
  std::vector<SessionEvent> events;
  double t = 0;

  SessionEvent& add(EventKind kind, double dt = 1) {
    SessionEvent e;
    e.seq = events.size() + 1;
    e.session_id = "fb";
    t += dt;
    e.wall_time = t;
    e.kind = kind;
    return events.emplace_back(std::move(e));
  }
  void visit(PageKind p, double seconds) {
    add(EventKind::PageEnter).page = p;
    add(EventKind::PageLeave, seconds).page = p;
  }
  void read(const std::string& id, SourceTrust src, double seconds) {
    for (auto k : {EventKind::ReadArticleStart, EventKind::ReadArticleEnd}) {
      auto& e = add(k, k == EventKind::ReadArticleEnd ? seconds : 1);
      e.article_id = id;
      e.sentiment = Sentiment::Neutral;
      e.source_trust = src;
    }
  }
  void buy(const std::string& id, Authenticity a) {
    auto& e = add(EventKind::Buy);
    e.stock_id = id;
    e.authenticity = a;
    e.shares = 10;
    e.price = Money::from_units(5);
  }
  void report(const std::string& id) {
    auto& e = add(EventKind::ReportFraud);
    e.stock_id = id;
    e.authenticity = Authenticity::Fraud;
  }
};

// Untrusted tips, fraud buys, quick glances at the market.
void novice_phase(Log& log) {
  for (int i = 0; i < 6; ++i) {
    log.visit(PageKind::Market, 20);
    log.read("U" + std::to_string(i), SourceTrust::Untrusted, 30);
    if (i % 2 == 0) log.buy("ZPHR", Authenticity::Fraud);
  }
}

// Long market sessions, trusted sources, fraud reports.
void experienced_phase(Log& log) {
  for (int i = 0; i < 14; ++i) {
    log.visit(PageKind::Market, 300);
    log.read("T" + std::to_string(i), SourceTrust::Trusted, 60);
    if (i % 4 == 0) log.report("GLDX");
  }
}

session::DigitalFootprint archetype(const analytics::ArchetypeSpec& a) {
  session::DigitalFootprint fp;
  for (std::size_t c = 0; c < session::kMetricCount; ++c) {
    if (a.metrics[c]) fp.metrics[c] = std::round(a.metrics[c]->mean);
  }
  fp[Metric::ArticlesRead] = fp[Metric::UntrustedRead] + fp[Metric::TrustedRead];
  fp[Metric::Transactions] =
      std::max(fp[Metric::Transactions], fp[Metric::FakeBought] + fp[Metric::FraudBought] + fp[Metric::RealBought]);
  return fp;
}

}  // namespace

TEST_CASE("game-design elements carry their motivation") {
  CHECK(motivation_of(GameDesignElement::Quests) == Motivation::Both);
  CHECK(motivation_of(GameDesignElement::ContentUnlocking) == Motivation::Both);
  CHECK(motivation_of(GameDesignElement::PerformanceContingentRewards) == Motivation::Both);
  CHECK(motivation_of(GameDesignElement::Badges) == Motivation::Extrinsic);
  CHECK(motivation_of(GameDesignElement::Leaderboards) == Motivation::Extrinsic);
  CHECK(motivation_of(GameDesignElement::CompetenceRelatedAwards) == Motivation::Intrinsic);
  CHECK(motivation_of(GameDesignElement::UnexpectedAwards) == Motivation::Intrinsic);
  for (auto e : kAllElements) CHECK(parse_element(to_string(e)) == e);
  CHECK_THROWS_AS(parse_element("Confetti"), Error);
}

TEST_CASE("default knowledge pool content") {
  const auto pool = default_knowledge_pool();
  CHECK(pool.entries.size() == 6);
  const auto& novice = select_resources(pool, InvestorType::novice());
  CHECK(novice.scams == std::vector{simkit::ScamTag::PennyStockPumpAndDump});
  CHECK(novice.difficulty == simkit::Difficulty::Easy);
  CHECK(novice.elements == std::vector{GameDesignElement::Points, GameDesignElement::Badges, GameDesignElement::Quests,
                                       GameDesignElement::ContentUnlocking});
  const auto& confident = select_resources(pool, InvestorType::experienced(ExperiencedSubtype::Confident));
  CHECK(std::count(confident.elements.begin(), confident.elements.end(), GameDesignElement::Leaderboards) == 1);
  const auto& exp = select_resources(pool, InvestorType::experienced());
  for (auto e : exp.elements) CHECK(motivation_of(e) != Motivation::Extrinsic);
}

TEST_CASE("knowledge pool validation") {
  json doc = parse_json(defaults::knowledge_pool_json(), "pool");
  SUBCASE("round trip") { CHECK(knowledge_pool_from_json(to_json(default_knowledge_pool())) == default_knowledge_pool()); }
  SUBCASE("missing type") {
    doc["entries"].erase("Experienced/LossAverseYoung");
    try {
      knowledge_pool_from_json(doc);
      FAIL("expected a pool validation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PoolValidation);
      CHECK(std::string(e.what()).find("LossAverseYoung") != std::string::npos);
    }
  }
  SUBCASE("unknown element") {
    doc["entries"]["Novice"]["elements"].push_back("Confetti");
    CHECK_THROWS_AS(knowledge_pool_from_json(doc), Error);
  }
  SUBCASE("unknown scam") {
    doc["entries"]["Novice"]["scams"] = json::array({"Ponzi"});
    try {
      knowledge_pool_from_json(doc);
      FAIL("expected a pool validation error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::PoolValidation);
    }
  }
  SUBCASE("repeated element") {
    doc["entries"]["Novice"]["elements"].push_back("Points");
    CHECK_THROWS_AS(knowledge_pool_from_json(doc), Error);
  }
  SUBCASE("unknown type") {
    doc["entries"]["Expert"] = doc["entries"]["Novice"];
    CHECK_THROWS_AS(knowledge_pool_from_json(doc), Error);
  }
  SUBCASE("format version") {
    doc["version"] = 2;
    CHECK_THROWS_AS(knowledge_pool_from_json(doc), Error);
  }
}

TEST_CASE("training table from footprints") {
  const auto t = build_training_table(cohort());
  CHECK(t.rows() == 33);
  CHECK(t.cols() == 17);
  for (std::size_t c = 0; c < session::kMetricCount; ++c) CHECK(t.col_names[c] == session::kMetricNames[c]);
  REQUIRE(t.labels);
  CHECK(std::count(t.labels->begin(), t.labels->end(), 0) == 16);
  CHECK(t.values(3, static_cast<Eigen::Index>(session::index(Metric::MarketPageTime))) ==
        cohort()[3][Metric::MarketPageTime]);

  const auto back = mlcore::from_csv(mlcore::to_csv(t));
  CHECK(back.values == t.values);
  CHECK(back.col_names == t.col_names);
  CHECK(back.labels == t.labels);

  CHECK_THROWS_AS(build_training_table(std::vector<session::DigitalFootprint>{}), Error);

  auto mixed = cohort();
  mixed[0].label.reset();
  CHECK_FALSE(build_training_table(mixed).labels.has_value());

  auto bad = cohort();
  bad[1][Metric::ArticlesRead] += 1;
  CHECK_THROWS_AS(build_training_table(bad), Error);

  json doc = session::to_json(cohort()[0]);
  doc["metrics"].erase("t_news_page");
  try {
    session::footprint_from_json(doc);
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Schema);
    CHECK(std::string(e.what()).find("t_news_page") != std::string::npos);
  }
}

TEST_CASE("pipeline config parsing") {
  const auto c = default_pipeline_config();
  CHECK(c.top_features == 5);
  CHECK(c.split_seeds.size() == 10);
  CHECK(c.split_seeds.front() == 0);
  CHECK(c.split_seeds.back() == 9);
  CHECK(c.train_ratio == doctest::Approx(0.7));
  CHECK(c.classifiers.size() == 3);
  CHECK(c.feedback_cadence == 25);
  CHECK(dump_json(to_json(pipeline_config_from_json(to_json(c)))) == dump_json(to_json(c)));

  json doc = to_json(c);
  doc["classifiers"] = json::array({"RandomForest"});
  CHECK_THROWS_AS(pipeline_config_from_json(doc), Error);
  doc = to_json(c);
  doc["pca_components"] = 0;
  CHECK_THROWS_AS(pipeline_config_from_json(doc), Error);
}

TEST_CASE("pipeline training on the default cohort") {
  const auto& m = trained();
  const auto names = m.selected_names();
  CHECK(names.size() == 5);
  const std::set<std::string> expected{"age", "t_market_page", "n_untrusted_read", "n_fraud_bought", "n_trusted_read"};
  const auto hits = std::count_if(names.begin(), names.end(), [&](const auto& n) { return expected.count(n) > 0; });
  CHECK(hits >= 4);
  CHECK(m.classifiers.size() == 3);
  REQUIRE(m.evaluation.size() == 3);
  for (const auto& ev : m.evaluation) {
    CHECK(ev.split_accuracy.size() == 10);
    CHECK(ev.mean_accuracy >= 0.0);
    CHECK(ev.mean_accuracy <= 1.0);
  }
}

TEST_CASE("pipeline determinism and serialization") {
  const auto table = build_training_table(cohort());
  const auto a = train_pipeline(table, default_pipeline_config());
  const auto b = train_pipeline(table, default_pipeline_config());
  CHECK(dump_json(to_json(a)) == dump_json(to_json(b)));
  CHECK(a.selected == trained().selected);

  const auto reloaded = pipeline_model_from_json(parse_json(dump_json(to_json(a)), "model"));
  CHECK(dump_json(to_json(reloaded)) == dump_json(to_json(a)));
  for (const auto& fp : cohort()) {
    for (auto k : mlcore::kAllClassifierKinds) {
      const auto p = predict_type(a, fp, k);
      const auto q = predict_type(reloaded, fp, k);
      CHECK(p.type == q.type);
      CHECK(p.confidence == q.confidence);
    }
  }
}

TEST_CASE("pipeline errors") {
  const auto table = build_training_table(cohort());
  auto config = default_pipeline_config();
  config.classifiers.clear();
  CHECK_THROWS_AS(train_pipeline(table, config), Error);

  config = default_pipeline_config();
  config.top_features = 18;
  try {
    train_pipeline(table, config);
    FAIL("expected a domain error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
    CHECK(std::string(e.what()).find("feature selection") != std::string::npos);
  }

  auto unlabeled = table;
  unlabeled.labels.reset();
  CHECK_THROWS_AS(train_pipeline(unlabeled, default_pipeline_config()), Error);
}

TEST_CASE("unbounded tree memorizes its training rows") {
  auto config = default_pipeline_config();
  config.classifiers = {ClassifierKind::DecisionTree};
  config.params.tree.max_depth = -1;
  const auto m = train_pipeline(build_training_table(cohort()), config);
  for (const auto& fp : cohort()) {
    const auto p = predict_type(m, fp, ClassifierKind::DecisionTree);
    CHECK(p.type == *fp.label);
    CHECK(p.confidence == 1.0);
  }
  try {
    predict_type(m, cohort()[0], ClassifierKind::Perceptron);
    FAIL("expected NoModel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoModel);
  }
}

TEST_CASE("archetypal footprints are classified by construction") {
  const auto spec = analytics::default_cohort_spec();
  CHECK(predict_type(trained(), archetype(spec.novice), ClassifierKind::Perceptron).type == InvestorType::novice());
  CHECK(predict_type(trained(), archetype(spec.experienced), ClassifierKind::Perceptron).type ==
        InvestorType::experienced());
}

TEST_CASE("prediction is total over valid footprints") {
  session::DigitalFootprint zero;
  session::DigitalFootprint huge;
  huge.metrics.fill(1e9);
  huge[Metric::ArticlesRead] = 2e9;
  session::DigitalFootprint young;
  young[Metric::Age] = 1;
  for (const auto& fp : {zero, huge, young}) {
    for (auto k : mlcore::kAllClassifierKinds) {
      const auto p = predict_type(trained(), fp, k);
      CHECK(p.confidence >= 0.0);
      CHECK(p.confidence <= 1.0);
      CHECK_FALSE(p.type.subtype().has_value());
    }
  }
}

TEST_CASE("bundles are copied from the pool") {
  const auto pool = default_knowledge_pool();
  for (const auto& t : all_investor_types()) {
    const auto b = make_bundle(pool, "s", {t, 0.6});
    const auto& e = select_resources(pool, t);
    CHECK(b.elements == e.elements);
    CHECK(b.scams == e.scams);
    CHECK(b.difficulty == e.difficulty);
    CHECK(feedback_bundle_from_json(to_json(b)) == b);
  }
}

TEST_CASE("feedback loop on an empty log") {
  const auto bundles = run_feedback_loop(shared_model(), shared_pool(), ClassifierKind::Perceptron, "fb", 24, {});
  REQUIRE(bundles.size() == 1);
  session::DigitalFootprint zero;
  zero[Metric::Age] = 24;
  CHECK(bundles[0].predicted_type == predict_type(trained(), zero, ClassifierKind::Perceptron).type);
  CHECK(bundles[0].events_seen == 0);
}

TEST_CASE("feedback loop without a type change emits once") {
  Log log;
  novice_phase(log);
  novice_phase(log);
  REQUIRE(log.events.size() >= 50);
  const auto bundles =
      run_feedback_loop(shared_model(), shared_pool(), ClassifierKind::Perceptron, "fb", 24, log.events);
  CHECK(bundles.size() == 1);
  CHECK(bundles[0].predicted_type == InvestorType::novice());
}

TEST_CASE("feedback loop crossing from novice to experienced emits twice") {
  Log log;
  novice_phase(log);
  experienced_phase(log);
  FeedbackLoop loop(shared_model(), shared_pool(), ClassifierKind::Perceptron, "fb", 24);
  std::size_t emitted = 0;
  for (const auto& e : log.events) emitted += loop.push(e).has_value();
  REQUIRE(loop.bundles().size() == 2);
  CHECK(emitted == 1);
  CHECK(loop.initial().predicted_type == InvestorType::novice());
  CHECK(loop.latest().predicted_type == InvestorType::experienced());
  CHECK(loop.latest().events_seen % 25 == 0);
  CHECK(loop.latest().scams == select_resources(*shared_pool(), InvestorType::experienced()).scams);
  CHECK(loop.health().malformed == 0);
  CHECK(loop.health().refolds == log.events.size() / 25);
}

TEST_CASE("feedback loop skips and counts malformed events") {
  Log log;
  novice_phase(log);
  auto bad_leave = log.events.front();
  bad_leave.kind = EventKind::PageLeave;
  bad_leave.page = PageKind::Portfolio;
  auto no_stock = log.events.front();
  no_stock.kind = EventKind::Buy;
  no_stock.page.reset();

  FeedbackLoop loop(shared_model(), shared_pool(), ClassifierKind::Perceptron, "fb", 24, 5);
  loop.push(bad_leave);
  loop.push(no_stock);
  for (const auto& e : log.events) loop.push(e);
  const auto h = loop.health();
  CHECK(h.malformed == 2);
  CHECK(h.events_seen == log.events.size() + 2);
  CHECK(h.events_applied == log.events.size());
  CHECK(loop.footprint() == session::fold_footprint(log.events, 24));
  CHECK_THROWS_AS(FeedbackLoop(shared_model(), shared_pool(), ClassifierKind::Perceptron, "fb", 24, 0), Error);
}

TEST_CASE("feedback determinism") {
  Log log;
  novice_phase(log);
  experienced_phase(log);
  const auto a = run_feedback_loop(shared_model(), shared_pool(), ClassifierKind::GradientBoostedTrees, "fb", 24, log.events);
  const auto b = run_feedback_loop(shared_model(), shared_pool(), ClassifierKind::GradientBoostedTrees, "fb", 24, log.events);
  CHECK(a == b);
  for (const auto& bundle : a) {
    const auto& entry = select_resources(*shared_pool(), bundle.predicted_type);
    CHECK(bundle.elements == entry.elements);
  }
}

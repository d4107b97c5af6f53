#include "fraudaware/server/service.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "fraudaware/error.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::server {

using session::EventKind;
using session::PageKind;
using session::SessionEvent;

namespace {

constexpr int kManifestVersion = 1;
constexpr int kHistoryTicks = 52;

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_tick(const simkit::Scenario& sc, int tick) {
  if (tick < 0 || tick > sc.horizon) {
    throw Error(ErrorCode::Validation, "tick " + std::to_string(tick) + " outside [0, " + std::to_string(sc.horizon) + "]");
  }
}

}  // namespace

json to_json(const ApiSession& s) {
  return {{"session", s.id},
          {"age", s.user_age},
          {"scenario", s.scenario_id},
          {"created_at", s.created_at},
          {"tick", s.current_tick}};
}

ServiceOptions service_options_from_json(const json& doc, const std::filesystem::path& base) {
  require_version(doc, 1, "server config");
  ServiceOptions o;
  try {
    if (doc.contains("data_dir")) o.data_dir = resolve(base, doc.at("data_dir").get<std::string>());
    if (doc.contains("scenario")) o.scenario_config = simkit::load_scenario_config(resolve(base, doc.at("scenario")));
    o.scenario_seed = doc.value("scenario_seed", o.scenario_seed);
    if (doc.contains("knowledge_pool")) o.pool = personalize::load_knowledge_pool(resolve(base, doc.at("knowledge_pool")));
    if (doc.contains("pipeline")) {
      o.pipeline = personalize::pipeline_config_from_json(load_json_file(resolve(base, doc.at("pipeline"))));
    }
    if (doc.contains("cohort")) o.cohort = analytics::cohort_spec_from_json(load_json_file(resolve(base, doc.at("cohort"))));
    if (doc.contains("classifier")) o.classifier = mlcore::parse_classifier_kind(doc.at("classifier").get<std::string>());
    o.train_on_start = doc.value("train_on_start", o.train_on_start);
    o.fold.max_dwell_seconds = doc.value("max_dwell_seconds", o.fold.max_dwell_seconds);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("server config: ") + e.what());
  }
  return o;
}

struct Service::SessionState {
  std::mutex mu;
  ApiSession meta;
  std::vector<SessionEvent> log;
  session::Portfolio portfolio;
  session::FootprintAccumulator acc;
  std::unique_ptr<session::EventLogWriter> writer;
  std::unique_ptr<personalize::FeedbackLoop> loop;
  std::uint64_t loop_generation = 0;

  SessionState(ApiSession m, session::Portfolio p, session::FoldOptions fold)
      : meta(std::move(m)), portfolio(std::move(p)), acc(meta.user_age, meta.id, fold) {}

  std::uint64_t next_seq() const { return log.empty() ? 1 : log.back().seq + 1; }
  double last_wall_time() const { return log.empty() ? 0.0 : log.back().wall_time; }
};

Service::Service(ServiceOptions options)
    : options_(std::move(options)),
      scenario_(simkit::generate_scenario(options_.scenario_config, options_.scenario_seed)),
      pool_(std::make_shared<const personalize::KnowledgePool>(options_.pool)) {
  personalize::validate(*pool_);
  if (!options_.data_dir.empty()) {
    std::filesystem::create_directories(options_.data_dir / "sessions");
    load();
    save_manifest();
  }
  if (options_.train_on_start) train();
}

Service::~Service() = default;

std::string Service::stamp() const { return options_.now ? options_.now() : utc_now(); }

std::string Service::next_session_id() {
  for (;;) {
    const auto token = mix_seed(options_.scenario_seed ^ 0x5e5510f5ULL, created_++);
    char buf[24];
    std::snprintf(buf, sizeof buf, "s%012llx", static_cast<unsigned long long>(token & 0xffffffffffffULL));
    if (!sessions_.count(buf)) return buf;
  }
}

void Service::save_manifest() const {
  if (options_.data_dir.empty()) return;
  std::lock_guard manifest_lock(manifest_mu_);
  std::vector<std::shared_ptr<SessionState>> all;
  {
    std::lock_guard lock(sessions_mu_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  std::uint64_t created;
  {
    std::lock_guard lock(sessions_mu_);
    created = created_;
  }
  json list = json::array();
  for (const auto& s : all) {
    std::lock_guard lock(s->mu);
    list.push_back(to_json(s->meta));
  }
  const json doc = {{"version", kManifestVersion},
                    {"scenario", {{"id", scenario_.id}, {"seed", scenario_.seed}}},
                    {"sessions_created", created},
                    {"sessions", list}};
  write_text_file(options_.data_dir / "manifest.json", dump_json(doc) + "\n");
}

void Service::load() {
  const auto path = options_.data_dir / "manifest.json";
  if (!std::filesystem::exists(path)) return;
  const json doc = load_json_file(path);
  require_version(doc, kManifestVersion, "manifest");
  if (doc.contains("scenario")) {
    const auto recorded = doc.at("scenario").value("id", "");
    if (recorded != scenario_.id) {
      throw Error(ErrorCode::Config, "data directory was written by scenario " + recorded + ", but the service runs " +
                                         scenario_.id);
    }
  }
  created_ = doc.value("sessions_created", std::uint64_t{0});
  for (const auto& entry : require_field<json>(doc, "sessions", "manifest")) {
    ApiSession meta;
    meta.id = require_field<std::string>(entry, "session", "manifest session");
    meta.user_age = require_field<double>(entry, "age", "manifest session");
    meta.scenario_id = require_field<std::string>(entry, "scenario", "manifest session");
    meta.created_at = entry.value("created_at", "");
    meta.current_tick = require_field<int>(entry, "tick", "manifest session");
    if (meta.scenario_id != scenario_.id) {
      throw Error(ErrorCode::Config, "session " + meta.id + " was recorded against scenario " + meta.scenario_id +
                                         ", but the service runs " + scenario_.id);
    }
    auto s = std::make_shared<SessionState>(meta, session::Portfolio::initial(scenario_.initial_cash, scenario_.initial_xp, options_.xp),
                                            options_.fold);
    const auto log_path = options_.data_dir / "sessions" / (meta.id + ".jsonl");
    if (std::filesystem::exists(log_path)) s->log = session::read_event_log(log_path);
    for (const auto& e : s->log) {
      s->acc.apply(e);
      s->portfolio = session::apply_event(s->portfolio, e, scenario_, options_.xp);
    }
    s->writer = std::make_unique<session::EventLogWriter>(log_path);
    sessions_.emplace(meta.id, std::move(s));
  }
  created_ = std::max<std::uint64_t>(created_, sessions_.size());
}

std::shared_ptr<Service::SessionState> Service::find(const std::string& id) const {
  std::lock_guard lock(sessions_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "unknown session '" + id + "'");
  return it->second;
}

ApiSession Service::create_session(double user_age) {
  if (!std::isfinite(user_age) || user_age < 0 || user_age > 150) {
    throw Error(ErrorCode::Validation, "age must be a number of years in [0, 150]");
  }
  ApiSession meta;
  {
    std::lock_guard lock(sessions_mu_);
    meta.id = next_session_id();
    meta.user_age = user_age;
    meta.scenario_id = scenario_.id;
    meta.created_at = stamp();
    auto s = std::make_shared<SessionState>(meta, session::Portfolio::initial(scenario_.initial_cash, scenario_.initial_xp, options_.xp),
                                            options_.fold);
    if (!options_.data_dir.empty()) {
      s->writer = std::make_unique<session::EventLogWriter>(options_.data_dir / "sessions" / (meta.id + ".jsonl"));
    }
    sessions_.emplace(meta.id, std::move(s));
  }
  save_manifest();
  return meta;
}

ApiSession Service::get_session(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->meta;
}

std::vector<ApiSession> Service::sessions() const {
  std::vector<std::shared_ptr<SessionState>> all;
  {
    std::lock_guard lock(sessions_mu_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  std::vector<ApiSession> out;
  for (const auto& s : all) {
    std::lock_guard lock(s->mu);
    out.push_back(s->meta);
  }
  return out;
}

ApiSession Service::advance(const std::string& id, int ticks) {
  if (ticks < 0) throw Error(ErrorCode::Validation, "cannot move the clock backwards");
  auto s = find(id);
  ApiSession meta;
  {
    std::lock_guard lock(s->mu);
    s->meta.current_tick = std::min(scenario_.horizon, s->meta.current_tick + ticks);
    meta = s->meta;
  }
  save_manifest();
  return meta;
}

void Service::advance_all(int ticks) {
  for (const auto& meta : sessions()) {
    auto s = find(meta.id);
    std::lock_guard lock(s->mu);
    s->meta.current_tick = std::min(scenario_.horizon, s->meta.current_tick + ticks);
  }
  save_manifest();
}

void Service::commit(SessionState& s, const std::vector<SessionEvent>& batch, const session::FootprintAccumulator& acc,
                     const session::Portfolio& portfolio) {
  for (const auto& e : batch) {
    if (s.writer) s.writer->append(e);
    s.log.push_back(e);
  }
  s.acc = acc;
  s.portfolio = portfolio;
  if (s.loop) {
    std::lock_guard lock(model_mu_);
    if (s.loop_generation != model_generation_) {
      s.loop.reset();
      return;
    }
  }
  if (s.loop) {
    for (const auto& e : batch) s.loop->push(e);
  }
}

std::vector<SessionEvent> Service::append_events(const std::string& id, std::vector<SessionEvent> batch) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  auto seq = s->next_seq();
  for (auto& e : batch) {
    if (e.kind == EventKind::Buy || e.kind == EventKind::Sell || e.kind == EventKind::ReportFraud) {
      throw Error(ErrorCode::Validation, std::string(session::to_string(e.kind)) +
                                             " events are recorded through the trade and report-fraud calls");
    }
    e.seq = seq++;
    e.session_id = s->meta.id;
    e.tick = s->meta.current_tick;
    if (e.page == PageKind::StockDetail) {
      const auto* stock = scenario_.find_stock(e.stock_id);
      if (!stock) throw Error(ErrorCode::Validation, "event " + std::to_string(e.seq) + ": unknown stock '" + e.stock_id + "'");
      e.authenticity = stock->authenticity;
    }
    if (e.kind == EventKind::ReadArticleStart || e.kind == EventKind::ReadArticleEnd) {
      const auto* article = scenario_.find_article(e.article_id);
      if (!article) {
        throw Error(ErrorCode::Validation, "event " + std::to_string(e.seq) + ": unknown article '" + e.article_id + "'");
      }
      e.sentiment = article->sentiment;
      e.source_trust = article->source_trust;
    }
    if (e.kind == EventKind::ChatReply) {
      const bool known = std::any_of(scenario_.chat_script.begin(), scenario_.chat_script.end(),
                                     [&](const auto& m) { return m.id == e.message_id; });
      if (!known) {
        throw Error(ErrorCode::Validation, "event " + std::to_string(e.seq) + ": unknown chat message '" + e.message_id + "'");
      }
    }
    session::validate_event(e);
  }
  auto acc = s->acc;
  std::vector<std::uint64_t> orphans;
  for (const auto& e : batch) {
    try {
      acc.apply(e);
    } catch (const TelemetryError&) {
      orphans.push_back(e.seq);
    }
  }
  if (!orphans.empty()) {
    std::string ids;
    for (auto o : orphans) ids += (ids.empty() ? "" : ", ") + std::to_string(o);
    throw TelemetryError("batch rejected: unmatched Start/End events: " + ids, orphans);
  }
  commit(*s, batch, acc, s->portfolio);
  return batch;
}

TradeOutcome Service::trade(const std::string& id, const std::string& stock_id, session::Side side, std::int64_t shares,
                            std::optional<double> wall_time) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto* stock = scenario_.find_stock(stock_id);
  if (!stock) throw Error(ErrorCode::NotFound, "unknown stock '" + stock_id + "'");
  auto result = session::execute_trade(s->portfolio, *stock, side, shares, s->meta.current_tick);
  auto& e = result.event;
  e.seq = s->next_seq();
  e.session_id = s->meta.id;
  e.wall_time = wall_time.value_or(s->last_wall_time());
  session::validate_event(e);
  auto acc = s->acc;
  acc.apply(e);
  auto portfolio = session::award_xp(result.portfolio, e, scenario_, options_.xp);
  commit(*s, {e}, acc, portfolio);
  return {e, portfolio};
}

TradeOutcome Service::report_fraud(const std::string& id, const std::string& stock_id, std::optional<double> wall_time) {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  const auto* stock = scenario_.find_stock(stock_id);
  if (!stock) throw Error(ErrorCode::NotFound, "unknown stock '" + stock_id + "'");
  SessionEvent e;
  e.seq = s->next_seq();
  e.session_id = s->meta.id;
  e.tick = s->meta.current_tick;
  e.wall_time = wall_time.value_or(s->last_wall_time());
  e.kind = EventKind::ReportFraud;
  e.stock_id = stock_id;
  e.authenticity = stock->authenticity;
  session::validate_event(e);
  auto acc = s->acc;
  acc.apply(e);
  auto portfolio = session::apply_event(s->portfolio, e, scenario_, options_.xp);
  commit(*s, {e}, acc, portfolio);
  return {e, portfolio};
}

session::Portfolio Service::portfolio(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->portfolio;
}

session::DigitalFootprint Service::footprint(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->acc.snapshot();
}

std::vector<SessionEvent> Service::events(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return s->log;
}

personalize::FeedbackLoop& Service::loop_for(SessionState& s, std::shared_ptr<const personalize::PipelineModel> model) {
  std::uint64_t generation;
  {
    std::lock_guard lock(model_mu_);
    generation = model_generation_;
  }
  if (!s.loop || s.loop_generation != generation) {
    s.loop = std::make_unique<personalize::FeedbackLoop>(model, pool_, options_.classifier, s.meta.id, s.meta.user_age,
                                                         options_.pipeline.feedback_cadence, options_.fold);
    s.loop_generation = generation;
    for (const auto& e : s.log) s.loop->push(e);
  }
  return *s.loop;
}

personalize::FeedbackBundle Service::feedback(const std::string& id) {
  auto s = find(id);
  auto m = model();
  if (!m) throw Error(ErrorCode::NoModel, "no model has been trained yet");
  std::string report_id;
  {
    std::lock_guard lock(model_mu_);
    report_id = last_report_;
  }
  std::lock_guard lock(s->mu);
  auto b = loop_for(*s, m).latest();
  b.insight_report = std::move(report_id);
  return b;
}

std::shared_ptr<const personalize::PipelineModel> Service::model() const {
  std::lock_guard lock(model_mu_);
  return model_;
}

void Service::publish(std::shared_ptr<const personalize::PipelineModel> model) {
  std::lock_guard lock(model_mu_);
  model_ = std::move(model);
  ++model_generation_;
}

std::shared_ptr<const personalize::PipelineModel> Service::train(std::optional<std::uint64_t> cohort_seed,
                                                                 std::optional<int> splits) {
  auto spec = options_.cohort;
  if (cohort_seed) spec.seed = *cohort_seed;
  auto config = options_.pipeline;
  if (splits) {
    if (*splits < 1) throw Error(ErrorCode::Validation, "splits must be >= 1");
    config.split_seeds.clear();
    for (int i = 0; i < *splits; ++i) config.split_seeds.push_back(static_cast<std::uint64_t>(i));
  }
  const auto footprints = analytics::generate_cohort(spec);
  auto m = std::make_shared<const personalize::PipelineModel>(
      personalize::train_pipeline(personalize::build_training_table(footprints), config));
  publish(m);
  return m;
}

analytics::InsightReport Service::report(ReportSource source) {
  analytics::ReportOptions opt;
  opt.generated_at = stamp();
  opt.classifier = options_.classifier;
  const auto m = model();
  std::optional<analytics::InsightReport> r;
  if (source == ReportSource::Cohort) {
    opt.cohort_id = options_.cohort.id;
    r = analytics::build_report(analytics::generate_cohort(options_.cohort), m.get(), opt);
  } else {
    if (!m) throw Error(ErrorCode::NoModel, "session reports need a trained model to label users");
    std::vector<session::DigitalFootprint> fps;
    for (const auto& meta : sessions()) fps.push_back(footprint(meta.id));
    if (fps.empty()) throw Error(ErrorCode::Validation, "no sessions to report on");
    opt.cohort_id = "sessions";
    r = analytics::build_report(fps, m.get(), opt);
  }
  {
    std::lock_guard lock(model_mu_);
    last_report_ = analytics::report_id(*r);
  }
  return std::move(*r);
}

json Service::market_view(int tick) const {
  check_tick(scenario_, tick);
  json stocks = json::array();
  for (const auto& s : scenario_.stocks) {
    const auto price = s.price_at(tick);
    const auto prev = s.price_at(std::max(0, tick - 1));
    stocks.push_back({{"id", s.id},
                      {"ticker", s.ticker},
                      {"name", s.name},
                      {"sector", s.sector},
                      {"price", price.to_string()},
                      {"change", (price - prev).to_string()},
                      {"delisted", s.delisted_at(tick)}});
  }
  return {{"tick", tick}, {"horizon", scenario_.horizon}, {"stocks", stocks}};
}

json Service::stock_view(const std::string& stock_id, int tick) const {
  check_tick(scenario_, tick);
  const auto* s = scenario_.find_stock(stock_id);
  if (!s) throw Error(ErrorCode::NotFound, "unknown stock '" + stock_id + "'");
  json history = json::array();
  for (int t = std::max(0, tick - kHistoryTicks + 1); t <= tick; ++t) {
    history.push_back({{"tick", t}, {"price", s->price_at(t).to_string()}});
  }
  return {{"id", s->id},
          {"ticker", s->ticker},
          {"name", s->name},
          {"sector", s->sector},
          {"tick", tick},
          {"price", s->price_at(tick).to_string()},
          {"delisted", s->delisted_at(tick)},
          {"float_shares", s->float_shares},
          {"history", history}};
}

json Service::news_view(int tick) const {
  check_tick(scenario_, tick);
  json items = json::array();
  for (const auto& a : scenario_.articles) {
    if (a.publish_tick > tick) continue;
    items.push_back({{"id", a.id},
                     {"stock", a.stock_id},
                     {"headline", a.headline},
                     {"body", a.body},
                     {"sentiment", simkit::to_string(a.sentiment)},
                     {"source_trust", simkit::to_string(a.source_trust)},
                     {"publish_tick", a.publish_tick}});
  }
  return {{"tick", tick}, {"articles", items}};
}

json Service::chat_view(int tick) const {
  check_tick(scenario_, tick);
  json items = json::array();
  for (const auto& m : scenario_.chat_script) {
    if (m.publish_tick > tick) continue;
    items.push_back({{"id", m.id},
                     {"author", simkit::to_string(m.author)},
                     {"text", m.text},
                     {"reply_options", m.reply_options},
                     {"publish_tick", m.publish_tick}});
  }
  return {{"tick", tick}, {"messages", items}};
}

json Service::session_analytics(const std::string& id) const {
  auto s = find(id);
  std::lock_guard lock(s->mu);
  return {{"session", s->meta.id},
          {"tick", s->meta.current_tick},
          {"events", s->log.size()},
          {"portfolio_value", s->portfolio.value_at(scenario_, s->meta.current_tick).to_string()},
          {"xp", s->portfolio.xp},
          {"level", s->portfolio.level},
          {"footprint", session::to_json(s->acc.snapshot())}};
}

json Service::health() const {
  std::size_t n;
  {
    std::lock_guard lock(sessions_mu_);
    n = sessions_.size();
  }
  return {{"status", "ok"}, {"scenario", scenario_.id}, {"sessions", n}, {"model", model() != nullptr}};
}

}  // namespace fraudaware::server

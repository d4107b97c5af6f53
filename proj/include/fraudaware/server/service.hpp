#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fraudaware/analytics/cohort.hpp"
#include "fraudaware/analytics/report.hpp"
#include "fraudaware/io.hpp"
#include "fraudaware/personalize/feedback.hpp"
#include "fraudaware/personalize/knowledge_pool.hpp"
#include "fraudaware/personalize/pipeline.hpp"
#include "fraudaware/session/event.hpp"
#include "fraudaware/session/footprint.hpp"
#include "fraudaware/session/portfolio.hpp"
#include "fraudaware/simkit/scenario.hpp"

namespace fraudaware::server {

struct ApiSession {
  std::string id;
  double user_age = 0;
  std::string scenario_id;
  std::string created_at;
  int current_tick = 0;

  bool operator==(const ApiSession&) const = default;
};

json to_json(const ApiSession& s);

/// Environment variable naming the data directory for `serve`.
inline constexpr const char* kDataDirEnv = "FRAUDAWARE_DATA_DIR";

struct ServiceOptions {
  std::filesystem::path data_dir;  // empty keeps everything in memory
  simkit::ScenarioConfig scenario_config = simkit::default_scenario_config();
  std::uint64_t scenario_seed = 42;
  personalize::KnowledgePool pool = personalize::default_knowledge_pool();
  personalize::PipelineConfig pipeline = personalize::default_pipeline_config();
  analytics::CohortSpec cohort = analytics::default_cohort_spec();
  mlcore::ClassifierKind classifier = mlcore::ClassifierKind::Perceptron;
  bool train_on_start = true;
  session::XpRules xp;
  session::FoldOptions fold;
  std::function<std::string()> now;  // timestamps; UTC wall clock when unset
};

/// Reads a server config document over the defaults. Relative paths inside
/// it resolve against `base`.
ServiceOptions service_options_from_json(const json& doc, const std::filesystem::path& base);

struct TradeOutcome {
  session::SessionEvent event;
  session::Portfolio portfolio;
};

enum class ReportSource { Cohort, Sessions };

/// Sessions, their event logs, and the published model. Each session's log
/// is the source of truth: portfolio and footprint are folds over it, and
/// a restarted service rebuilds both from disk. Calls on one session are
/// serialized; different sessions proceed in parallel.
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();

  const simkit::Scenario& scenario() const { return scenario_; }
  const ServiceOptions& options() const { return options_; }

  ApiSession create_session(double user_age);
  ApiSession get_session(const std::string& id) const;
  std::vector<ApiSession> sessions() const;
  /// Moves the session clock forward, stopping at the scenario horizon.
  ApiSession advance(const std::string& id, int ticks);
  void advance_all(int ticks);

  /// Page and article events only; trades and reports have their own
  /// calls. The server assigns seq, session and tick, and fills stock
  /// authenticity and article sentiment/trust from the scenario. A batch
  /// is all-or-nothing: a nesting error (TelemetryError) rejects it whole.
  std::vector<session::SessionEvent> append_events(const std::string& id, std::vector<session::SessionEvent> batch);
  TradeOutcome trade(const std::string& id, const std::string& stock_id, session::Side side, std::int64_t shares,
                     std::optional<double> wall_time = std::nullopt);
  TradeOutcome report_fraud(const std::string& id, const std::string& stock_id,
                            std::optional<double> wall_time = std::nullopt);

  session::Portfolio portfolio(const std::string& id) const;
  /// Completed intervals only; a page still open is not counted yet.
  session::DigitalFootprint footprint(const std::string& id) const;
  std::vector<session::SessionEvent> events(const std::string& id) const;
  /// Latest bundle of the session's feedback loop; NoModel before training.
  personalize::FeedbackBundle feedback(const std::string& id);

  /// Trains on the configured cohort (seed and split count overridable)
  /// and publishes the model atomically.
  std::shared_ptr<const personalize::PipelineModel> train(std::optional<std::uint64_t> cohort_seed = std::nullopt,
                                                          std::optional<int> splits = std::nullopt);
  std::shared_ptr<const personalize::PipelineModel> model() const;
  void publish(std::shared_ptr<const personalize::PipelineModel> model);

  analytics::InsightReport report(ReportSource source);

  json market_view(int tick) const;
  json stock_view(const std::string& stock_id, int tick) const;
  json news_view(int tick) const;
  json chat_view(int tick) const;
  json session_analytics(const std::string& id) const;
  json health() const;

 private:
  struct SessionState;

  std::shared_ptr<SessionState> find(const std::string& id) const;
  void save_manifest() const;
  void load();
  std::string stamp() const;
  std::string next_session_id();
  void commit(SessionState& s, const std::vector<session::SessionEvent>& batch, const session::FootprintAccumulator& acc,
              const session::Portfolio& portfolio);
  personalize::FeedbackLoop& loop_for(SessionState& s, std::shared_ptr<const personalize::PipelineModel> model);

  ServiceOptions options_;
  simkit::Scenario scenario_;
  std::shared_ptr<const personalize::KnowledgePool> pool_;

  mutable std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<SessionState>> sessions_;
  std::uint64_t created_ = 0;

  mutable std::mutex manifest_mu_;
  mutable std::mutex model_mu_;
  std::shared_ptr<const personalize::PipelineModel> model_;
  std::uint64_t model_generation_ = 0;
  std::string last_report_;  // id handed out on feedback bundles
};

}  // namespace fraudaware::server

#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/personalize/knowledge_pool.hpp"
#include "fraudaware/personalize/pipeline.hpp"
#include "fraudaware/session/event.hpp"
#include "fraudaware/session/footprint.hpp"

namespace fraudaware::personalize {

struct FeedbackBundle {
  std::string session_id;
  InvestorType predicted_type = InvestorType::novice();
  double confidence = 0;
  std::vector<GameDesignElement> elements;
  std::vector<simkit::ScamTag> scams;
  simkit::Difficulty difficulty = simkit::Difficulty::Easy;
  std::size_t events_seen = 0;  // stream position the prediction was made at
  // Id of the latest InsightReport. Carried for the personalization engine;
  // nothing consumes it yet.
  std::string insight_report;

  bool operator==(const FeedbackBundle&) const = default;
};

json to_json(const FeedbackBundle& b);
FeedbackBundle feedback_bundle_from_json(const json& doc);

/// Pool entry for the predicted type, copied verbatim.
FeedbackBundle make_bundle(const KnowledgePool& pool, std::string session_id, const TypePrediction& prediction);

struct FeedbackHealth {
  std::size_t events_seen = 0;
  std::size_t events_applied = 0;
  std::size_t malformed = 0;  // rejected by the fold and skipped
  std::size_t refolds = 0;
  std::size_t bundles = 0;
};

/// Live prediction over one session's event stream. The first bundle comes
/// from the footprint before any event; after every `cadence` events the
/// footprint is re-predicted and a bundle is emitted only when the type or
/// the difficulty changes.
class FeedbackLoop {
 public:
  FeedbackLoop(std::shared_ptr<const PipelineModel> model, std::shared_ptr<const KnowledgePool> pool,
               mlcore::ClassifierKind kind, std::string session_id, double user_age, int cadence = 25,
               session::FoldOptions options = {});

  const FeedbackBundle& initial() const { return bundles_.front(); }
  const FeedbackBundle& latest() const { return bundles_.back(); }
  const std::vector<FeedbackBundle>& bundles() const { return bundles_; }

  std::optional<FeedbackBundle> push(const session::SessionEvent& event);
  FeedbackHealth health() const { return health_; }
  session::DigitalFootprint footprint() const { return acc_.snapshot(); }

 private:
  std::optional<FeedbackBundle> refold();

  std::shared_ptr<const PipelineModel> model_;
  std::shared_ptr<const KnowledgePool> pool_;
  mlcore::ClassifierKind kind_;
  std::string session_id_;
  int cadence_;
  session::FootprintAccumulator acc_;
  std::vector<FeedbackBundle> bundles_;
  FeedbackHealth health_;
};

/// Feeds the whole stream through a FeedbackLoop; returns every bundle, the
/// initial one first.
std::vector<FeedbackBundle> run_feedback_loop(std::shared_ptr<const PipelineModel> model,
                                              std::shared_ptr<const KnowledgePool> pool, mlcore::ClassifierKind kind,
                                              const std::string& session_id, double user_age,
                                              std::span<const session::SessionEvent> events, int cadence = 25);

}  // namespace fraudaware::personalize

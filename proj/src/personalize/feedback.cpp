#include "fraudaware/personalize/feedback.hpp"

#include "fraudaware/error.hpp"

namespace fraudaware::personalize {

json to_json(const FeedbackBundle& b) {
  json elements = json::array();
  for (auto e : b.elements) elements.push_back(to_string(e));
  json scams = json::array();
  for (auto s : b.scams) scams.push_back(simkit::to_string(s));
  json j = {{"session", b.session_id},
            {"predicted_type", b.predicted_type.to_string()},
            {"confidence", b.confidence},
            {"elements", elements},
            {"scams", scams},
            {"difficulty", simkit::to_string(b.difficulty)},
            {"events_seen", b.events_seen}};
  if (!b.insight_report.empty()) j["insight_report"] = b.insight_report;
  return j;
}

FeedbackBundle feedback_bundle_from_json(const json& doc) {
  constexpr std::string_view what = "feedback bundle";
  FeedbackBundle b;
  b.session_id = require_field<std::string>(doc, "session", what);
  b.predicted_type = InvestorType::parse(require_field<std::string>(doc, "predicted_type", what));
  b.confidence = require_field<double>(doc, "confidence", what);
  for (const auto& e : require_field<std::vector<std::string>>(doc, "elements", what)) b.elements.push_back(parse_element(e));
  for (const auto& s : require_field<std::vector<std::string>>(doc, "scams", what)) b.scams.push_back(simkit::parse_scam_tag(s));
  b.difficulty = simkit::parse_difficulty(require_field<std::string>(doc, "difficulty", what));
  b.events_seen = doc.value("events_seen", std::size_t{0});
  b.insight_report = doc.value("insight_report", "");
  return b;
}

FeedbackBundle make_bundle(const KnowledgePool& pool, std::string session_id, const TypePrediction& prediction) {
  const auto& entry = select_resources(pool, prediction.type);
  FeedbackBundle b;
  b.session_id = std::move(session_id);
  b.predicted_type = prediction.type;
  b.confidence = prediction.confidence;
  b.elements = entry.elements;
  b.scams = entry.scams;
  b.difficulty = entry.difficulty;
  return b;
}

FeedbackLoop::FeedbackLoop(std::shared_ptr<const PipelineModel> model, std::shared_ptr<const KnowledgePool> pool,
                           mlcore::ClassifierKind kind, std::string session_id, double user_age, int cadence,
                           session::FoldOptions options)
    : model_(std::move(model)),
      pool_(std::move(pool)),
      kind_(kind),
      session_id_(std::move(session_id)),
      cadence_(cadence),
      acc_(user_age, session_id_, options) {
  if (!model_) throw Error(ErrorCode::NoModel, "feedback loop needs a trained model");
  if (!pool_) throw Error(ErrorCode::PoolValidation, "feedback loop needs a knowledge pool");
  if (cadence_ < 1) throw Error(ErrorCode::Config, "feedback cadence must be >= 1");
  auto b = make_bundle(*pool_, session_id_, predict_type(*model_, acc_.snapshot(), kind_));
  bundles_.push_back(std::move(b));
  health_.bundles = 1;
}

std::optional<FeedbackBundle> FeedbackLoop::push(const session::SessionEvent& event) {
  ++health_.events_seen;
  try {
    acc_.apply(event);
    ++health_.events_applied;
  } catch (const Error&) {
    ++health_.malformed;
  }
  if (health_.events_seen % static_cast<std::size_t>(cadence_) != 0) return std::nullopt;
  return refold();
}

std::optional<FeedbackBundle> FeedbackLoop::refold() {
  ++health_.refolds;
  auto b = make_bundle(*pool_, session_id_, predict_type(*model_, acc_.snapshot(), kind_));
  b.events_seen = health_.events_seen;
  const auto& last = bundles_.back();
  if (b.predicted_type == last.predicted_type && b.difficulty == last.difficulty) return std::nullopt;
  bundles_.push_back(b);
  ++health_.bundles;
  return b;
}

std::vector<FeedbackBundle> run_feedback_loop(std::shared_ptr<const PipelineModel> model,
                                              std::shared_ptr<const KnowledgePool> pool, mlcore::ClassifierKind kind,
                                              const std::string& session_id, double user_age,
                                              std::span<const session::SessionEvent> events, int cadence) {
  FeedbackLoop loop(std::move(model), std::move(pool), kind, session_id, user_age, cadence);
  for (const auto& e : events) loop.push(e);
  return loop.bundles();
}

}  // namespace fraudaware::personalize

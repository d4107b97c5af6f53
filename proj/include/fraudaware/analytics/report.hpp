#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/classifier.hpp"
#include "fraudaware/personalize/pipeline.hpp"
#include "fraudaware/session/footprint.hpp"

namespace fraudaware::analytics {

struct DescriptiveEntry {
  std::string id;
  std::string name;   // e.g. "mean(t_market_page)"
  std::string group;  // "Novice", "Experienced", "all", or "Experienced/Novice"
  double value = 0;

  bool operator==(const DescriptiveEntry&) const = default;
};

struct InferentialEntry {
  std::string id;
  std::string test;  // "welch_t"
  std::string metric;
  double statistic = 0;
  double df = 0;
  double p_value = 1;
  std::vector<std::string> groups;

  bool operator==(const InferentialEntry&) const = default;
};

struct NarrativeSentence {
  std::string template_id;
  std::string text;
  std::vector<std::string> refs;  // ids of the entries the sentence quotes

  bool operator==(const NarrativeSentence&) const = default;
};

struct ModelSummary {
  std::vector<std::string> selected_features;
  std::vector<std::pair<std::string, double>> mean_accuracy;  // per classifier kind
  std::size_t predicted_labels = 0;  // footprints labeled by the model

  bool operator==(const ModelSummary&) const = default;
};

struct InsightReport {
  std::string cohort_id;
  std::string generated_at;
  std::vector<DescriptiveEntry> descriptive;
  std::vector<InferentialEntry> inferential;
  std::vector<NarrativeSentence> narrative;
  std::optional<ModelSummary> model;

  const DescriptiveEntry* find_descriptive(std::string_view id) const;
  const InferentialEntry* find_inferential(std::string_view id) const;

  bool operator==(const InsightReport&) const = default;
};

struct ReportOptions {
  std::string cohort_id = "default";
  std::string generated_at;
  double alpha = 0.05;  // narrate inferential results below this p-value
  mlcore::ClassifierKind classifier = mlcore::ClassifierKind::Perceptron;
};

inline constexpr int kReportVersion = 1;

/// Ids used by the two headline insights.
inline constexpr std::string_view kFraudTrapId = "desc.Novice.fraud_trap_fraction";
inline constexpr std::string_view kMarketRatioId = "desc.ratio.t_market_page";

/// With a model, unlabeled footprints get its predicted labels and the
/// report records the selected features and accuracies.
InsightReport build_report(std::span<const session::DigitalFootprint> footprints,
                           const personalize::PipelineModel* model, const ReportOptions& options);

json to_json(const InsightReport& report);
InsightReport insight_report_from_json(const json& doc);
std::string render_text(const InsightReport& report);

/// "<cohort_id>@<generated_at>", the handle feedback bundles carry.
std::string report_id(const InsightReport& report);

/// Replaces every {name} with its binding; throws ContractViolation when a
/// placeholder has no binding.
std::string fill_template(std::string_view text, const std::vector<std::pair<std::string, std::string>>& bindings);

}  // namespace fraudaware::analytics

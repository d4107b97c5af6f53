#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "fraudaware/investor_type.hpp"
#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/classifier.hpp"
#include "fraudaware/mlcore/matrix.hpp"
#include "fraudaware/mlcore/pca.hpp"
#include "fraudaware/session/footprint.hpp"

namespace fraudaware::personalize {

struct PipelineConfig {
  int pca_components = 2;
  std::size_t top_features = 5;
  std::vector<mlcore::ClassifierKind> classifiers{std::begin(mlcore::kAllClassifierKinds),
                                                  std::end(mlcore::kAllClassifierKinds)};
  std::vector<std::uint64_t> split_seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double train_ratio = 0.7;
  mlcore::ClassifierParams params;
  int feedback_cadence = 25;  // events between re-predictions
};

inline constexpr int kPipelineConfigVersion = 1;
inline constexpr int kPipelineModelVersion = 1;

json to_json(const PipelineConfig& config);
/// Missing keys keep their defaults; unknown classifier names are Config errors.
PipelineConfig pipeline_config_from_json(const json& doc);
PipelineConfig default_pipeline_config();

/// One row per footprint, the 17 metrics in canonical order. Labels are the
/// binary class ids and are attached only when every footprint has one.
mlcore::FeatureMatrix build_training_table(std::span<const session::DigitalFootprint> footprints);

struct ClassifierEvaluation {
  mlcore::ClassifierKind kind = mlcore::ClassifierKind::DecisionTree;
  std::vector<double> split_accuracy;  // one per configured split seed
  double mean_accuracy = 0;

  bool operator==(const ClassifierEvaluation&) const = default;
};

struct PipelineModel {
  std::vector<std::string> col_names;
  mlcore::Standardization standardization;
  mlcore::PcaModel pca;
  std::vector<std::size_t> selected;  // column indices, best first
  std::map<mlcore::ClassifierKind, mlcore::Classifier> classifiers;
  std::vector<ClassifierEvaluation> evaluation;

  std::vector<std::string> selected_names() const;
  /// Standardized, then restricted to the selected columns.
  mlcore::Vector features(const session::DigitalFootprint& fp) const;
  mlcore::Matrix features(const mlcore::Matrix& raw) const;
};

/// Standardize, fit PCA, keep the top features, then for each configured
/// kind: mean test accuracy over the stratified splits, and a final model
/// fitted on every row. Errors carry the failing stage in their message.
PipelineModel train_pipeline(const mlcore::FeatureMatrix& table, const PipelineConfig& config);

json to_json(const PipelineModel& model);
PipelineModel pipeline_model_from_json(const json& doc);

struct TypePrediction {
  InvestorType type = InvestorType::novice();
  double confidence = 0;
};

/// Throws NoModel when the model holds no classifier of that kind.
TypePrediction predict_type(const PipelineModel& model, const session::DigitalFootprint& fp,
                            mlcore::ClassifierKind kind);

}  // namespace fraudaware::personalize

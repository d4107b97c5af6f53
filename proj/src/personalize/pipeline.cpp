#include "fraudaware/personalize/pipeline.hpp"

#include <numeric>

#include "fraudaware/defaults.hpp"
#include "fraudaware/error.hpp"
#include "fraudaware/mlcore/serialize.hpp"

namespace fraudaware::personalize {

using mlcore::ClassifierKind;

namespace {

template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "pipeline " + std::string(name) + ": " + e.what());
  }
}

}  // namespace

json to_json(const PipelineConfig& c) {
  json kinds = json::array();
  for (auto k : c.classifiers) kinds.push_back(mlcore::to_string(k));
  const auto& p = c.params;
  return {{"version", kPipelineConfigVersion},
          {"pca_components", c.pca_components},
          {"top_features", c.top_features},
          {"classifiers", kinds},
          {"split_seeds", c.split_seeds},
          {"train_ratio", c.train_ratio},
          {"feedback_cadence", c.feedback_cadence},
          {"decision_tree", {{"max_depth", p.tree.max_depth}, {"min_leaf", p.tree.min_leaf}}},
          {"gbt",
           {{"n_rounds", p.gbt.n_rounds},
            {"learning_rate", p.gbt.learning_rate},
            {"max_depth", p.gbt.max_depth},
            {"min_leaf", p.gbt.min_leaf}}},
          {"mlp",
           {{"hidden", p.mlp.hidden},
            {"activation", mlcore::to_string(p.mlp.activation)},
            {"epochs", p.mlp.epochs},
            {"learning_rate", p.mlp.learning_rate},
            {"seed", p.mlp.seed}}}};
}

PipelineConfig pipeline_config_from_json(const json& doc) {
  require_version(doc, kPipelineConfigVersion, "pipeline config");
  PipelineConfig c;
  try {
    c.pca_components = doc.value("pca_components", c.pca_components);
    c.top_features = doc.value("top_features", c.top_features);
    if (doc.contains("classifiers")) {
      c.classifiers.clear();
      for (const auto& name : doc.at("classifiers").get<std::vector<std::string>>()) {
        c.classifiers.push_back(mlcore::parse_classifier_kind(name));
      }
    }
    c.split_seeds = doc.value("split_seeds", c.split_seeds);
    c.train_ratio = doc.value("train_ratio", c.train_ratio);
    c.feedback_cadence = doc.value("feedback_cadence", c.feedback_cadence);
    auto& p = c.params;
    if (doc.contains("decision_tree")) {
      const auto& t = doc.at("decision_tree");
      p.tree.max_depth = t.value("max_depth", p.tree.max_depth);
      p.tree.min_leaf = t.value("min_leaf", p.tree.min_leaf);
    }
    if (doc.contains("gbt")) {
      const auto& g = doc.at("gbt");
      p.gbt.n_rounds = g.value("n_rounds", p.gbt.n_rounds);
      p.gbt.learning_rate = g.value("learning_rate", p.gbt.learning_rate);
      p.gbt.max_depth = g.value("max_depth", p.gbt.max_depth);
      p.gbt.min_leaf = g.value("min_leaf", p.gbt.min_leaf);
    }
    if (doc.contains("mlp")) {
      const auto& m = doc.at("mlp");
      p.mlp.hidden = m.value("hidden", p.mlp.hidden);
      if (m.contains("activation")) p.mlp.activation = mlcore::parse_activation(m.at("activation").get<std::string>());
      p.mlp.epochs = m.value("epochs", p.mlp.epochs);
      p.mlp.learning_rate = m.value("learning_rate", p.mlp.learning_rate);
      p.mlp.seed = m.value("seed", p.mlp.seed);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("pipeline config: ") + e.what());
  }
  if (c.pca_components < 1) throw Error(ErrorCode::Config, "pipeline config: pca_components must be >= 1");
  if (c.top_features < 1) throw Error(ErrorCode::Config, "pipeline config: top_features must be >= 1");
  if (c.feedback_cadence < 1) throw Error(ErrorCode::Config, "pipeline config: feedback_cadence must be >= 1");
  return c;
}

PipelineConfig default_pipeline_config() {
  return pipeline_config_from_json(parse_json(defaults::pipeline_json(), "default pipeline config"));
}

mlcore::FeatureMatrix build_training_table(std::span<const session::DigitalFootprint> footprints) {
  if (footprints.empty()) throw Error(ErrorCode::Validation, "training table: no footprints");
  mlcore::FeatureMatrix t;
  t.col_names.assign(session::kMetricNames.begin(), session::kMetricNames.end());
  t.values.resize(static_cast<Eigen::Index>(footprints.size()), static_cast<Eigen::Index>(session::kMetricCount));
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < footprints.size(); ++i) {
    session::validate_footprint(footprints[i]);
    for (std::size_t c = 0; c < session::kMetricCount; ++c) {
      t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = footprints[i].metrics[c];
    }
    labeled += footprints[i].label.has_value();
  }
  if (labeled == footprints.size()) {
    mlcore::Labels y;
    for (const auto& fp : footprints) y.push_back(fp.label->class_id());
    t.labels = std::move(y);
  }
  return t;
}

std::vector<std::string> PipelineModel::selected_names() const {
  std::vector<std::string> out;
  for (auto i : selected) out.push_back(col_names[i]);
  return out;
}

mlcore::Matrix PipelineModel::features(const mlcore::Matrix& raw) const {
  const mlcore::Matrix z = standardization.apply(raw);
  mlcore::Matrix out(z.rows(), static_cast<Eigen::Index>(selected.size()));
  for (std::size_t j = 0; j < selected.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = z.col(static_cast<Eigen::Index>(selected[j]));
  }
  return out;
}

mlcore::Vector PipelineModel::features(const session::DigitalFootprint& fp) const {
  mlcore::Matrix raw(1, static_cast<Eigen::Index>(session::kMetricCount));
  for (std::size_t c = 0; c < session::kMetricCount; ++c) raw(0, static_cast<Eigen::Index>(c)) = fp.metrics[c];
  return features(raw).row(0).transpose();
}

PipelineModel train_pipeline(const mlcore::FeatureMatrix& table, const PipelineConfig& config) {
  if (config.classifiers.empty()) throw Error(ErrorCode::Config, "pipeline: no classifier kinds configured");
  stage("input", [&] { mlcore::validate(table); });
  const mlcore::Labels& y = stage("input", [&]() -> const mlcore::Labels& { return table.require_labels(); });

  PipelineModel m;
  m.col_names = table.col_names;
  m.standardization = stage("standardize", [&] { return mlcore::fit_standardization(table.values); });
  m.pca = stage("pca", [&] { return mlcore::pca_fit(table.values, config.pca_components); });
  m.selected = stage("feature selection", [&] { return mlcore::pca_top_feature_indices(m.pca, config.top_features); });
  const mlcore::Matrix x = m.features(table.values);

  std::vector<mlcore::Split> splits;
  for (auto seed : config.split_seeds) {
    splits.push_back(stage("split", [&] { return mlcore::stratified_split(y, config.train_ratio, seed); }));
  }
  auto rows_of = [&](const std::vector<std::size_t>& idx) {
    mlcore::Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
    return out;
  };
  auto labels_of = [&](const std::vector<std::size_t>& idx) {
    mlcore::Labels out;
    for (auto i : idx) out.push_back(y[i]);
    return out;
  };

  for (auto kind : config.classifiers) {
    if (m.classifiers.count(kind)) continue;
    const std::string name = "training " + std::string(mlcore::to_string(kind));
    ClassifierEvaluation ev;
    ev.kind = kind;
    for (const auto& s : splits) {
      const auto c = stage(name, [&] { return mlcore::fit_classifier(kind, rows_of(s.train), labels_of(s.train), config.params); });
      ev.split_accuracy.push_back(mlcore::accuracy(c, rows_of(s.test), labels_of(s.test)));
    }
    if (!ev.split_accuracy.empty()) {
      ev.mean_accuracy = std::accumulate(ev.split_accuracy.begin(), ev.split_accuracy.end(), 0.0) /
                         static_cast<double>(ev.split_accuracy.size());
    }
    m.evaluation.push_back(std::move(ev));
    m.classifiers.emplace(kind, stage(name, [&] { return mlcore::fit_classifier(kind, x, y, config.params); }));
  }
  return m;
}

json to_json(const PipelineModel& m) {
  json classifiers = json::object();
  for (const auto& [kind, c] : m.classifiers) classifiers[std::string(mlcore::to_string(kind))] = mlcore::to_json(c);
  json evaluation = json::array();
  for (const auto& ev : m.evaluation) {
    evaluation.push_back({{"kind", mlcore::to_string(ev.kind)},
                          {"split_accuracy", ev.split_accuracy},
                          {"mean_accuracy", ev.mean_accuracy}});
  }
  return {{"version", kPipelineModelVersion},
          {"col_names", m.col_names},
          {"standardization",
           {{"mean", mlcore::vector_to_json(m.standardization.mean)},
            {"scale", mlcore::vector_to_json(m.standardization.scale)}}},
          {"pca", mlcore::to_json(m.pca)},
          {"selected", m.selected},
          {"classifiers", classifiers},
          {"evaluation", evaluation}};
}

PipelineModel pipeline_model_from_json(const json& doc) {
  require_version(doc, kPipelineModelVersion, "pipeline model");
  PipelineModel m;
  try {
    m.col_names = doc.at("col_names").get<std::vector<std::string>>();
    m.standardization.mean = mlcore::vector_from_json(doc.at("standardization").at("mean"));
    m.standardization.scale = mlcore::vector_from_json(doc.at("standardization").at("scale"));
    m.pca = mlcore::pca_from_json(doc.at("pca"));
    m.selected = doc.at("selected").get<std::vector<std::size_t>>();
    for (const auto& [name, c] : doc.at("classifiers").items()) {
      m.classifiers.emplace(mlcore::parse_classifier_kind(name), mlcore::classifier_from_json(c));
    }
    for (const auto& ev : doc.at("evaluation")) {
      m.evaluation.push_back({mlcore::parse_classifier_kind(ev.at("kind").get<std::string>()),
                              ev.at("split_accuracy").get<std::vector<double>>(), ev.at("mean_accuracy").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("pipeline model: ") + e.what());
  }
  const auto d = static_cast<Eigen::Index>(m.col_names.size());
  if (m.standardization.mean.size() != d || m.standardization.scale.size() != d) {
    throw Error(ErrorCode::Schema, "pipeline model: standardization does not match col_names");
  }
  for (auto i : m.selected) {
    if (static_cast<Eigen::Index>(i) >= d) throw Error(ErrorCode::Schema, "pipeline model: selected column out of range");
  }
  return m;
}

TypePrediction predict_type(const PipelineModel& model, const session::DigitalFootprint& fp, ClassifierKind kind) {
  const auto it = model.classifiers.find(kind);
  if (it == model.classifiers.end()) {
    throw Error(ErrorCode::NoModel, "no trained " + std::string(mlcore::to_string(kind)) + " classifier");
  }
  const auto p = it->second.predict(model.features(fp));
  return {InvestorType::from_class_id(p.label), p.confidence};
}

}  // namespace fraudaware::personalize

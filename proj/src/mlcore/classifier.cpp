#include "fraudaware/mlcore/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fraudaware/error.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::mlcore {

std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::DecisionTree: return "DecisionTree";
    case ClassifierKind::GradientBoostedTrees: return "GradientBoostedTrees";
    case ClassifierKind::Perceptron: return "Perceptron";
  }
  return "?";
}

ClassifierKind parse_classifier_kind(std::string_view s) {
  for (auto k : kAllClassifierKinds) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::Config, "unknown classifier kind '" + std::string(s) + "'");
}

ClassifierKind Classifier::kind() const { return static_cast<ClassifierKind>(model.index()); }

Prediction Classifier::predict(const Vector& x) const {
  return std::visit(
      [&](const auto& m) -> Prediction {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, DecisionTree>) {
          const Vector p = m.predict_proba(x);
          const int label = m.predict(x);
          const auto slot = std::lower_bound(m.classes.begin(), m.classes.end(), label) - m.classes.begin();
          return {label, p(slot)};
        } else if constexpr (std::is_same_v<T, GbtModel>) {
          const int label = m.predict(x);
          const double pos = m.predict_positive(x);
          return {label, m.classes.size() < 2 || label == m.classes[1] ? pos : 1.0 - pos};
        } else {
          const Vector p = m.predict_proba(x);
          Eigen::Index arg = 0;
          const double conf = p.maxCoeff(&arg);
          if (m.classes.empty()) throw Error(ErrorCode::NoModel, "mlp model is empty");
          return {m.classes[static_cast<std::size_t>(arg)], conf};
        }
      },
      model);
}

std::vector<int> Classifier::predict_all(const Matrix& x) const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.push_back(predict(x.row(i).transpose()).label);
  return out;
}

Classifier fit_classifier(ClassifierKind kind, const Matrix& x, const Labels& y, const ClassifierParams& p) {
  switch (kind) {
    case ClassifierKind::DecisionTree: return {tree_fit(x, y, p.tree)};
    case ClassifierKind::GradientBoostedTrees: return {gbt_fit(x, y, p.gbt)};
    case ClassifierKind::Perceptron: return {mlp_fit(x, y, p.mlp)};
  }
  throw Error(ErrorCode::ContractViolation, "unreachable classifier kind");
}

json to_json(const Classifier& c) {
  json params = std::visit([](const auto& m) { return to_json(m); }, c.model);
  return {{"version", kModelVersion}, {"kind", to_string(c.kind())}, {"params", std::move(params)}};
}

Classifier classifier_from_json(const json& doc) {
  require_version(doc, kModelVersion, "classifier");
  const auto kind = parse_classifier_kind(require_field<std::string>(doc, "kind", "classifier"));
  const json& p = doc.at("params");
  try {
    switch (kind) {
      case ClassifierKind::DecisionTree: return {decision_tree_from_json(p)};
      case ClassifierKind::GradientBoostedTrees: return {gbt_from_json(p)};
      case ClassifierKind::Perceptron: return {mlp_from_json(p)};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Schema, std::string("classifier params: ") + e.what());
  }
  throw Error(ErrorCode::ContractViolation, "unreachable classifier kind");
}

Split stratified_split(const Labels& labels, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::Domain, "split ratio must lie strictly between 0 and 1");
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  SplitMix64 rng(seed);
  Split s;
  for (auto& [cls, rows] : by_class) {
    if (rows.size() < 2) {
      throw Error(ErrorCode::Domain, "class " + std::to_string(cls) + " has fewer than 2 members; cannot stratify");
    }
    shuffle(std::span<std::size_t>(rows), rng);
    const auto want = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(rows.size())));
    const auto n_train = std::clamp<std::size_t>(want, 1, rows.size() - 1);
    s.train.insert(s.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test.insert(s.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

double accuracy(const std::vector<int>& predicted, const Labels& truth) {
  if (truth.empty()) throw Error(ErrorCode::Domain, "accuracy of an empty set");
  if (predicted.size() != truth.size()) throw Error(ErrorCode::Validation, "accuracy: length mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double accuracy(const Classifier& c, const Matrix& x, const Labels& truth) {
  if (truth.empty()) throw Error(ErrorCode::Domain, "accuracy of an empty set");
  return accuracy(c.predict_all(x), truth);
}

}  // namespace fraudaware::mlcore

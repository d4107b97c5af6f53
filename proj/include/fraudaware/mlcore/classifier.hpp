#pragma once

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/gbt.hpp"
#include "fraudaware/mlcore/matrix.hpp"
#include "fraudaware/mlcore/mlp.hpp"
#include "fraudaware/mlcore/tree.hpp"

namespace fraudaware::mlcore {

enum class ClassifierKind { DecisionTree, GradientBoostedTrees, Perceptron };

std::string_view to_string(ClassifierKind k);
ClassifierKind parse_classifier_kind(std::string_view s);
inline constexpr ClassifierKind kAllClassifierKinds[] = {ClassifierKind::DecisionTree,
                                                          ClassifierKind::GradientBoostedTrees,
                                                          ClassifierKind::Perceptron};

struct Prediction {
  int label = 0;
  double confidence = 0;  // model probability of `label`, in [0, 1]
};

struct Classifier {
  std::variant<DecisionTree, GbtModel, MlpModel> model;

  ClassifierKind kind() const;
  Prediction predict(const Vector& x) const;
  std::vector<int> predict_all(const Matrix& x) const;

  bool operator==(const Classifier&) const = default;
};

struct ClassifierParams {
  TreeParams tree{5, 1};
  GbtParams gbt;
  MlpParams mlp;
};

Classifier fit_classifier(ClassifierKind kind, const Matrix& x, const Labels& y, const ClassifierParams& params = {});

inline constexpr int kModelVersion = 1;

/// {"version", "kind", "params"}; reloads compare equal to the original.
json to_json(const Classifier& c);
Classifier classifier_from_json(const json& doc);

/// Row indices of a stratified split. Each class is shuffled on its own
/// (classes in ascending id order, one generator) and its first
/// floor(ratio * size), clamped to [1, size - 1], rows go to train.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Throws Domain unless 0 < ratio < 1 and every class has >= 2 members.
Split stratified_split(const Labels& labels, double ratio, std::uint64_t seed);

/// Fraction of matching positions; throws Domain on empty input.
double accuracy(const std::vector<int>& predicted, const Labels& truth);
double accuracy(const Classifier& c, const Matrix& x, const Labels& truth);

}  // namespace fraudaware::mlcore

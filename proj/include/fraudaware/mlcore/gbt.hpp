#pragma once

#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/tree.hpp"

namespace fraudaware::mlcore {

struct GbtParams {
  int n_rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;
  int min_leaf = 1;
};

/// Binary gradient boosting on logistic loss. The larger of the two class
/// ids is the positive class.
struct GbtModel {
  std::vector<int> classes;  // {negative, positive}, or a single class
  double init_score = 0;     // log-odds of the positive class
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  std::vector<double> loss_history;  // mean training log-loss, before round 1 then after each round

  double decision_function(const Vector& x) const;
  /// P(positive class).
  double predict_positive(const Vector& x) const;
  int predict(const Vector& x) const;

  bool operator==(const GbtModel&) const = default;
};

/// Each round fits a least-squares tree to the residuals y - p and adds
/// learning_rate times its output to the score. Labels with one distinct
/// value give a constant model for that value. More than two classes is a
/// Domain error.
GbtModel gbt_fit(const Matrix& x, const Labels& y, const GbtParams& params = {});

json to_json(const GbtModel& model);
GbtModel gbt_from_json(const json& doc);

}  // namespace fraudaware::mlcore

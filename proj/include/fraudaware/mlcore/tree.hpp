#pragma once

#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/matrix.hpp"

namespace fraudaware::mlcore {

/// One node of a binary tree. Rows with x[feature] <= threshold go left.
/// Leaves have feature = -1. `value` holds class counts for classification
/// trees and a single mean for regression trees.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  std::vector<double> value;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct TreeParams {
  int max_depth = -1;  // negative means unbounded
  int min_leaf = 1;
};

struct DecisionTree {
  std::vector<int> classes;  // sorted class ids; value[i] counts classes[i]
  std::vector<TreeNode> nodes;
  int n_features = 0;

  const TreeNode& leaf_for(const Vector& x) const;
  int predict(const Vector& x) const;
  /// Class fractions at the reached leaf, aligned with `classes`.
  Vector predict_proba(const Vector& x) const;
  int depth() const;

  bool operator==(const DecisionTree&) const = default;
};

/// CART with Gini impurity. Thresholds are midpoints between consecutive
/// distinct values; the best split maximizes impurity decrease with ties
/// going to the lowest feature, then the lowest threshold. An impure node
/// is split even when no split lowers impurity (e.g. XOR), as long as the
/// depth budget allows and some feature still varies. Leaf majority ties go
/// to the lowest class id.
DecisionTree tree_fit(const Matrix& x, const Labels& y, const TreeParams& params = {});

struct RegressionTree {
  std::vector<TreeNode> nodes;

  double predict(const Vector& x) const;

  bool operator==(const RegressionTree&) const = default;
};

/// Least-squares tree with mean leaves; splits only when squared error drops.
RegressionTree regression_tree_fit(const Matrix& x, const Vector& y, const TreeParams& params = {});

json to_json(const DecisionTree& tree);
DecisionTree decision_tree_from_json(const json& doc);
json to_json(const RegressionTree& tree);
RegressionTree regression_tree_from_json(const json& doc);

}  // namespace fraudaware::mlcore

#pragma once

#include <string>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/matrix.hpp"

namespace fraudaware::mlcore {

struct PcaModel {
  Vector mean;
  Vector scale;
  Matrix components;           // k x d, orthonormal rows
  Vector explained_variance;   // k, non-increasing
  double total_variance = 0;   // trace of the standardized covariance

  Eigen::Index k() const { return components.rows(); }
  /// Scores in component space (n x k).
  Matrix transform(const Matrix& x) const;
  /// Mean squared error of the rank-k reconstruction, in standardized units.
  double reconstruction_error(const Matrix& x) const;
};

/// Standardizes x, then takes the top-k eigenvectors of the sample
/// covariance (divisor n - 1). Each component is signed so that its
/// largest-magnitude coordinate is positive. Requires 1 <= k <= min(n-1, d).
PcaModel pca_fit(const Matrix& x, Eigen::Index k);

/// Per-feature importance: sum_j explained_variance[j] * components[j][f]^2.
Vector pca_feature_scores(const PcaModel& model);

/// Indices of the m highest-scoring original features, ties to the lower index.
std::vector<std::size_t> pca_top_feature_indices(const PcaModel& model, std::size_t m);
std::vector<std::string> pca_top_features(const PcaModel& model, const std::vector<std::string>& col_names,
                                          std::size_t m);

json to_json(const PcaModel& model);
PcaModel pca_from_json(const json& doc);

}  // namespace fraudaware::mlcore

#pragma once

#include <cstdint>
#include <vector>

#include "fraudaware/mlcore/matrix.hpp"

namespace fraudaware::mlcore {

struct KMeansParams {
  int max_iter = 300;
  double tol = 1e-6;  // stop once no centroid moves further than this
  int n_init = 10;    // k-means++ restarts; the lowest inertia wins
};

struct KMeansModel {
  int k = 0;
  Matrix centroids;  // k x d
  double inertia = 0;
  int n_iter = 0;
  std::vector<int> assignment;           // training rows
  std::vector<double> inertia_history;   // per Lloyd iteration of the winning run

  std::vector<int> predict(const Matrix& x) const;
};

/// Lloyd's algorithm from k-means++ seeds. An emptied cluster is refilled
/// with the point farthest from its current centroid. Once Lloyd settles,
/// single-point transfers that lower the inertia are applied and Lloyd
/// resumes, until neither changes anything. The returned assignment is a
/// fixed point of nearest-centroid reassignment.
KMeansModel kmeans_fit(const Matrix& x, int k, std::uint64_t seed, const KMeansParams& params = {});

/// The same refinement from the given starting centroids, no restarts.
KMeansModel kmeans_refine(const Matrix& x, const Matrix& initial_centroids, const KMeansParams& params = {});

/// Sum over rows of the squared distance to the nearest centroid.
double kmeans_inertia(const Matrix& x, const Matrix& centroids);

struct ElbowResult {
  int chosen_k = 0;
  std::vector<int> ks;
  std::vector<double> inertia;
};

/// Fits every k in [k_min, k_max] and picks the interior k with the largest
/// second difference of the inertia curve. Each k also tries a warm start
/// from the (k-1) solution plus one new seed, so the curve never rises.
ElbowResult elbow_select(const Matrix& x, int k_min, int k_max, std::uint64_t seed, const KMeansParams& params = {});

}  // namespace fraudaware::mlcore

#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary. Each is written from the textbook definition, sharing
// no code with the library beyond its matrix types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "fraudaware/mlcore/matrix.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::testing {

using mlcore::Labels;
using mlcore::Matrix;
using mlcore::Vector;

inline Matrix gaussian(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal();
  }
  return x;
}

// ---- power iteration oracle for PCA -----------------------------------------------

struct Eig {
  std::vector<double> values;
  std::vector<Vector> vectors;
};

inline Eig power_iteration(Matrix c, int k) {
  Eig out;
  for (int j = 0; j < k; ++j) {
    Vector v = Vector::Ones(c.rows()).normalized();
    for (int it = 0; it < 20000; ++it) {
      Vector w = c * v;
      if (w.norm() == 0) break;
      w.normalize();
      if ((w - v).norm() < 1e-15) {
        v = w;
        break;
      }
      v = w;
    }
    const double lambda = v.dot(c * v);
    out.values.push_back(lambda);
    out.vectors.push_back(v);
    c -= lambda * v * v.transpose();
  }
  return out;
}

// ---- exhaustive 2-partition oracle for k-means --------------------------------------

inline double best_two_partition(const Matrix& x) {
  const auto n = x.rows();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double cost = 0;
    for (int side = 0; side < 2; ++side) {
      std::vector<Eigen::Index> idx;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (((mask >> i) & 1u) == static_cast<std::uint32_t>(side)) idx.push_back(i);
      }
      Vector mu = Vector::Zero(x.cols());
      for (auto i : idx) mu += x.row(i).transpose();
      mu /= static_cast<double>(idx.size());
      for (auto i : idx) cost += (x.row(i).transpose() - mu).squaredNorm();
    }
    best = std::min(best, cost);
  }
  return best;
}

// ---- depth-2 enumeration oracle for CART --------------------------------------------
// Computes every candidate split's Gini decrease from scratch and selects by
// the same published rule (largest decrease; ties to lowest feature, then
// lowest threshold), without the running-count machinery of the library.

struct Cand {
  int f;
  double t;
  double gain;
};

inline double gini_of(const std::vector<int>& labels) {
  std::map<int, int> c;
  for (int l : labels) ++c[l];
  double s = 0;
  for (auto [k, v] : c) s += std::pow(static_cast<double>(v) / static_cast<double>(labels.size()), 2);
  return 1 - s;
}

inline std::vector<Cand> all_splits(const Matrix& x, const Labels& y, const std::vector<int>& rows) {
  std::vector<Cand> out;
  std::vector<int> lab;
  for (int r : rows) lab.push_back(y[static_cast<std::size_t>(r)]);
  const double parent = gini_of(lab);
  for (int f = 0; f < x.cols(); ++f) {
    std::set<double> vals;
    for (int r : rows) vals.insert(x(r, f));
    std::vector<double> v(vals.begin(), vals.end());
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      const double t = (v[i] + v[i + 1]) / 2;
      std::vector<int> l, r;
      for (int row : rows) (x(row, f) <= t ? l : r).push_back(y[static_cast<std::size_t>(row)]);
      const double n = static_cast<double>(rows.size());
      const double gain = parent - (static_cast<double>(l.size()) * gini_of(l) + static_cast<double>(r.size()) * gini_of(r)) / n;
      out.push_back({f, t, gain});
    }
  }
  return out;
}

inline std::optional<Cand> cart_choice(const Matrix& x, const Labels& y, const std::vector<int>& rows) {
  std::vector<int> lab;
  for (int r : rows) lab.push_back(y[static_cast<std::size_t>(r)]);
  if (gini_of(lab) <= 0) return std::nullopt;
  auto c = all_splits(x, y, rows);
  if (c.empty()) return std::nullopt;
  double top = -1;
  for (auto& s : c) top = std::max(top, s.gain);
  std::optional<Cand> pick;
  for (auto& s : c) {
    if (s.gain < top - 1e-12) continue;
    if (!pick || s.f < pick->f || (s.f == pick->f && s.t < pick->t)) pick = s;
  }
  return pick;
}

inline int majority(const Labels& y, const std::vector<int>& rows) {
  std::map<int, int> c;
  for (int r : rows) ++c[y[static_cast<std::size_t>(r)]];
  int best = 0, best_n = -1;
  for (auto [k, v] : c) {
    if (v > best_n) {
      best = k;
      best_n = v;
    }
  }
  return best;
}

// Correct training predictions for a subtree rooted at `rows` with `depth` levels left.
inline int oracle_hits(const Matrix& x, const Labels& y, const std::vector<int>& rows, int depth,
                const std::function<std::optional<Cand>(const std::vector<int>&)>& choose) {
  std::optional<Cand> s = depth > 0 ? choose(rows) : std::nullopt;
  if (!s) {
    const int m = majority(y, rows);
    return static_cast<int>(std::count_if(rows.begin(), rows.end(), [&](int r) { return y[static_cast<std::size_t>(r)] == m; }));
  }
  std::vector<int> l, r;
  for (int row : rows) (x(row, s->f) <= s->t ? l : r).push_back(row);
  return oracle_hits(x, y, l, depth - 1, choose) + oracle_hits(x, y, r, depth - 1, choose);
}

// Best achievable correct count over every depth<=`depth` midpoint tree.
inline int optimal_hits(const Matrix& x, const Labels& y, const std::vector<int>& rows, int depth) {
  const int leaf = oracle_hits(x, y, rows, 0, nullptr);
  if (depth == 0) return leaf;
  int best = leaf;
  for (const auto& s : all_splits(x, y, rows)) {
    std::vector<int> l, r;
    for (int row : rows) (x(row, s.f) <= s.t ? l : r).push_back(row);
    best = std::max(best, optimal_hits(x, y, l, depth - 1) + optimal_hits(x, y, r, depth - 1));
  }
  return best;
}

}  // namespace fraudaware::testing

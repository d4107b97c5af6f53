#include "fraudaware/mlcore/kmeans.hpp"

#include <limits>

#include "fraudaware/error.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::mlcore {

namespace {

struct Assignment {
  std::vector<int> label;
  std::vector<double> dist2;
  double inertia = 0;
};

Assignment assign(const Matrix& x, const Matrix& c) {
  Assignment a;
  a.label.resize(static_cast<std::size_t>(x.rows()));
  a.dist2.resize(a.label.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double d = (x.row(i) - c.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    a.label[static_cast<std::size_t>(i)] = best;
    a.dist2[static_cast<std::size_t>(i)] = best_d;
    a.inertia += best_d;
  }
  return a;
}

// D^2-weighted choice of one more seed given the current ones.
Eigen::Index next_plus_plus(const Matrix& x, const Matrix& seeds, SplitMix64& rng) {
  const auto a = assign(x, seeds);
  if (a.inertia <= 0) return static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(x.rows())));
  double target = rng.uniform() * a.inertia;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    target -= a.dist2[static_cast<std::size_t>(i)];
    if (target < 0) return i;
  }
  // Rounding left a sliver; take the last point with positive weight.
  for (Eigen::Index i = x.rows() - 1; i >= 0; --i) {
    if (a.dist2[static_cast<std::size_t>(i)] > 0) return i;
  }
  return 0;
}

Matrix plus_plus_seeds(const Matrix& x, int k, SplitMix64& rng) {
  Matrix seeds(k, x.cols());
  seeds.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(x.rows()))));
  for (int j = 1; j < k; ++j) {
    seeds.row(j) = x.row(next_plus_plus(x, seeds.topRows(j), rng));
  }
  return seeds;
}

Eigen::Index farthest_point(const Matrix& x, const Matrix& centroids) {
  const auto a = assign(x, centroids);
  Eigen::Index best = 0;
  for (std::size_t i = 1; i < a.dist2.size(); ++i) {
    if (a.dist2[i] > a.dist2[static_cast<std::size_t>(best)]) best = static_cast<Eigen::Index>(i);
  }
  return best;
}

}  // namespace

std::vector<int> KMeansModel::predict(const Matrix& x) const { return assign(x, centroids).label; }

double kmeans_inertia(const Matrix& x, const Matrix& centroids) { return assign(x, centroids).inertia; }

namespace {

void lloyd(const Matrix& x, KMeansModel& m, const KMeansParams& params) {
  std::vector<int> previous;
  for (int iter = 0; iter < params.max_iter; ++iter) {
    auto a = assign(x, m.centroids);
    m.inertia_history.push_back(a.inertia);
    ++m.n_iter;

    std::vector<int> sizes(static_cast<std::size_t>(m.k), 0);
    for (int l : a.label) ++sizes[static_cast<std::size_t>(l)];
    bool repaired = false;
    for (int c = 0; c < m.k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      // Steal the worst-served point from a cluster that can spare it.
      std::size_t worst = a.label.size();
      for (std::size_t i = 0; i < a.label.size(); ++i) {
        if (sizes[static_cast<std::size_t>(a.label[i])] < 2) continue;
        if (worst == a.label.size() || a.dist2[i] > a.dist2[worst]) worst = i;
      }
      if (worst == a.label.size()) break;  // k > number of rows that can move
      --sizes[static_cast<std::size_t>(a.label[worst])];
      a.label[worst] = c;
      a.dist2[worst] = 0;
      sizes[static_cast<std::size_t>(c)] = 1;
      m.centroids.row(c) = x.row(static_cast<Eigen::Index>(worst));
      repaired = true;
    }
    if (!repaired && a.label == previous) break;

    Matrix next = Matrix::Zero(m.k, x.cols());
    for (std::size_t i = 0; i < a.label.size(); ++i) next.row(a.label[i]) += x.row(static_cast<Eigen::Index>(i));
    for (int c = 0; c < m.k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) {
        next.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
      } else {
        next.row(c) = m.centroids.row(c);
      }
    }
    const double shift = (next - m.centroids).rowwise().norm().maxCoeff();
    m.centroids = std::move(next);
    previous = std::move(a.label);
    if (!repaired && shift < params.tol) break;
  }
}

// One sweep of single-point transfers (Hartigan & Wong's criterion): move a
// point when the drop in its old cluster's squared error exceeds the rise in
// the new one's, accounting for both centroids shifting. Lloyd fixed points
// can still be improved this way; returns whether anything moved.
bool transfer_sweep(const Matrix& x, KMeansModel& m) {
  auto a = assign(x, m.centroids);
  std::vector<double> size(static_cast<std::size_t>(m.k), 0.0);
  Matrix mean = Matrix::Zero(m.k, x.cols());
  for (std::size_t i = 0; i < a.label.size(); ++i) {
    size[static_cast<std::size_t>(a.label[i])] += 1;
    mean.row(a.label[i]) += x.row(static_cast<Eigen::Index>(i));
  }
  for (int c = 0; c < m.k; ++c) {
    if (size[static_cast<std::size_t>(c)] > 0) mean.row(c) /= size[static_cast<std::size_t>(c)];
    else mean.row(c) = m.centroids.row(c);
  }
  bool moved = false;
  for (std::size_t i = 0; i < a.label.size(); ++i) {
    const int from = a.label[i];
    const double nf = size[static_cast<std::size_t>(from)];
    if (nf < 2) continue;
    const auto xi = x.row(static_cast<Eigen::Index>(i));
    const double remove_gain = nf / (nf - 1) * (xi - mean.row(from)).squaredNorm();
    int to = -1;
    double best_cost = remove_gain;
    for (int c = 0; c < m.k; ++c) {
      if (c == from) continue;
      const double nc = size[static_cast<std::size_t>(c)];
      const double cost = nc / (nc + 1) * (xi - mean.row(c)).squaredNorm();
      if (cost < best_cost - 1e-12 * (1.0 + remove_gain)) {
        best_cost = cost;
        to = c;
      }
    }
    if (to < 0) continue;
    const double nt = size[static_cast<std::size_t>(to)];
    mean.row(from) = (mean.row(from) * nf - xi) / (nf - 1);
    mean.row(to) = (mean.row(to) * nt + xi) / (nt + 1);
    size[static_cast<std::size_t>(from)] -= 1;
    size[static_cast<std::size_t>(to)] += 1;
    a.label[i] = to;
    moved = true;
  }
  if (moved) {
    m.centroids = mean;
    m.inertia_history.push_back(kmeans_inertia(x, m.centroids));
  }
  return moved;
}

}  // namespace

KMeansModel kmeans_refine(const Matrix& x, const Matrix& initial_centroids, const KMeansParams& params) {
  KMeansModel m;
  m.k = static_cast<int>(initial_centroids.rows());
  m.centroids = initial_centroids;
  lloyd(x, m, params);
  for (int round = 0; round < params.max_iter && transfer_sweep(x, m); ++round) lloyd(x, m, params);
  const auto final_a = assign(x, m.centroids);
  m.assignment = final_a.label;
  m.inertia = final_a.inertia;
  return m;
}

KMeansModel kmeans_fit(const Matrix& x, int k, std::uint64_t seed, const KMeansParams& params) {
  if (k < 1) throw Error(ErrorCode::Domain, "kmeans: k must be >= 1");
  if (k > x.rows()) {
    throw Error(ErrorCode::Domain, "kmeans: k=" + std::to_string(k) + " exceeds n=" + std::to_string(x.rows()));
  }
  if (!x.allFinite()) throw Error(ErrorCode::Validation, "kmeans: non-finite input");
  KMeansModel best;
  bool have = false;
  for (int run = 0; run < std::max(1, params.n_init); ++run) {
    SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(run)));
    auto m = kmeans_refine(x, plus_plus_seeds(x, k, rng), params);
    if (!have || m.inertia < best.inertia) {
      best = std::move(m);
      have = true;
    }
  }
  return best;
}

ElbowResult elbow_select(const Matrix& x, int k_min, int k_max, std::uint64_t seed, const KMeansParams& params) {
  if (k_min < 1 || k_max > x.rows() || k_max < k_min) {
    throw Error(ErrorCode::Domain, "elbow: k range must lie within [1, n]");
  }
  if (k_max - k_min + 1 < 3) throw Error(ErrorCode::Domain, "elbow: need at least 3 values of k");
  ElbowResult r;
  KMeansModel prev;
  for (int k = k_min; k <= k_max; ++k) {
    auto m = kmeans_fit(x, k, mix_seed(seed, static_cast<std::uint64_t>(k)), params);
    if (k > k_min) {
      Matrix warm(k, x.cols());
      warm.topRows(k - 1) = prev.centroids;
      warm.row(k - 1) = x.row(farthest_point(x, prev.centroids));
      auto w = kmeans_refine(x, warm, params);
      if (w.inertia < m.inertia) m = std::move(w);
    }
    r.ks.push_back(k);
    r.inertia.push_back(m.inertia);
    prev = std::move(m);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < r.inertia.size(); ++i) {
    const double d2 = r.inertia[i - 1] - 2 * r.inertia[i] + r.inertia[i + 1];
    if (d2 > best) {
      best = d2;
      r.chosen_k = r.ks[i];
    }
  }
  return r;
}

}  // namespace fraudaware::mlcore

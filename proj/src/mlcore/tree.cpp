#include "fraudaware/mlcore/tree.hpp"

#include <algorithm>
#include <numeric>

#include "fraudaware/error.hpp"

namespace fraudaware::mlcore {

namespace {

constexpr double kTieEps = 1e-12;

using Rows = std::vector<std::size_t>;

struct Candidate {
  int feature = -1;
  double threshold = 0;
  double gain = 0;
};

double gini(const std::vector<double>& counts, double n) {
  if (n <= 0) return 0;
  double s = 0;
  for (double c : counts) s += (c / n) * (c / n);
  return 1.0 - s;
}

double midpoint(double a, double b) {
  const double m = (a + b) / 2;
  return m < b ? m : a;
}

// Scans every feature and boundary between distinct values. `Stats` keeps
// running left-side sufficient statistics; `score` returns the impurity
// decrease for a given left/right partition.
template <typename Stats, typename Score>
Candidate best_split(const Matrix& x, const Rows& rows, int min_leaf, Stats make_stats, Score score) {
  Candidate best;
  bool have = false;
  Rows order = rows;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
    });
    auto left = make_stats();
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      left.add(order[i]);
      const double a = x(static_cast<Eigen::Index>(order[i]), f);
      const double b = x(static_cast<Eigen::Index>(order[i + 1]), f);
      if (!(a < b)) continue;
      const std::size_t n_left = i + 1;
      if (n_left < static_cast<std::size_t>(min_leaf) || order.size() - n_left < static_cast<std::size_t>(min_leaf)) {
        continue;
      }
      const double gain = score(left);
      // Features and thresholds are scanned in ascending order, so only a
      // strictly better split may replace the incumbent.
      if (!have || gain > best.gain + kTieEps) {
        best = {static_cast<int>(f), midpoint(a, b), gain};
        have = true;
      }
    }
  }
  return best;
}

struct ClassStats {
  const std::vector<int>* index;  // row -> class slot
  std::vector<double> counts;
  double n = 0;
  void add(std::size_t row) {
    counts[static_cast<std::size_t>((*index)[row])] += 1;
    n += 1;
  }
};

struct SumStats {
  const Vector* y;
  double sum = 0;
  double sum2 = 0;
  double n = 0;
  void add(std::size_t row) {
    const double v = (*y)(static_cast<Eigen::Index>(row));
    sum += v;
    sum2 += v * v;
    n += 1;
  }
  double sse() const { return n > 0 ? sum2 - sum * sum / n : 0; }
};

bool can_grow(int depth, const TreeParams& p, std::size_t n) {
  return (p.max_depth < 0 || depth < p.max_depth) && n >= 2 * static_cast<std::size_t>(std::max(1, p.min_leaf));
}

void partition(const Matrix& x, const Rows& rows, const Candidate& c, Rows& l, Rows& r) {
  for (auto i : rows) (x(static_cast<Eigen::Index>(i), c.feature) <= c.threshold ? l : r).push_back(i);
}

int grow_classifier(const Matrix& x, const std::vector<int>& slot, std::size_t n_classes, const Rows& rows, int depth,
                    const TreeParams& p, std::vector<TreeNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  std::vector<double> counts(n_classes, 0.0);
  for (auto i : rows) counts[static_cast<std::size_t>(slot[i])] += 1;
  nodes[static_cast<std::size_t>(id)].value = counts;
  const double n = static_cast<double>(rows.size());
  const double parent = gini(counts, n);
  if (parent <= 0 || !can_grow(depth, p, rows.size())) return id;

  const auto c = best_split(
      x, rows, std::max(1, p.min_leaf), [&] { return ClassStats{&slot, std::vector<double>(n_classes, 0.0), 0}; },
      [&](const ClassStats& left) {
        std::vector<double> right(n_classes);
        for (std::size_t k = 0; k < n_classes; ++k) right[k] = counts[k] - left.counts[k];
        const double nr = n - left.n;
        return parent - (left.n * gini(left.counts, left.n) + nr * gini(right, nr)) / n;
      });
  if (c.feature < 0) return id;  // every feature constant on this node

  Rows l, r;
  partition(x, rows, c, l, r);
  const int li = grow_classifier(x, slot, n_classes, l, depth + 1, p, nodes);
  const int ri = grow_classifier(x, slot, n_classes, r, depth + 1, p, nodes);
  auto& node = nodes[static_cast<std::size_t>(id)];
  node.feature = c.feature;
  node.threshold = c.threshold;
  node.left = li;
  node.right = ri;
  return id;
}

int grow_regressor(const Matrix& x, const Vector& y, const Rows& rows, int depth, const TreeParams& p,
                   std::vector<TreeNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  SumStats all{&y};
  for (auto i : rows) all.add(i);
  nodes[static_cast<std::size_t>(id)].value = {all.sum / all.n};
  if (!can_grow(depth, p, rows.size())) return id;

  const double parent = all.sse();
  const auto c = best_split(
      x, rows, std::max(1, p.min_leaf), [&] { return SumStats{&y}; },
      [&](const SumStats& left) {
        SumStats right{&y, all.sum - left.sum, all.sum2 - left.sum2, all.n - left.n};
        return parent - left.sse() - right.sse();
      });
  if (c.feature < 0 || c.gain <= kTieEps * (1.0 + parent)) return id;

  Rows l, r;
  partition(x, rows, c, l, r);
  const int li = grow_regressor(x, y, l, depth + 1, p, nodes);
  const int ri = grow_regressor(x, y, r, depth + 1, p, nodes);
  auto& node = nodes[static_cast<std::size_t>(id)];
  node.feature = c.feature;
  node.threshold = c.threshold;
  node.left = li;
  node.right = ri;
  return id;
}

const TreeNode& descend(const std::vector<TreeNode>& nodes, const Vector& x) {
  if (nodes.empty()) throw Error(ErrorCode::NoModel, "tree has no nodes");
  const TreeNode* n = &nodes.front();
  while (!n->is_leaf()) {
    n = &nodes[static_cast<std::size_t>(x(n->feature) <= n->threshold ? n->left : n->right)];
  }
  return *n;
}

int depth_of(const std::vector<TreeNode>& nodes, int id) {
  const auto& n = nodes[static_cast<std::size_t>(id)];
  return n.is_leaf() ? 0 : 1 + std::max(depth_of(nodes, n.left), depth_of(nodes, n.right));
}

json nodes_to_json(const std::vector<TreeNode>& nodes) {
  json a = json::array();
  for (const auto& n : nodes) {
    json j = {{"value", n.value}};
    if (!n.is_leaf()) {
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["left"] = n.left;
      j["right"] = n.right;
    }
    a.push_back(std::move(j));
  }
  return a;
}

std::vector<TreeNode> nodes_from_json(const json& a) {
  std::vector<TreeNode> nodes;
  for (const auto& j : a) {
    TreeNode n;
    n.value = j.at("value").get<std::vector<double>>();
    if (j.contains("feature")) {
      n.feature = j.at("feature").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.left = j.at("left").get<int>();
      n.right = j.at("right").get<int>();
    }
    nodes.push_back(std::move(n));
  }
  // Children always follow their parent, which also rules out cycles.
  const auto count = static_cast<int>(nodes.size());
  for (int i = 0; i < count; ++i) {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= count || n.right >= count)) {
      throw Error(ErrorCode::Schema, "tree: child index out of range");
    }
  }
  if (nodes.empty()) throw Error(ErrorCode::Schema, "tree: no nodes");
  return nodes;
}

void check_fit_input(const Matrix& x, std::size_t n_targets) {
  if (x.rows() == 0) throw Error(ErrorCode::Domain, "tree: empty training matrix");
  if (static_cast<std::size_t>(x.rows()) != n_targets) throw Error(ErrorCode::Validation, "tree: row/label mismatch");
  if (!x.allFinite()) throw Error(ErrorCode::Validation, "tree: non-finite input");
}

}  // namespace

const TreeNode& DecisionTree::leaf_for(const Vector& x) const { return descend(nodes, x); }

int DecisionTree::predict(const Vector& x) const {
  const auto& v = leaf_for(x).value;
  // max_element returns the first maximum, i.e. the lowest class id.
  return classes[static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin())];
}

Vector DecisionTree::predict_proba(const Vector& x) const {
  const auto& v = leaf_for(x).value;
  Vector p = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  return p / p.sum();
}

int DecisionTree::depth() const { return nodes.empty() ? 0 : depth_of(nodes, 0); }

DecisionTree tree_fit(const Matrix& x, const Labels& y, const TreeParams& params) {
  check_fit_input(x, y.size());
  DecisionTree t;
  t.classes = distinct_classes(y);
  t.n_features = static_cast<int>(x.cols());
  std::vector<int> slot(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    slot[i] = static_cast<int>(std::lower_bound(t.classes.begin(), t.classes.end(), y[i]) - t.classes.begin());
  }
  Rows rows(y.size());
  std::iota(rows.begin(), rows.end(), 0);
  grow_classifier(x, slot, t.classes.size(), rows, 0, params, t.nodes);
  return t;
}

double RegressionTree::predict(const Vector& x) const { return descend(nodes, x).value.at(0); }

RegressionTree regression_tree_fit(const Matrix& x, const Vector& y, const TreeParams& params) {
  check_fit_input(x, static_cast<std::size_t>(y.size()));
  RegressionTree t;
  Rows rows(static_cast<std::size_t>(y.size()));
  std::iota(rows.begin(), rows.end(), 0);
  grow_regressor(x, y, rows, 0, params, t.nodes);
  return t;
}

json to_json(const DecisionTree& t) {
  return {{"classes", t.classes}, {"n_features", t.n_features}, {"nodes", nodes_to_json(t.nodes)}};
}

DecisionTree decision_tree_from_json(const json& doc) {
  DecisionTree t;
  t.classes = doc.at("classes").get<std::vector<int>>();
  t.n_features = doc.at("n_features").get<int>();
  t.nodes = nodes_from_json(doc.at("nodes"));
  return t;
}

json to_json(const RegressionTree& t) { return {{"nodes", nodes_to_json(t.nodes)}}; }

RegressionTree regression_tree_from_json(const json& doc) {
  RegressionTree t;
  t.nodes = nodes_from_json(doc.at("nodes"));
  return t;
}

}  // namespace fraudaware::mlcore

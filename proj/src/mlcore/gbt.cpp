#include "fraudaware/mlcore/gbt.hpp"

#include <cmath>

#include "fraudaware/error.hpp"

namespace fraudaware::mlcore {

namespace {

double sigmoid(double s) { return s >= 0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

// Mean of log(1 + e^s) - y s, computed without overflow.
double log_loss(const Vector& score, const Vector& y) {
  double total = 0;
  for (Eigen::Index i = 0; i < score.size(); ++i) {
    const double s = score(i);
    const double softplus = s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
    total += softplus - y(i) * s;
  }
  return total / static_cast<double>(score.size());
}

}  // namespace

double GbtModel::decision_function(const Vector& x) const {
  double s = init_score;
  for (const auto& t : trees) s += learning_rate * t.predict(x);
  return s;
}

double GbtModel::predict_positive(const Vector& x) const {
  if (classes.size() < 2) return 1.0;
  return sigmoid(decision_function(x));
}

int GbtModel::predict(const Vector& x) const {
  if (classes.empty()) throw Error(ErrorCode::NoModel, "gbt model is empty");
  if (classes.size() == 1) return classes.front();
  return predict_positive(x) > 0.5 ? classes[1] : classes[0];
}

GbtModel gbt_fit(const Matrix& x, const Labels& y, const GbtParams& params) {
  if (x.rows() == 0) throw Error(ErrorCode::Domain, "gbt: empty training matrix");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(ErrorCode::Validation, "gbt: row/label mismatch");
  GbtModel m;
  m.classes = distinct_classes(y);
  m.learning_rate = params.learning_rate;
  if (m.classes.size() > 2) throw Error(ErrorCode::Domain, "gbt: binary labels only");
  if (m.classes.size() == 1) return m;

  const Eigen::Index n = x.rows();
  Vector target(n);
  for (Eigen::Index i = 0; i < n; ++i) target(i) = y[static_cast<std::size_t>(i)] == m.classes[1] ? 1.0 : 0.0;
  const double prior = target.mean();
  m.init_score = std::log(prior / (1.0 - prior));

  Vector score = Vector::Constant(n, m.init_score);
  m.loss_history.push_back(log_loss(score, target));
  const TreeParams tp{params.max_depth, params.min_leaf};
  for (int round = 0; round < params.n_rounds; ++round) {
    Vector residual(n);
    for (Eigen::Index i = 0; i < n; ++i) residual(i) = target(i) - sigmoid(score(i));
    auto tree = regression_tree_fit(x, residual, tp);
    for (Eigen::Index i = 0; i < n; ++i) score(i) += m.learning_rate * tree.predict(x.row(i).transpose());
    m.trees.push_back(std::move(tree));
    m.loss_history.push_back(log_loss(score, target));
  }
  return m;
}

json to_json(const GbtModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(to_json(t));
  return {{"classes", m.classes},
          {"init_score", m.init_score},
          {"learning_rate", m.learning_rate},
          {"trees", std::move(trees)},
          {"loss_history", m.loss_history}};
}

GbtModel gbt_from_json(const json& doc) {
  GbtModel m;
  m.classes = doc.at("classes").get<std::vector<int>>();
  m.init_score = doc.at("init_score").get<double>();
  m.learning_rate = doc.at("learning_rate").get<double>();
  for (const auto& t : doc.at("trees")) m.trees.push_back(regression_tree_from_json(t));
  m.loss_history = doc.value("loss_history", std::vector<double>{});
  return m;
}

}  // namespace fraudaware::mlcore

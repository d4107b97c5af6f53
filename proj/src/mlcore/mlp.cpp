#include "fraudaware/mlcore/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "fraudaware/error.hpp"
#include "fraudaware/mlcore/serialize.hpp"
#include "fraudaware/rng.hpp"

namespace fraudaware::mlcore {

std::string_view to_string(Activation a) { return a == Activation::ReLU ? "ReLU" : "Tanh"; }

Activation parse_activation(std::string_view s) {
  if (s == "ReLU") return Activation::ReLU;
  if (s == "Tanh") return Activation::Tanh;
  throw Error(ErrorCode::Config, "unknown activation '" + std::string(s) + "'");
}

namespace {

Matrix activate(const Matrix& z, Activation a) {
  return a == Activation::ReLU ? Matrix(z.cwiseMax(0.0)) : Matrix(z.array().tanh().matrix());
}

// Derivative expressed through the pre-activation z and activation h.
Matrix activate_grad(const Matrix& z, const Matrix& h, Activation a) {
  if (a == Activation::ReLU) return (z.array() > 0.0).cast<double>().matrix();
  return (1.0 - h.array().square()).matrix();
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp().matrix();
  return p.array().colwise() / p.rowwise().sum().array();
}

struct Forward {
  Matrix z;  // n x hidden
  Matrix h;
  Matrix p;  // n x classes
};

Forward forward(const MlpModel& m, const Matrix& x) {
  Forward f;
  f.z = (x * m.w1.transpose()).rowwise() + m.b1.transpose();
  f.h = activate(f.z, m.activation);
  f.p = softmax_rows((f.h * m.w2.transpose()).rowwise() + m.b2.transpose());
  return f;
}

std::vector<int> class_slots(const MlpModel& m, const Labels& y) {
  std::vector<int> s(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    auto it = std::lower_bound(m.classes.begin(), m.classes.end(), y[i]);
    if (it == m.classes.end() || *it != y[i]) throw Error(ErrorCode::Validation, "mlp: label not in model classes");
    s[i] = static_cast<int>(it - m.classes.begin());
  }
  return s;
}

void glorot(Matrix& w, SplitMix64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-a, a);
  }
}

void append_row_major(Vector& out, Eigen::Index& at, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out(at++) = m(r, c);
  }
}

void read_row_major(const Vector& in, Eigen::Index& at, Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = in(at++);
  }
}

}  // namespace

Matrix MlpModel::predict_proba(const Matrix& x) const { return forward(*this, x).p; }

Vector MlpModel::predict_proba(const Vector& x) const { return predict_proba(Matrix(x.transpose())).row(0).transpose(); }

int MlpModel::predict(const Vector& x) const {
  if (classes.empty()) throw Error(ErrorCode::NoModel, "mlp model is empty");
  Eigen::Index arg = 0;
  predict_proba(x).maxCoeff(&arg);
  return classes[static_cast<std::size_t>(arg)];
}

MlpModel mlp_init(Eigen::Index n_features, const std::vector<int>& classes, const MlpParams& p) {
  if (p.hidden < 1) throw Error(ErrorCode::Config, "mlp: hidden layer needs at least one unit");
  MlpModel m;
  m.classes = classes;
  m.activation = p.activation;
  const auto c = static_cast<Eigen::Index>(classes.size());
  m.w1.resize(p.hidden, n_features);
  m.w2.resize(c, p.hidden);
  m.b1 = Vector::Zero(p.hidden);
  m.b2 = Vector::Zero(c);
  SplitMix64 rng(p.seed);
  glorot(m.w1, rng);
  glorot(m.w2, rng);
  return m;
}

LossAndGradient mlp_loss_and_gradient(const MlpModel& m, const Matrix& x, const Labels& y) {
  const auto slot = class_slots(m, y);
  const auto f = forward(m, x);
  const auto n = static_cast<double>(x.rows());
  LossAndGradient out;
  Matrix dlogits = f.p;
  for (std::size_t i = 0; i < slot.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.loss -= std::log(std::max(f.p(r, slot[i]), 1e-300));
    dlogits(r, slot[i]) -= 1.0;
  }
  out.loss /= n;
  dlogits /= n;

  const Matrix dw2 = dlogits.transpose() * f.h;
  const Vector db2 = dlogits.colwise().sum().transpose();
  const Matrix dz = (dlogits * m.w2).cwiseProduct(activate_grad(f.z, f.h, m.activation));
  const Matrix dw1 = dz.transpose() * x;
  const Vector db1 = dz.colwise().sum().transpose();

  out.gradient.resize(m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size());
  Eigen::Index at = 0;
  append_row_major(out.gradient, at, dw1);
  out.gradient.segment(at, db1.size()) = db1;
  at += db1.size();
  append_row_major(out.gradient, at, dw2);
  out.gradient.segment(at, db2.size()) = db2;
  return out;
}

Vector mlp_parameters(const MlpModel& m) {
  Vector theta(m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size());
  Eigen::Index at = 0;
  append_row_major(theta, at, m.w1);
  theta.segment(at, m.b1.size()) = m.b1;
  at += m.b1.size();
  append_row_major(theta, at, m.w2);
  theta.segment(at, m.b2.size()) = m.b2;
  return theta;
}

void mlp_set_parameters(MlpModel& m, const Vector& theta) {
  if (theta.size() != m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size()) {
    throw Error(ErrorCode::ContractViolation, "mlp: parameter vector has the wrong length");
  }
  Eigen::Index at = 0;
  read_row_major(theta, at, m.w1);
  m.b1 = theta.segment(at, m.b1.size());
  at += m.b1.size();
  read_row_major(theta, at, m.w2);
  m.b2 = theta.segment(at, m.b2.size());
}

MlpModel mlp_fit(const Matrix& x, const Labels& y, const MlpParams& params) {
  if (x.rows() < 2) throw Error(ErrorCode::Domain, "mlp: need at least 2 rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw Error(ErrorCode::Validation, "mlp: row/label mismatch");
  if (!x.allFinite()) throw Error(ErrorCode::Validation, "mlp: non-finite input");
  auto m = mlp_init(x.cols(), distinct_classes(y), params);
  Vector theta = mlp_parameters(m);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const auto lg = mlp_loss_and_gradient(m, x, y);
    m.loss_history.push_back(lg.loss);
    theta -= params.learning_rate * lg.gradient;
    mlp_set_parameters(m, theta);
  }
  m.loss_history.push_back(mlp_loss_and_gradient(m, x, y).loss);
  return m;
}

json to_json(const MlpModel& m) {
  return {{"classes", m.classes},
          {"activation", to_string(m.activation)},
          {"w1", matrix_to_json(m.w1)},
          {"b1", vector_to_json(m.b1)},
          {"w2", matrix_to_json(m.w2)},
          {"b2", vector_to_json(m.b2)},
          {"loss_history", m.loss_history}};
}

MlpModel mlp_from_json(const json& doc) {
  MlpModel m;
  m.classes = doc.at("classes").get<std::vector<int>>();
  m.activation = parse_activation(doc.at("activation").get<std::string>());
  m.w1 = matrix_from_json(doc.at("w1"));
  m.b1 = vector_from_json(doc.at("b1"));
  m.w2 = matrix_from_json(doc.at("w2"));
  m.b2 = vector_from_json(doc.at("b2"));
  m.loss_history = doc.value("loss_history", std::vector<double>{});
  if (m.w1.rows() != m.b1.size() || m.w2.cols() != m.w1.rows() || m.w2.rows() != m.b2.size() ||
      m.b2.size() != static_cast<Eigen::Index>(m.classes.size())) {
    throw Error(ErrorCode::Schema, "mlp: inconsistent layer shapes");
  }
  return m;
}

}  // namespace fraudaware::mlcore

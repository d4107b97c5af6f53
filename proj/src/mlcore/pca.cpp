#include "fraudaware/mlcore/pca.hpp"

#include <algorithm>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "fraudaware/error.hpp"
#include "fraudaware/mlcore/serialize.hpp"

namespace fraudaware::mlcore {

Matrix PcaModel::transform(const Matrix& x) const {
  const Standardization s{mean, scale};
  return s.apply(x) * components.transpose();
}

double PcaModel::reconstruction_error(const Matrix& x) const {
  const Standardization s{mean, scale};
  const Matrix z = s.apply(x);
  const Matrix back = (z * components.transpose()) * components;
  return (z - back).squaredNorm() / static_cast<double>(z.size());
}

PcaModel pca_fit(const Matrix& x, Eigen::Index k) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (k < 1 || k > std::min(n - 1, d)) {
    throw Error(ErrorCode::Domain, "pca: k=" + std::to_string(k) + " outside [1, min(n-1, d)]");
  }
  PcaModel m;
  const auto st = fit_standardization(x);
  m.mean = st.mean;
  m.scale = st.scale;
  const Matrix z = st.apply(x);
  const Matrix cov = (z.transpose() * z) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::Domain, "pca: eigendecomposition failed");
  // Eigen returns ascending order; walk from the back.
  m.components.resize(k, d);
  m.explained_variance.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    Vector v = eig.eigenvectors().col(d - 1 - j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    m.components.row(j) = v.transpose();
    m.explained_variance(j) = std::max(0.0, eig.eigenvalues()(d - 1 - j));
  }
  m.total_variance = cov.trace();
  return m;
}

Vector pca_feature_scores(const PcaModel& model) {
  return (model.components.array().square().colwise() * model.explained_variance.array()).colwise().sum().transpose();
}

std::vector<std::size_t> pca_top_feature_indices(const PcaModel& model, std::size_t m) {
  const Vector s = pca_feature_scores(model);
  const auto d = static_cast<std::size_t>(s.size());
  if (m < 1 || m > d) throw Error(ErrorCode::Domain, "pca: m outside [1, d]");
  std::vector<std::size_t> idx(d);
  std::iota(idx.begin(), idx.end(), 0);
  const double eps = 1e-12 * std::max(1.0, s.maxCoeff());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return s(static_cast<Eigen::Index>(a)) > s(static_cast<Eigen::Index>(b)) + eps;
  });
  idx.resize(m);
  return idx;
}

std::vector<std::string> pca_top_features(const PcaModel& model, const std::vector<std::string>& col_names,
                                          std::size_t m) {
  if (static_cast<Eigen::Index>(col_names.size()) != model.components.cols()) {
    throw Error(ErrorCode::Validation, "pca: column name count does not match the model");
  }
  std::vector<std::string> out;
  for (auto i : pca_top_feature_indices(model, m)) out.push_back(col_names[i]);
  return out;
}

json to_json(const PcaModel& m) {
  return {{"mean", vector_to_json(m.mean)},
          {"scale", vector_to_json(m.scale)},
          {"components", matrix_to_json(m.components)},
          {"explained_variance", vector_to_json(m.explained_variance)},
          {"total_variance", m.total_variance}};
}

PcaModel pca_from_json(const json& doc) {
  PcaModel m;
  m.mean = vector_from_json(doc.at("mean"));
  m.scale = vector_from_json(doc.at("scale"));
  m.components = matrix_from_json(doc.at("components"));
  m.explained_variance = vector_from_json(doc.at("explained_variance"));
  m.total_variance = doc.at("total_variance").get<double>();
  return m;
}

}  // namespace fraudaware::mlcore

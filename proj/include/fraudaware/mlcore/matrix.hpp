#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fraudaware::mlcore {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;

/// n x d table of finite reals with named columns and optional class ids.
struct FeatureMatrix {
  Matrix values;
  std::vector<std::string> col_names;
  std::optional<Labels> labels;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  /// Rows in the given order, labels carried along.
  FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const;
  /// Columns in the given order, labels carried along.
  FeatureMatrix select_cols(const std::vector<std::size_t>& cols) const;
  /// Throws Validation when the matrix is unlabeled.
  const Labels& require_labels() const;
};

/// Throws Validation on non-finite values, duplicate or miscounted column
/// names, or a label vector of the wrong length.
void validate(const FeatureMatrix& m);

/// Comma-separated text with a header row of column names. A trailing
/// column named "label" holds integer class ids.
std::string to_csv(const FeatureMatrix& m);
FeatureMatrix from_csv(std::string_view text);
FeatureMatrix read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const FeatureMatrix& m);

struct Standardization {
  Vector mean;
  Vector scale;  // population std, 1 for zero-variance columns

  Matrix apply(const Matrix& x) const;
  Vector apply(const Vector& x) const;
};

/// Population-std z-scoring. Zero-variance columns are centered only.
/// Throws Domain when n < 2.
Standardization fit_standardization(const Matrix& x);

struct Standardized {
  FeatureMatrix matrix;
  Standardization transform;
};

Standardized standardize(const FeatureMatrix& x);

/// Distinct label values, ascending.
std::vector<int> distinct_classes(const Labels& labels);

}  // namespace fraudaware::mlcore

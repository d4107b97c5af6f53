#include "fraudaware/mlcore/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "fraudaware/error.hpp"
#include "fraudaware/io.hpp"

namespace fraudaware::mlcore {

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& rows) const {
  FeatureMatrix out;
  out.col_names = col_names;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  if (labels) out.labels.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(rows[i]));
    if (labels) out.labels->push_back((*labels)[rows[i]]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_cols(const std::vector<std::size_t>& cols) const {
  FeatureMatrix out;
  out.labels = labels;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.values.col(static_cast<Eigen::Index>(j)) = values.col(static_cast<Eigen::Index>(cols[j]));
    out.col_names.push_back(col_names.at(cols[j]));
  }
  return out;
}

const Labels& FeatureMatrix::require_labels() const {
  if (!labels) throw Error(ErrorCode::Validation, "feature matrix has no labels");
  return *labels;
}

void validate(const FeatureMatrix& m) {
  if (static_cast<Eigen::Index>(m.col_names.size()) != m.cols()) {
    throw Error(ErrorCode::Validation, "feature matrix: " + std::to_string(m.col_names.size()) +
                                           " column names for " + std::to_string(m.cols()) + " columns");
  }
  std::set<std::string> seen;
  for (const auto& n : m.col_names) {
    if (!seen.insert(n).second) throw Error(ErrorCode::Validation, "feature matrix: duplicate column '" + n + "'");
  }
  if (!m.values.allFinite()) throw Error(ErrorCode::Validation, "feature matrix: non-finite value");
  if (m.labels && static_cast<Eigen::Index>(m.labels->size()) != m.rows()) {
    throw Error(ErrorCode::Validation, "feature matrix: label count does not match row count");
  }
}

std::string to_csv(const FeatureMatrix& m) {
  std::string out;
  for (std::size_t j = 0; j < m.col_names.size(); ++j) out += (j ? "," : "") + m.col_names[j];
  if (m.labels) out += ",label";
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + format_double(m.values(i, j));
    if (m.labels) out += "," + std::to_string((*m.labels)[static_cast<std::size_t>(i)]);
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& s, std::size_t line_no) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) {
    throw Error(ErrorCode::Schema, "csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

FeatureMatrix from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::Schema, "csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  FeatureMatrix m;
  m.col_names = split_line(line);
  const bool labeled = !m.col_names.empty() && m.col_names.back() == "label";
  if (labeled) {
    m.col_names.pop_back();
    m.labels.emplace();
  }
  const std::size_t width = m.col_names.size() + (labeled ? 1 : 0);
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != width) {
      throw Error(ErrorCode::Schema, "csv line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                                         " cells, got " + std::to_string(cells.size()));
    }
    auto& row = rows.emplace_back();
    for (std::size_t j = 0; j < m.col_names.size(); ++j) row.push_back(parse_cell(cells[j], line_no));
    if (labeled) {
      const double l = parse_cell(cells.back(), line_no);
      if (l != std::floor(l)) throw Error(ErrorCode::Schema, "csv line " + std::to_string(line_no) + ": bad label");
      m.labels->push_back(static_cast<int>(l));
    }
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.col_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  validate(m);
  return m;
}

FeatureMatrix read_csv(const std::filesystem::path& path) { return from_csv(read_text_file(path)); }

void write_csv(const std::filesystem::path& path, const FeatureMatrix& m) { write_text_file(path, to_csv(m)); }

Matrix Standardization::apply(const Matrix& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Vector Standardization::apply(const Vector& x) const { return (x - mean).array() / scale.array(); }

Standardization fit_standardization(const Matrix& x) {
  if (x.rows() < 2) throw Error(ErrorCode::Domain, "standardize needs at least 2 rows");
  Standardization s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().mean();
    const double sd = std::sqrt(var);
    // Treat variance at rounding-noise level relative to the mean as zero.
    s.scale(j) = sd > 1e-12 * std::max(1.0, std::abs(s.mean(j))) ? sd : 1.0;
  }
  return s;
}

Standardized standardize(const FeatureMatrix& x) {
  Standardized out;
  out.transform = fit_standardization(x.values);
  out.matrix = x;
  out.matrix.values = out.transform.apply(x.values);
  return out;
}

std::vector<int> distinct_classes(const Labels& labels) {
  std::vector<int> c(labels.begin(), labels.end());
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

}  // namespace fraudaware::mlcore

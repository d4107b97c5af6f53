#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fraudaware/io.hpp"
#include "fraudaware/mlcore/matrix.hpp"

namespace fraudaware::mlcore {

enum class Activation { ReLU, Tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);

struct MlpParams {
  int hidden = 16;
  Activation activation = Activation::ReLU;
  int epochs = 500;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

/// One hidden layer, softmax output over `classes`.
struct MlpModel {
  std::vector<int> classes;
  Activation activation = Activation::ReLU;
  Matrix w1;  // hidden x d
  Vector b1;
  Matrix w2;  // classes x hidden
  Vector b2;
  std::vector<double> loss_history;  // loss before each epoch, then the final loss

  Vector predict_proba(const Vector& x) const;
  Matrix predict_proba(const Matrix& x) const;
  int predict(const Vector& x) const;

  bool operator==(const MlpModel&) const = default;
};

/// Glorot-uniform weights drawn from SplitMix64(seed) in the order w1 then
/// w2, row-major; zero biases.
MlpModel mlp_init(Eigen::Index n_features, const std::vector<int>& classes, const MlpParams& params);

/// Full-batch gradient descent on mean cross-entropy. Inputs are expected
/// to be standardized; raw inputs are accepted but not supported.
MlpModel mlp_fit(const Matrix& x, const Labels& y, const MlpParams& params = {});

/// Flattened parameters: w1 (row-major), b1, w2 (row-major), b2.
Vector mlp_parameters(const MlpModel& model);
void mlp_set_parameters(MlpModel& model, const Vector& theta);

struct LossAndGradient {
  double loss = 0;
  Vector gradient;  // same layout as mlp_parameters
};

/// Mean cross-entropy and its analytic gradient by backpropagation.
LossAndGradient mlp_loss_and_gradient(const MlpModel& model, const Matrix& x, const Labels& y);

json to_json(const MlpModel& model);
MlpModel mlp_from_json(const json& doc);

}  // namespace fraudaware::mlcore

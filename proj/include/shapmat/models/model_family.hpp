#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>

namespace shapmat {

// Weighted K-nearest-neighbour vote. The support is the
// round(support_multiplier * k) nearest players.
struct WknnParams {
  std::size_t k = 5;
  double support_multiplier = 2.0;
};

// Gini CART classifier.
struct TreeParams {
  std::size_t max_depth = 3;
  std::size_t min_leaf = 1;
};

// Kernel vote with K(t,z) = exp(-gamma * |t - z|^2). Without an explicit
// gamma the median heuristic over the initial pool is used.
struct RbfParams {
  std::optional<double> gamma;
  double relevance_threshold = 0.5;
};

// mu-regularized ERM of a linear score <theta, psi(t)> under the scaled
// logistic loss  l(a, y) = loss_lipschitz * log(1 + exp(-y a)),  y in {-1,+1}.
// That loss is loss_lipschitz-Lipschitz with l(0, y) = loss_lipschitz * ln 2,
// so loss_at_zero_bound must be at least that.
struct RidgeParams {
  double mu = 1.0;
  double loss_lipschitz = 1.0;
  double loss_at_zero_bound = std::log(2.0);
  std::size_t support_k = 10;
  int positive_label = 1;

  double norm_bound() const { return std::sqrt(2.0 * loss_at_zero_bound / mu); }
  double task_lipschitz() const { return loss_lipschitz * norm_bound(); }
};

using ModelFamily = std::variant<WknnParams, TreeParams, RbfParams, RidgeParams>;

// Throws kInvalidArgument when a hyperparameter is outside its range.
void validate(const ModelFamily& family);
std::string family_name(const ModelFamily& family);

enum class UtilityKind { kAccuracy, kNegativeLoss, kConfidence };

const char* to_string(UtilityKind kind) noexcept;
UtilityKind utility_kind_from_string(const std::string& name);

}  // namespace shapmat

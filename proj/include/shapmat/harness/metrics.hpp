#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "shapmat/core/shapley_matrix.hpp"

namespace shapmat {

inline constexpr double kOmegaThreshold = 1e-3;

struct MetricsReport {
  double spearman = 0.0;
  double pearson = 0.0;
  std::size_t omega = 0;  // entries with |reference| above the threshold
};

// Pearson correlation; 0 when either side is constant.
double pearson(std::span<const double> x, std::span<const double> y);
// Ranks from 1, ties sharing their average rank.
std::vector<double> average_ranks(std::span<const double> x);
double spearman(std::span<const double> x, std::span<const double> y);

// Compares the entries of `estimate` at the reference's players and tasks
// (or only `tasks` when given), keeping those with |reference| above the
// threshold and neither side ABSENT. Throws InsufficientSupport below two
// entries and NotFound when the estimate lacks an id.
MetricsReport compare_matrices(const ShapleyMatrix& estimate, const ShapleyMatrix& reference,
                               std::optional<std::vector<TaskId>> tasks = std::nullopt,
                               double threshold = kOmegaThreshold);

}  // namespace shapmat

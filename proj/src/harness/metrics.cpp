#include "shapmat/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shapmat/core/error.hpp"

namespace shapmat {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "correlation inputs differ in length");
  }
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return 0.0;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

MetricsReport compare_matrices(const ShapleyMatrix& estimate, const ShapleyMatrix& reference,
                               std::optional<std::vector<TaskId>> tasks, double threshold) {
  std::vector<TaskId> columns =
      tasks ? *tasks : std::vector<TaskId>(reference.tasks().begin(), reference.tasks().end());
  std::vector<double> est;
  std::vector<double> ref;
  for (TaskId t : columns) {
    for (PlayerId z : reference.players()) {
      const auto r = reference.get(z, t);
      if (!r || !(std::abs(*r) > threshold)) continue;
      const auto e = estimate.get(z, t);
      if (!e) continue;
      est.push_back(*e);
      ref.push_back(*r);
    }
  }
  if (ref.size() < 2) {
    throw Error(ErrorCode::kInsufficientSupport,
                "only " + std::to_string(ref.size()) + " reference entries pass the filter");
  }
  MetricsReport report;
  report.omega = ref.size();
  report.spearman = spearman(est, ref);
  report.pearson = pearson(est, ref);
  return report;
}

}  // namespace shapmat

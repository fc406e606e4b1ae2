#include "shapmat/estimators/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <vector>

#include "shapmat/core/error.hpp"
#include "shapmat/estimators/rng.hpp"
#include "shapmat/util/parallel.hpp"

namespace shapmat {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

ValueColumn make_column(TaskId task, const Coalition& players, const std::vector<double>& phi,
                        Provenance provenance) {
  ValueColumn col{task, {}, provenance};
  const auto members = players.members();
  for (std::size_t i = 0; i < members.size(); ++i) col.entries.emplace(members[i], phi[i]);
  return col;
}

Coalition from_positions(std::span<const PlayerId> members,
                         const std::vector<std::size_t>& positions, std::size_t count) {
  std::vector<PlayerId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count; ++i) ids.push_back(members[positions[i]]);
  return Coalition(std::move(ids));
}

// Shared driver for the sampling estimators: draws samples in batches of
// check_interval, reduces them in index order, and applies the stopping rule
// at each batch boundary.
template <class SampleFn, class EstimateFn>
std::uint64_t run_batches(const McConfig& config, std::size_t slot_size, TaskId task,
                          const Coalition& players, std::vector<double>& totals,
                          std::vector<double>& counts, SampleFn&& sample,
                          EstimateFn&& estimate) {
  ValueColumn prev = make_column(task, players, std::vector<double>(players.size(), 0.0),
                                 Provenance::kMonteCarlo);
  std::uint64_t used = 0;
  while (used < config.max_samples) {
    const std::size_t batch = std::min(config.check_interval, config.max_samples - used);
    std::vector<std::vector<double>> sums(batch, std::vector<double>(slot_size, 0.0));
    std::vector<std::vector<double>> hits(batch, std::vector<double>(slot_size, 0.0));
    parallel_for(batch, [&](std::size_t b) { sample(used + b, sums[b], hits[b]); });
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t s = 0; s < slot_size; ++s) {
        totals[s] += sums[b][s];
        counts[s] += hits[b][s];
      }
    }
    used += batch;
    if (batch < config.check_interval) break;
    ValueColumn curr = make_column(task, players, estimate(used), Provenance::kMonteCarlo);
    if (stopping_check(prev, curr, config.rel_change_stop)) break;
    prev = std::move(curr);
  }
  return used;
}

}  // namespace

void McConfig::validate() const {
  if (check_interval < 1 || max_samples < check_interval) {
    throw Error(ErrorCode::kInvalidArgument,
                "mc config needs max_samples >= check_interval >= 1");
  }
  if (!(rel_change_stop > 0.0) || !(truncation_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "mc tolerances must be > 0");
  }
}

EstimateReport exact_local_shapley(const LocalGame& game, const Coalition& players,
                                   TaskId task, std::size_t k_max) {
  const auto start = Clock::now();
  const std::size_t limit = std::min(k_max, kHardExactLimit);
  const std::size_t k = players.size();
  if (k > limit) throw SupportTooLarge(k, limit);
  const std::uint64_t trainings_before = game.trainings();

  const std::uint64_t total = std::uint64_t{1} << k;
  std::vector<double> values(total);
  parallel_for(total, [&](std::size_t mask) { values[mask] = game.value(players.subset(mask)); });

  // Per-size weights: members gain v/(k C(k-1,|S|-1)), others lose v/(k C(k-1,|S|)).
  std::vector<double> plus(k + 1, 0.0);
  std::vector<double> minus(k + 1, 0.0);
  for (std::size_t s = 0; s <= k; ++s) {
    if (s >= 1) plus[s] = 1.0 / (static_cast<double>(k) * binomial(k - 1, s - 1));
    if (s < k) minus[s] = 1.0 / (static_cast<double>(k) * binomial(k - 1, s));
  }
  std::vector<double> phi(k, 0.0);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    const double v = values[mask];
    for (std::size_t i = 0; i < k; ++i) {
      if (mask >> i & 1U) {
        phi[i] += v * plus[size];
      } else {
        phi[i] -= v * minus[size];
      }
    }
  }

  EstimateReport report;
  report.column = make_column(task, players, phi, Provenance::kExactLocal);
  report.utility_evaluations = total;
  report.trainings = game.trainings() - trainings_before;
  report.samples_used = total;
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

EstimateReport exact_local_shapley(const Game& game, const SupportSet& support,
                                   std::size_t k_max) {
  if (support.epoch != game.epoch()) {
    throw Error(ErrorCode::kUniverseMismatch, "support set is from an older universe");
  }
  return exact_local_shapley(TaskGame(game, support.task), support.members, support.task,
                             k_max);
}

EstimateReport permutation_mc(const LocalGame& game, const Coalition& players, TaskId task,
                              const McConfig& config, bool truncate) {
  config.validate();
  const auto start = Clock::now();
  const std::size_t n = players.size();
  const std::uint64_t trainings_before = game.trainings();
  EstimateReport report;
  if (n == 0) {
    report.column = ValueColumn{task, {}, Provenance::kMonteCarlo};
    return report;
  }
  const auto members = players.members();
  const double v_empty = game.value(Coalition{});
  const double v_full = game.value(players);
  std::atomic<std::uint64_t> evaluations{2};

  std::vector<double> totals(n, 0.0);
  std::vector<double> unused(n, 0.0);
  auto sample = [&](std::uint64_t index, std::vector<double>& sums, std::vector<double>&) {
    auto rng = stream_rng(config.seed, index);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    double prev = v_empty;
    std::uint64_t calls = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (truncate && std::abs(prev - v_full) < config.truncation_tolerance) break;
      double curr;
      if (j + 1 == n) {
        curr = v_full;
      } else {
        std::vector<std::size_t> prefix(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(j + 1));
        curr = game.value(from_positions(members, prefix, j + 1));
        ++calls;
      }
      sums[order[j]] += curr - prev;
      prev = curr;
    }
    evaluations.fetch_add(calls);
  };
  auto estimate = [&](std::uint64_t used) {
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) phi[i] = totals[i] / static_cast<double>(used);
    return phi;
  };
  const std::uint64_t used =
      run_batches(config, n, task, players, totals, unused, sample, estimate);

  report.column = make_column(task, players, estimate(used), Provenance::kMonteCarlo);
  report.utility_evaluations = evaluations.load();
  report.trainings = game.trainings() - trainings_before;
  report.samples_used = used;
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

EstimateReport complementary_mc(const LocalGame& game, const Coalition& players,
                                TaskId task, const McConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const std::size_t n = players.size();
  const std::uint64_t trainings_before = game.trainings();
  EstimateReport report;
  if (n == 0) {
    report.column = ValueColumn{task, {}, Provenance::kMonteCarlo};
    return report;
  }
  const auto members = players.members();
  const double v_empty = game.value(Coalition{});
  const double v_full = game.value(players);
  std::atomic<std::uint64_t> evaluations{2};

  // Slot (i, j) with j in [1, n] holds complementary contributions of player
  // i from coalitions of size j that contain it.
  const std::size_t slots = n * (n + 1);
  auto slot = [n](std::size_t i, std::size_t j) { return i * (n + 1) + j; };
  std::vector<double> totals(slots, 0.0);
  std::vector<double> counts(slots, 0.0);

  auto sample = [&](std::uint64_t index, std::vector<double>& sums, std::vector<double>& hits) {
    auto rng = stream_rng(config.seed, index);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::uint64_t calls = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      double inside;
      double outside;
      if (k == n) {
        inside = v_full;
        outside = v_empty;
      } else {
        std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
        inside = game.value(from_positions(members, order, k));
        outside = game.value(from_positions(members, rest, n - k));
        calls += 2;
      }
      const double c = inside - outside;
      for (std::size_t p = 0; p < n; ++p) {
        const std::size_t i = order[p];
        if (p < k) {
          sums[slot(i, k)] += c;
          hits[slot(i, k)] += 1.0;
        } else {
          sums[slot(i, n - k)] -= c;
          hits[slot(i, n - k)] += 1.0;
        }
      }
    }
    evaluations.fetch_add(calls);
  };
  auto estimate = [&](std::uint64_t) {
    std::vector<double> phi(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 1; j <= n; ++j) {
        const double c = counts[slot(i, j)];
        if (c > 0.0) phi[i] += totals[slot(i, j)] / c;
      }
      phi[i] /= static_cast<double>(n);
    }
    return phi;
  };
  const std::uint64_t used =
      run_batches(config, slots, task, players, totals, counts, sample, estimate);

  report.column = make_column(task, players, estimate(used), Provenance::kMonteCarlo);
  report.utility_evaluations = evaluations.load();
  report.trainings = game.trainings() - trainings_before;
  report.samples_used = used;
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

bool stopping_check(const ValueColumn& prev, const ValueColumn& curr, double threshold) {
  if (prev.entries.size() != curr.entries.size()) {
    throw Error(ErrorCode::kKeyMismatch, "columns list different players");
  }
  if (curr.entries.empty()) return true;
  double total = 0.0;
  auto p = prev.entries.begin();
  for (auto c = curr.entries.begin(); c != curr.entries.end(); ++c, ++p) {
    if (p->first != c->first) {
      throw Error(ErrorCode::kKeyMismatch,
                  "player " + std::to_string(c->first.value()) + " missing from one column");
    }
    total += std::abs(c->second - p->second) / (std::abs(c->second) + 1e-12);
  }
  return total / static_cast<double>(curr.entries.size()) < threshold;
}

}  // namespace shapmat

#pragma once

#include <cstddef>
#include <cstdint>

#include "shapmat/core/coalition.hpp"
#include "shapmat/core/value_column.hpp"
#include "shapmat/estimators/local_game.hpp"

namespace shapmat {

inline constexpr std::size_t kDefaultExactLimit = 20;
inline constexpr std::size_t kHardExactLimit = 25;

struct McConfig {
  std::size_t max_samples = 5000;
  std::size_t check_interval = 100;
  double rel_change_stop = 0.05;
  double truncation_tolerance = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EstimateReport {
  ValueColumn column;
  std::uint64_t utility_evaluations = 0;
  std::uint64_t trainings = 0;
  std::uint64_t samples_used = 0;
  double wall_clock_seconds = 0.0;
};

// Exact Shapley values of the game restricted to `players`, by one pass over
// all 2^k subsets. Every player of `players` is listed in the column. Throws
// SupportTooLarge when k exceeds min(k_max, kHardExactLimit).
EstimateReport exact_local_shapley(const LocalGame& game, const Coalition& players,
                                   TaskId task, std::size_t k_max = kDefaultExactLimit);
EstimateReport exact_local_shapley(const Game& game, const SupportSet& support,
                                   std::size_t k_max = kDefaultExactLimit);

// Permutation sampling. With `truncate`, a permutation's tail is skipped
// (zero marginals) once the prefix utility is within truncation_tolerance of
// the full-set utility.
EstimateReport permutation_mc(const LocalGame& game, const Coalition& players, TaskId task,
                              const McConfig& config, bool truncate);

// Complementary-contribution sampling stratified by coalition size. Each
// sampled permutation yields the prefixes P_1..P_n; every prefix is paired
// with its complement and the difference v(P) - v(N \ P) is credited to the
// members of both sides in the matching size stratum.
EstimateReport complementary_mc(const LocalGame& game, const Coalition& players,
                                TaskId task, const McConfig& config);

// Mean over entries of |curr - prev| / (|curr| + 1e-12), compared against
// `threshold`. Throws KeyMismatch when the player sets differ.
bool stopping_check(const ValueColumn& prev, const ValueColumn& curr,
                    double threshold = 0.05);

}  // namespace shapmat

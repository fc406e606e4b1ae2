#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "shapmat/core/coalition.hpp"
#include "shapmat/core/ids.hpp"

namespace shapmat {

enum class Provenance { kExactLocal, kMonteCarlo, kInterpolated, kReused };

const char* to_string(Provenance p) noexcept;

// Sparse view of one task's Shapley values; unlisted players are zero.
struct ValueColumn {
  TaskId task;
  std::map<PlayerId, double> entries;
  Provenance provenance = Provenance::kExactLocal;

  double value_or_zero(PlayerId player) const {
    auto it = entries.find(player);
    return it == entries.end() ? 0.0 : it->second;
  }
};

// N(t): the players whose membership determines the utility of `task`.
struct SupportSet {
  TaskId task;
  Coalition members;
  std::uint64_t epoch = 0;

  // Rejects supports above `k_max` with SupportTooLarge.
  static SupportSet bounded(TaskId task, Coalition members, std::uint64_t epoch,
                            std::size_t k_max);
};

}  // namespace shapmat

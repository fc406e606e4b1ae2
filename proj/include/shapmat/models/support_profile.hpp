#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "shapmat/core/ids.hpp"

namespace shapmat {

enum class ProfileKind {
  kNeighborWeights,
  kDecisionPath,
  kKernelRelevance,
  kEmbedding,
  kPpr,
};

const char* to_string(ProfileKind kind) noexcept;
bool is_weight_kind(ProfileKind kind) noexcept;

// Local computation structure of one task under the current model.
//
// Weight kinds fill `weights` (nonnegative, zero entries omitted), the tree
// kind fills `path` with internal node ids root to leaf, and the embedding
// kind fills `vector`. `universe` names the player-set epoch the profile was
// computed against; profiles from different epochs are not comparable.
struct SupportProfile {
  ProfileKind kind = ProfileKind::kNeighborWeights;
  std::map<PlayerId, double> weights;
  std::vector<std::uint32_t> path;
  std::uint64_t tree_id = 0;
  std::vector<double> vector;
  std::optional<int> label;
  std::uint64_t universe = 0;
};

}  // namespace shapmat

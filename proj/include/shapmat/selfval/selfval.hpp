#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapmat/core/coalition.hpp"
#include "shapmat/core/shapley_matrix.hpp"
#include "shapmat/estimators/estimators.hpp"
#include "shapmat/locality/distance.hpp"
#include "shapmat/models/game.hpp"

namespace shapmat {

using PlayerDistance = std::function<double(PlayerId, PlayerId)>;

struct CoverageReport {
  double r_max = 0.0;
  std::optional<PlayerId> farthest;
  std::map<PlayerId, double> nearest_anchor_distance;
};

struct AnchorSelection {
  std::vector<PlayerId> anchors;  // selection order
  CoverageReport coverage;
};

// max over players of the distance to the nearest anchor.
CoverageReport covering_radius(std::span<const PlayerId> players,
                               std::span<const PlayerId> anchors,
                               const PlayerDistance& distance);

// Greedy k-center. Starts from the lowest id, or from the player picked by
// `seed` when given; each next anchor maximizes the distance to the chosen
// set, ties by ascending id. Throws InvalidBudget unless 1 <= k <= n.
AnchorSelection select_anchors_fps(std::span<const PlayerId> players, std::size_t k,
                                   const PlayerDistance& distance,
                                   std::optional<std::uint64_t> seed = std::nullopt);

// The proxy task of player z shares its numeric id.
inline TaskId proxy_task(PlayerId z) { return TaskId(z.value()); }

// Registers a leave-one-out proxy task for every player that lacks one.
void register_proxy_tasks(Game& game);

// d_Gamma between the proxy tasks of two players, profiles memoized.
PlayerDistance proxy_distance(const Game& game, const DistanceConfig& config);

// The first anchor of `order` missing from `s`; nullopt when all are in `s`.
std::optional<PlayerId> pivot_of(const Coalition& s, std::span<const PlayerId> order);

enum class SelfValMode { kExactShared, kMcShared, kNaive };
// kFull plays each anchor's game over every other player; kSupport restricts
// it to the anchor's support set.
enum class SelfValScope { kFull, kSupport };

const char* to_string(SelfValMode mode) noexcept;
const char* to_string(SelfValScope scope) noexcept;
SelfValMode selfval_mode_from_string(const std::string& name);
SelfValScope selfval_scope_from_string(const std::string& name);

inline constexpr std::size_t kExactSelfValLimit = 16;

struct SelfValOptions {
  SelfValMode mode = SelfValMode::kExactShared;
  SelfValScope scope = SelfValScope::kFull;
  McConfig mc;
  // Exactness budget for support-scope games.
  std::size_t k_max = kDefaultExactLimit;
};

struct BuildReport {
  std::size_t n = 0;
  std::size_t k = 0;
  SelfValMode mode = SelfValMode::kExactShared;
  SelfValScope scope = SelfValScope::kFull;
  std::uint64_t trainings = 0;
  std::uint64_t utility_evaluations = 0;
  std::uint64_t samples = 0;
  double wall_clock_seconds = 0.0;
  std::optional<double> r_max;
};

struct SelfValuation {
  ShapleyMatrix matrix;
  BuildReport report;
  // Coalition each anchor column was solved over, and how.
  std::map<TaskId, Coalition> basis;
  std::map<TaskId, Provenance> provenance;
};

// One column per anchor (in the given order), rows over the game's universe,
// with the anchor's own cell ABSENT. Proxy tasks are registered as needed.
// Full-scope exact modes throw TooLarge above kExactSelfValLimit players.
SelfValuation build_self_matrix(Game& game, std::span<const PlayerId> anchors,
                                const SelfValOptions& options);

}  // namespace shapmat

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "shapmat/core/coalition.hpp"
#include "shapmat/core/shapley_matrix.hpp"
#include "shapmat/core/value_column.hpp"
#include "shapmat/estimators/estimators.hpp"
#include "shapmat/locality/distance.hpp"
#include "shapmat/models/game.hpp"

namespace shapmat {

// Anchors in pivot order together with the expansion and interpolation knobs.
struct AnchorSet {
  std::vector<TaskId> tasks;
  double tau = 1.0;
  std::size_t k_interp = 6;
};

struct EngineConfig {
  DistanceConfig distance;
  // A new task farther than tau from every anchor becomes an anchor itself.
  double tau = 1.0;
  std::size_t k_interp = 6;
  // Largest support solved by exact enumeration; larger ones use sampling.
  std::size_t k_max = kDefaultExactLimit;
  // Joint batches recompute a new task exactly once its support moved by
  // more than kappa players.
  std::size_t kappa = 3;
  McConfig mc;

  void validate() const;
};

struct Interpolation {
  ValueColumn column;
  std::vector<TaskId> anchors;  // selected, nearest first
  std::vector<double> weights;
  std::vector<double> distances;
};

struct PlayerUpdateReport {
  std::vector<TaskId> affected_tasks;
  // Distinct coalitions newly evaluated by the update.
  std::uint64_t evaluations = 0;
  std::uint64_t trainings = 0;
  // Additive corrections applied to existing players on monotone expansions.
  std::map<std::pair<PlayerId, TaskId>, double> corrections;
  // Largest max(|N(a)|, |N+(a)|) over affected anchors.
  std::size_t largest_support = 0;
  // |affected| * 2^largest_support.
  double bound = 0.0;
  double wall_clock_seconds = 0.0;
};

struct TaskAddReport {
  TaskId task;
  bool expanded = false;
  double min_distance = 0.0;
  std::optional<Interpolation> interpolation;
  Provenance provenance = Provenance::kInterpolated;
  std::uint64_t evaluations = 0;
  std::uint64_t trainings = 0;
  double wall_clock_seconds = 0.0;
};

struct JointReport {
  PlayerUpdateReport players;
  std::vector<TaskAddReport> tasks;
};

// Maintains a Shapley matrix against a game under streaming updates.
//
// Anchor columns carry a basis: the coalition their current values were
// solved over. A column whose basis equals the present support is a local
// solution and may be corrected additively on monotone support growth;
// anything else is re-solved from scratch when its support changes.
//
// The engine mutates both the game and the matrix it was given. Events are
// processed one at a time.
class Engine {
 public:
  Engine(Game& game, ShapleyMatrix& matrix, EngineConfig config);

  const EngineConfig& config() const { return config_; }
  AnchorSet anchor_set() const;

  // Records what an existing anchor column was solved over.
  void set_basis(TaskId anchor, Coalition basis, Provenance provenance);
  std::optional<Coalition> basis(TaskId anchor) const;

  // Solves N(t) exactly (or by sampling above k_max), using the engine's
  // deterministic sampling stream for task t.
  EstimateReport solve_local(TaskId t) const;

  // Interpolates a registered task from its nearest label-compatible anchors.
  // Throws NoCompatibleAnchor when every anchor is incompatible.
  Interpolation task_update(TaskId t) const;

  // Distances from a registered task to every anchor, in pivot order.
  std::vector<double> anchor_distances(TaskId t) const;

  // Registers the task and appends its column: interpolated when some anchor
  // lies within tau, otherwise solved and appended as a new last anchor.
  TaskAddReport add_task(TaskId t, DataPoint point);
  void delete_task(TaskId t);

  PlayerUpdateReport add_player(DataPoint point);
  PlayerUpdateReport delete_player(PlayerId z);
  PlayerUpdateReport replace_player(PlayerId old_id, DataPoint replacement);

  // Player arrivals first, then each new task under the tau / kappa rule.
  JointReport joint_update(std::vector<DataPoint> players,
                           std::vector<std::pair<TaskId, DataPoint>> tasks);

 private:
  struct AnchorState {
    std::optional<Coalition> basis;
    Provenance provenance = Provenance::kExactLocal;
  };

  const SupportProfile& cached_profile(TaskId t) const;
  std::map<TaskId, Coalition> anchor_supports() const;
  // Re-solves every anchor whose support differs from `before`.
  void refresh_affected(const std::map<TaskId, Coalition>& before,
                        std::optional<PlayerId> arrival, PlayerUpdateReport& report);
  void write_solution(TaskId a, const Coalition& old_support, const Coalition& support,
                      const ValueColumn& values);
  TaskAddReport append_solved(TaskId t, TaskAddReport report);
  TaskAddReport append_interpolated(TaskId t, Interpolation interp, TaskAddReport report);

  Game& game_;
  ShapleyMatrix& matrix_;
  EngineConfig config_;
  std::map<TaskId, AnchorState> anchors_;
  mutable std::map<TaskId, std::pair<std::uint64_t, SupportProfile>> profiles_;
};

}  // namespace shapmat

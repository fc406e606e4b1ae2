#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "shapmat/core/coalition.hpp"
#include "shapmat/core/ids.hpp"
#include "shapmat/core/value_column.hpp"
#include "shapmat/models/data_point.hpp"
#include "shapmat/models/decision_tree.hpp"
#include "shapmat/models/model_family.hpp"
#include "shapmat/models/support_profile.hpp"

namespace shapmat {

struct GameConfig {
  ModelFamily family = WknnParams{};
  UtilityKind utility = UtilityKind::kConfidence;
  // Prediction of the empty-coalition model for the classifier families.
  int default_class = 0;
  // 0 means "one more than the largest label seen at construction".
  int num_classes = 0;
  // Hard cap on |N(t)| returned by support().
  std::size_t support_cap = 20;
  bool cache_enabled = true;
  // The model cache is dropped wholesale once it holds this many coalitions.
  std::size_t cache_capacity = std::size_t{1} << 18;
  // Teleport probability for PPR profiles when a graph is attached.
  double ppr_alpha = 0.15;
  double ppr_tolerance = 1e-8;
};

using PointRef = std::shared_ptr<const DataPoint>;

struct NeighborVoteModel {  // WKNN and RBF scorer: the coalition's records
  std::vector<PointRef> points;
};
struct TreeModel {
  DecisionTree tree;
};
struct LinearModel {
  Eigen::VectorXd theta;
};

using TrainedModel = std::variant<NeighborVoteModel, TreeModel, LinearModel>;
using ModelHandle = std::shared_ptr<const TrainedModel>;

// Task-conditioned cooperative game v_t(S) = g(theta(S), t).
//
// The game owns the current player universe, the registered tasks, and any
// universe-level structure (the fitted tree). Utilities are deterministic and
// the model for a coalition is trained at most once while it is cached;
// trainings() counts actual trainings, so cache hits are free.
//
// Concurrent utility() calls are safe. Mutating the universe or the task
// registry is not, and must not overlap with evaluation.
class Game {
 public:
  Game(GameConfig config, std::vector<DataPoint> players);

  const GameConfig& config() const { return config_; }
  int num_classes() const { return num_classes_; }

  // --- universe -----------------------------------------------------------
  const Coalition& universe() const { return universe_; }
  std::uint64_t epoch() const { return epoch_; }
  bool has_player(PlayerId z) const { return players_.contains(z); }
  const DataPoint& player(PlayerId z) const;
  PointRef player_ref(PlayerId z) const;
  void add_player(DataPoint point);
  void remove_player(PlayerId z);

  // --- tasks --------------------------------------------------------------
  void add_task(TaskId t, DataPoint point, std::optional<PlayerId> proxy_of = {});
  void remove_task(TaskId t);
  bool has_task(TaskId t) const { return tasks_.contains(t); }
  const DataPoint& task(TaskId t) const;
  std::optional<PlayerId> proxy_of(TaskId t) const;
  void attach_graph(Graph graph);
  bool has_graph() const { return graph_.has_value(); }

  // Fits universe-level structure and keeps it refitted on every universe
  // change afterwards. Required before tree supports or profiles.
  void fit();
  bool fitted() const { return fitted_; }

  // --- evaluation ---------------------------------------------------------
  ModelHandle train(const Coalition& s) const;
  // Always trains, never touches the cache; counts as a training.
  ModelHandle train_uncached(const Coalition& s) const;
  double utility(const Coalition& s, TaskId t) const;
  // Vote models predict default_class when every class ties, which covers
  // the empty coalition. Unknown task labels score as never predicted.
  double evaluate(const TrainedModel& model, const DataPoint& task) const;

  std::uint64_t trainings() const { return trainings_.load(); }
  std::uint64_t utility_evaluations() const { return evaluations_.load(); }
  void clear_cache() const;

  // --- locality -----------------------------------------------------------
  // N(t) over the current universe, excluding the task's own proxy player.
  SupportSet support(TaskId t) const;
  // Profile of the family's natural kind.
  SupportProfile profile(TaskId t) const;
  SupportProfile profile(TaskId t, ProfileKind kind) const;
  ProfileKind natural_profile_kind() const;

  double rbf_gamma() const { return rbf_gamma_; }
  // For RidgeERM: B = sqrt(2 C0 / mu) and L_Gamma = L_l * B.
  double ridge_norm_bound() const;
  double ridge_task_lipschitz() const;
  const std::vector<double>& representation(const DataPoint& p) const;

 private:
  struct CacheEntry {
    std::once_flag once;
    ModelHandle model;
  };

  TrainedModel fit_model(const Coalition& s) const;
  Eigen::VectorXd fit_ridge(const std::vector<PointRef>& points,
                            const RidgeParams& params) const;
  void check_point(const DataPoint& p) const;
  std::vector<double> class_proba(const TrainedModel& model, const DataPoint& task) const;
  double linear_score(const LinearModel& model, const DataPoint& task) const;
  // Universe members eligible for task t, i.e. without its proxy player.
  std::vector<PointRef> eligible(TaskId t) const;
  void on_universe_changed();

  GameConfig config_;
  int num_classes_ = 0;
  double rbf_gamma_ = 1.0;
  std::optional<std::size_t> dimension_;

  std::map<PlayerId, PointRef> players_;
  Coalition universe_;
  std::uint64_t epoch_ = 0;
  std::set<PlayerId> retired_;

  struct TaskEntry {
    DataPoint point;
    std::optional<PlayerId> proxy_of;
  };
  std::map<TaskId, TaskEntry> tasks_;
  std::optional<Graph> graph_;

  bool fitted_ = false;
  std::optional<DecisionTree> universe_tree_;
  std::uint64_t tree_id_ = 0;

  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<std::string, std::shared_ptr<CacheEntry>> cache_;
  mutable std::atomic<std::uint64_t> trainings_{0};
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

}  // namespace shapmat

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "shapmat/core/ids.hpp"
#include "shapmat/core/value_column.hpp"

namespace shapmat {

// Dense player-by-task matrix of Shapley values.
//
// Storage is column-major: a column is the unit that updates rewrite. An entry
// is ABSENT exactly when its task is the leave-one-out proxy task of its
// player; ABSENT is never produced for any other reason and never defaulted.
// Players outside a task's support hold 0.0.
//
// Anchors are tracked in insertion order, which is the pivot ordering used by
// shared subset scheduling.
class ShapleyMatrix {
 public:
  ShapleyMatrix() = default;

  std::size_t num_players() const { return players_.size(); }
  std::size_t num_tasks() const { return tasks_.size(); }
  std::span<const PlayerId> players() const { return players_; }
  std::span<const TaskId> tasks() const { return tasks_; }

  bool has_player(PlayerId z) const { return player_index_.contains(z); }
  bool has_task(TaskId t) const { return task_index_.contains(t); }
  std::size_t player_index(PlayerId z) const;
  std::size_t task_index(TaskId t) const;

  // nullopt means ABSENT. Unknown ids throw kNotFound.
  std::optional<double> get(PlayerId z, TaskId t) const;
  bool is_absent(PlayerId z, TaskId t) const;

  // Raw column; ABSENT cells hold quiet NaN. Indexed like players().
  std::span<const double> column(TaskId t) const;

  // Writes a finite value. Writing onto an ABSENT cell throws kInvalidArgument.
  void set(PlayerId z, TaskId t, double value);

  // Overwrites the whole column: listed players take their value, every other
  // non-ABSENT cell becomes 0.0.
  void set_column(const ValueColumn& column);

  // New row of zeros. Throws kAlreadyExists.
  void append_row(PlayerId z);
  // Appends `column` (unlisted players zero). `proxy_of` marks the task as the
  // leave-one-out proxy of that player, making the diagonal cell ABSENT.
  void append_column(const ValueColumn& column, bool as_anchor,
                     std::optional<PlayerId> proxy_of = std::nullopt);
  void remove_row(PlayerId z);
  void remove_column(TaskId t);

  bool is_anchor(TaskId t) const;
  std::span<const TaskId> anchor_order() const { return anchor_order_; }
  // Turns an existing column into an anchor placed last in the ordering.
  void promote_to_anchor(TaskId t);

  std::optional<PlayerId> proxy_of(TaskId t) const;

  void set_player_label(PlayerId z, int label);
  void set_task_label(TaskId t, int label);
  std::optional<int> player_label(PlayerId z) const;
  std::optional<int> task_label(TaskId t) const;
  const std::map<PlayerId, int>& player_labels() const { return player_labels_; }
  const std::map<TaskId, int>& task_labels() const { return task_labels_; }

  // Column as a sparse map over non-zero, non-ABSENT cells.
  ValueColumn to_column(TaskId t) const;

  // Bitwise comparison of ids, anchors, proxies and values (ABSENT == ABSENT).
  friend bool operator==(const ShapleyMatrix& a, const ShapleyMatrix& b);

 private:
  void reindex_players();
  void reindex_tasks();

  std::vector<PlayerId> players_;
  std::vector<TaskId> tasks_;
  std::unordered_map<PlayerId, std::size_t> player_index_;
  std::unordered_map<TaskId, std::size_t> task_index_;
  std::vector<std::vector<double>> columns_;  // columns_[task][player]
  std::vector<TaskId> anchor_order_;
  std::map<TaskId, PlayerId> proxies_;
  std::map<PlayerId, int> player_labels_;
  std::map<TaskId, int> task_labels_;
};

}  // namespace shapmat

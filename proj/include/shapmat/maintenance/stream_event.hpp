#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shapmat/core/ids.hpp"
#include "shapmat/maintenance/engine.hpp"
#include "shapmat/models/data_point.hpp"

namespace shapmat {

enum class EventKind {
  kTaskAdd,
  kTaskDelete,
  kTaskReplace,
  kPlayerAdd,
  kPlayerDelete,
  kPlayerReplace,
  kJoint,
};

const char* to_string(EventKind kind) noexcept;
EventKind event_kind_from_string(const std::string& name);

// One update. Payload use by kind:
//   TASK_ADD        tasks[0]
//   TASK_DELETE     target_task
//   TASK_REPLACE    target_task, tasks[0]
//   PLAYER_ADD      players[0]
//   PLAYER_DELETE   target_player
//   PLAYER_REPLACE  target_player, players[0]
//   JOINT           players, tasks (either may be empty)
struct StreamEvent {
  EventKind kind = EventKind::kTaskAdd;
  std::vector<DataPoint> players;
  std::vector<std::pair<TaskId, DataPoint>> tasks;
  std::optional<PlayerId> target_player;
  std::optional<TaskId> target_task;

  // Throws kInvalidArgument when the payload does not fit the kind.
  void validate() const;
};

struct EventOutcome {
  EventKind kind = EventKind::kTaskAdd;
  std::vector<TaskId> affected_tasks;
  std::uint64_t evaluations = 0;
  std::uint64_t trainings = 0;
  double bound = 0.0;
  std::size_t anchors_added = 0;
  double wall_clock_seconds = 0.0;
};

EventOutcome apply_event(Engine& engine, const StreamEvent& event);

}  // namespace shapmat

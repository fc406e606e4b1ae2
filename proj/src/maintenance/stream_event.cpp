#include "shapmat/maintenance/stream_event.hpp"

#include <chrono>

#include "shapmat/core/error.hpp"

namespace shapmat {
namespace {

void require(bool ok, EventKind kind, const char* what) {
  if (!ok) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(to_string(kind)) + " event needs " + what);
  }
}

void absorb(EventOutcome& out, const PlayerUpdateReport& r) {
  out.affected_tasks.insert(out.affected_tasks.end(), r.affected_tasks.begin(),
                            r.affected_tasks.end());
  out.evaluations += r.evaluations;
  out.trainings += r.trainings;
  out.bound += r.bound;
}

void absorb(EventOutcome& out, const TaskAddReport& r) {
  out.affected_tasks.push_back(r.task);
  out.evaluations += r.evaluations;
  out.trainings += r.trainings;
  if (r.expanded) ++out.anchors_added;
}

}  // namespace

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::kTaskAdd: return "TASK_ADD";
    case EventKind::kTaskDelete: return "TASK_DELETE";
    case EventKind::kTaskReplace: return "TASK_REPLACE";
    case EventKind::kPlayerAdd: return "PLAYER_ADD";
    case EventKind::kPlayerDelete: return "PLAYER_DELETE";
    case EventKind::kPlayerReplace: return "PLAYER_REPLACE";
    case EventKind::kJoint: return "JOINT";
  }
  return "UNKNOWN";
}

EventKind event_kind_from_string(const std::string& name) {
  for (EventKind k : {EventKind::kTaskAdd, EventKind::kTaskDelete, EventKind::kTaskReplace,
                      EventKind::kPlayerAdd, EventKind::kPlayerDelete,
                      EventKind::kPlayerReplace, EventKind::kJoint}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown event kind '" + name + "'");
}

void StreamEvent::validate() const {
  switch (kind) {
    case EventKind::kTaskAdd:
      require(tasks.size() == 1 && players.empty(), kind, "exactly one task");
      break;
    case EventKind::kTaskDelete:
      require(target_task.has_value() && tasks.empty() && players.empty(), kind,
              "a target task only");
      break;
    case EventKind::kTaskReplace:
      require(target_task.has_value() && tasks.size() == 1 && players.empty(), kind,
              "a target task and one task");
      break;
    case EventKind::kPlayerAdd:
      require(players.size() == 1 && tasks.empty(), kind, "exactly one player");
      break;
    case EventKind::kPlayerDelete:
      require(target_player.has_value() && tasks.empty() && players.empty(), kind,
              "a target player only");
      break;
    case EventKind::kPlayerReplace:
      require(target_player.has_value() && players.size() == 1 && tasks.empty(), kind,
              "a target player and one player");
      break;
    case EventKind::kJoint:
      require(!target_task && !target_player, kind, "no targets");
      break;
  }
}

EventOutcome apply_event(Engine& engine, const StreamEvent& event) {
  event.validate();
  const auto start = std::chrono::steady_clock::now();
  EventOutcome out;
  out.kind = event.kind;
  switch (event.kind) {
    case EventKind::kTaskAdd:
      absorb(out, engine.add_task(event.tasks[0].first, event.tasks[0].second));
      break;
    case EventKind::kTaskDelete:
      engine.delete_task(*event.target_task);
      out.affected_tasks.push_back(*event.target_task);
      break;
    case EventKind::kTaskReplace:
      engine.delete_task(*event.target_task);
      out.affected_tasks.push_back(*event.target_task);
      absorb(out, engine.add_task(event.tasks[0].first, event.tasks[0].second));
      break;
    case EventKind::kPlayerAdd:
      absorb(out, engine.add_player(event.players[0]));
      break;
    case EventKind::kPlayerDelete:
      absorb(out, engine.delete_player(*event.target_player));
      break;
    case EventKind::kPlayerReplace:
      absorb(out, engine.replace_player(*event.target_player, event.players[0]));
      break;
    case EventKind::kJoint: {
      const JointReport r = engine.joint_update(event.players, event.tasks);
      absorb(out, r.players);
      for (const TaskAddReport& t : r.tasks) absorb(out, t);
      break;
    }
  }
  out.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shapmat

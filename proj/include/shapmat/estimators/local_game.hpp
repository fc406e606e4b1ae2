#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include "shapmat/core/coalition.hpp"
#include "shapmat/core/ids.hpp"
#include "shapmat/models/game.hpp"

namespace shapmat {

// A characteristic function over coalitions. Implementations must be safe
// to call concurrently.
class LocalGame {
 public:
  virtual ~LocalGame() = default;
  virtual double value(const Coalition& s) const = 0;
  // Cumulative model trainings behind value(); 0 for closed-form games.
  virtual std::uint64_t trainings() const { return 0; }
};

// v_t of a registered task.
class TaskGame : public LocalGame {
 public:
  TaskGame(const Game& game, TaskId task) : game_(game), task_(task) {}

  double value(const Coalition& s) const override { return game_.utility(s, task_); }
  std::uint64_t trainings() const override { return game_.trainings(); }

 private:
  const Game& game_;
  TaskId task_;
};

class FunctionGame : public LocalGame {
 public:
  explicit FunctionGame(std::function<double(const Coalition&)> fn) : fn_(std::move(fn)) {}

  double value(const Coalition& s) const override { return fn_(s); }

 private:
  std::function<double(const Coalition&)> fn_;
};

}  // namespace shapmat

#include "shapmat/core/shapley_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "shapmat/core/error.hpp"

namespace shapmat {
namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void not_found(const char* what, std::uint64_t id) {
  throw Error(ErrorCode::kNotFound, std::string(what) + " " + std::to_string(id));
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

std::size_t ShapleyMatrix::player_index(PlayerId z) const {
  auto it = player_index_.find(z);
  if (it == player_index_.end()) not_found("player", z.value());
  return it->second;
}

std::size_t ShapleyMatrix::task_index(TaskId t) const {
  auto it = task_index_.find(t);
  if (it == task_index_.end()) not_found("task", t.value());
  return it->second;
}

std::optional<double> ShapleyMatrix::get(PlayerId z, TaskId t) const {
  const std::size_t j = task_index(t);
  const std::size_t i = player_index(z);
  const double v = columns_[j][i];
  if (std::isnan(v)) return std::nullopt;
  return v;
}

bool ShapleyMatrix::is_absent(PlayerId z, TaskId t) const {
  return !get(z, t).has_value();
}

std::span<const double> ShapleyMatrix::column(TaskId t) const {
  return columns_[task_index(t)];
}

void ShapleyMatrix::set(PlayerId z, TaskId t, double value) {
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::kInvalidArgument, "matrix entries must be finite");
  }
  double& cell = columns_[task_index(t)][player_index(z)];
  if (std::isnan(cell)) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot overwrite the ABSENT diagonal of proxy task " +
                    std::to_string(t.value()));
  }
  cell = value;
}

void ShapleyMatrix::set_column(const ValueColumn& column) {
  auto& cells = columns_[task_index(column.task)];
  for (const auto& [z, v] : column.entries) {
    const std::size_t i = player_index(z);
    if (std::isnan(cells[i])) {
      throw Error(ErrorCode::kInvalidArgument, "value supplied for ABSENT cell");
    }
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "matrix entries must be finite");
    }
  }
  for (double& c : cells) {
    if (!std::isnan(c)) c = 0.0;
  }
  for (const auto& [z, v] : column.entries) cells[player_index_.at(z)] = v;
}

void ShapleyMatrix::append_row(PlayerId z) {
  if (has_player(z)) {
    throw Error(ErrorCode::kAlreadyExists, "player " + std::to_string(z.value()));
  }
  player_index_.emplace(z, players_.size());
  players_.push_back(z);
  for (auto& col : columns_) col.push_back(0.0);
}

void ShapleyMatrix::append_column(const ValueColumn& column, bool as_anchor,
                                  std::optional<PlayerId> proxy_of) {
  if (has_task(column.task)) {
    throw Error(ErrorCode::kAlreadyExists,
                "task " + std::to_string(column.task.value()));
  }
  std::vector<double> cells(players_.size(), 0.0);
  for (const auto& [z, v] : column.entries) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "matrix entries must be finite");
    }
    cells[player_index(z)] = v;
  }
  if (proxy_of && has_player(*proxy_of)) {
    cells[player_index(*proxy_of)] = kAbsent;
  }
  task_index_.emplace(column.task, tasks_.size());
  tasks_.push_back(column.task);
  columns_.push_back(std::move(cells));
  if (proxy_of) proxies_[column.task] = *proxy_of;
  if (as_anchor) anchor_order_.push_back(column.task);
}

void ShapleyMatrix::remove_row(PlayerId z) {
  const std::size_t i = player_index(z);
  players_.erase(players_.begin() + static_cast<std::ptrdiff_t>(i));
  for (auto& col : columns_) col.erase(col.begin() + static_cast<std::ptrdiff_t>(i));
  std::erase_if(proxies_, [z](const auto& kv) { return kv.second == z; });
  player_labels_.erase(z);
  reindex_players();
}

void ShapleyMatrix::remove_column(TaskId t) {
  const std::size_t j = task_index(t);
  tasks_.erase(tasks_.begin() + static_cast<std::ptrdiff_t>(j));
  columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(j));
  std::erase(anchor_order_, t);
  proxies_.erase(t);
  task_labels_.erase(t);
  reindex_tasks();
}

bool ShapleyMatrix::is_anchor(TaskId t) const {
  task_index(t);
  return std::find(anchor_order_.begin(), anchor_order_.end(), t) !=
         anchor_order_.end();
}

void ShapleyMatrix::promote_to_anchor(TaskId t) {
  if (is_anchor(t)) {
    throw Error(ErrorCode::kAlreadyExists,
                "task " + std::to_string(t.value()) + " is already an anchor");
  }
  anchor_order_.push_back(t);
}

std::optional<PlayerId> ShapleyMatrix::proxy_of(TaskId t) const {
  auto it = proxies_.find(t);
  if (it == proxies_.end()) return std::nullopt;
  return it->second;
}

void ShapleyMatrix::set_player_label(PlayerId z, int label) {
  player_index(z);
  player_labels_[z] = label;
}

void ShapleyMatrix::set_task_label(TaskId t, int label) {
  task_index(t);
  task_labels_[t] = label;
}

std::optional<int> ShapleyMatrix::player_label(PlayerId z) const {
  auto it = player_labels_.find(z);
  if (it == player_labels_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> ShapleyMatrix::task_label(TaskId t) const {
  auto it = task_labels_.find(t);
  if (it == task_labels_.end()) return std::nullopt;
  return it->second;
}

ValueColumn ShapleyMatrix::to_column(TaskId t) const {
  ValueColumn out;
  out.task = t;
  const auto& cells = columns_[task_index(t)];
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!std::isnan(cells[i]) && cells[i] != 0.0) out.entries[players_[i]] = cells[i];
  }
  return out;
}

void ShapleyMatrix::reindex_players() {
  player_index_.clear();
  for (std::size_t i = 0; i < players_.size(); ++i) player_index_.emplace(players_[i], i);
}

void ShapleyMatrix::reindex_tasks() {
  task_index_.clear();
  for (std::size_t j = 0; j < tasks_.size(); ++j) task_index_.emplace(tasks_[j], j);
}

bool operator==(const ShapleyMatrix& a, const ShapleyMatrix& b) {
  if (a.players_ != b.players_ || a.tasks_ != b.tasks_ ||
      a.anchor_order_ != b.anchor_order_ || a.proxies_ != b.proxies_) {
    return false;
  }
  for (std::size_t j = 0; j < a.columns_.size(); ++j) {
    for (std::size_t i = 0; i < a.players_.size(); ++i) {
      if (!same_bits(a.columns_[j][i], b.columns_[j][i])) return false;
    }
  }
  return true;
}

}  // namespace shapmat

#include "shapmat/maintenance/engine.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <unordered_map>

#include "shapmat/core/error.hpp"
#include "shapmat/estimators/rng.hpp"

namespace shapmat {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

// Remembers every coalition it has answered so sampling estimators report
// distinct evaluations.
class MemoGame : public LocalGame {
 public:
  explicit MemoGame(const LocalGame& inner) : inner_(inner) {}

  double value(const Coalition& s) const override {
    const std::string key = s.key();
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = memo_.find(key);
      if (it != memo_.end()) return it->second;
    }
    const double v = inner_.value(s);
    std::lock_guard<std::mutex> lock(mutex_);
    memo_.emplace(key, v);
    return v;
  }
  std::uint64_t trainings() const override { return inner_.trainings(); }
  std::uint64_t distinct() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return memo_.size();
  }

 private:
  const LocalGame& inner_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, double> memo_;
};

void merge_into(PlayerUpdateReport& into, const PlayerUpdateReport& from) {
  for (TaskId t : from.affected_tasks) {
    if (std::find(into.affected_tasks.begin(), into.affected_tasks.end(), t) ==
        into.affected_tasks.end()) {
      into.affected_tasks.push_back(t);
    }
  }
  into.evaluations += from.evaluations;
  into.trainings += from.trainings;
  for (const auto& [key, delta] : from.corrections) into.corrections[key] = delta;
  into.largest_support = std::max(into.largest_support, from.largest_support);
  into.bound += from.bound;
  into.wall_clock_seconds += from.wall_clock_seconds;
}

}  // namespace

void EngineConfig::validate() const {
  distance.validate();
  if (!(tau >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "tau must be >= 0");
  if (k_interp < 1) throw Error(ErrorCode::kInvalidArgument, "k_interp must be >= 1");
  if (k_max < 1 || k_max > kHardExactLimit) {
    throw Error(ErrorCode::kInvalidArgument,
                "k_max must lie in [1, " + std::to_string(kHardExactLimit) + "]");
  }
  mc.validate();
}

Engine::Engine(Game& game, ShapleyMatrix& matrix, EngineConfig config)
    : game_(game), matrix_(matrix), config_(std::move(config)) {
  config_.validate();
  for (TaskId a : matrix_.anchor_order()) {
    if (!game_.has_task(a)) {
      throw Error(ErrorCode::kNotFound,
                  "anchor " + std::to_string(a.value()) + " is not a task of the game");
    }
    anchors_.emplace(a, AnchorState{});
  }
}

AnchorSet Engine::anchor_set() const {
  const auto order = matrix_.anchor_order();
  return AnchorSet{{order.begin(), order.end()}, config_.tau, config_.k_interp};
}

void Engine::set_basis(TaskId anchor, Coalition basis, Provenance provenance) {
  auto it = anchors_.find(anchor);
  if (it == anchors_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown anchor " + std::to_string(anchor.value()));
  }
  it->second = AnchorState{std::move(basis), provenance};
}

std::optional<Coalition> Engine::basis(TaskId anchor) const {
  auto it = anchors_.find(anchor);
  if (it == anchors_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown anchor " + std::to_string(anchor.value()));
  }
  return it->second.basis;
}

const SupportProfile& Engine::cached_profile(TaskId t) const {
  auto it = profiles_.find(t);
  if (it == profiles_.end() || it->second.first != game_.epoch()) {
    SupportProfile p = game_.profile(t, config_.distance.kind);
    it = profiles_.insert_or_assign(t, std::make_pair(game_.epoch(), std::move(p))).first;
  }
  return it->second.second;
}

EstimateReport Engine::solve_local(TaskId t) const {
  const SupportSet support = game_.support(t);
  const TaskGame local(game_, t);
  if (support.members.size() <= config_.k_max) {
    return exact_local_shapley(local, support.members, t, config_.k_max);
  }
  McConfig mc = config_.mc;
  mc.seed = splitmix64(config_.mc.seed ^ splitmix64(t.value())) ^ game_.epoch();
  const MemoGame memo(local);
  EstimateReport report = permutation_mc(memo, support.members, t, mc, false);
  report.utility_evaluations = memo.distinct();
  return report;
}

std::vector<double> Engine::anchor_distances(TaskId t) const {
  const SupportProfile& target = cached_profile(t);
  std::vector<double> out;
  out.reserve(matrix_.anchor_order().size());
  for (TaskId a : matrix_.anchor_order()) {
    out.push_back(d_gamma(target, cached_profile(a), config_.distance));
  }
  return out;
}

Interpolation Engine::task_update(TaskId t) const {
  const std::vector<double> dist = anchor_distances(t);
  const auto order = matrix_.anchor_order();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (std::isfinite(dist[i])) candidates.push_back(i);
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoCompatibleAnchor,
                "no label-compatible anchor for task " + std::to_string(t.value()));
  }
  // Stable sort keeps pivot order among equal distances.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
  candidates.resize(std::min(candidates.size(), config_.k_interp));

  Interpolation out;
  out.column = ValueColumn{t, {}, Provenance::kInterpolated};
  if (dist[candidates.front()] == 0.0) {
    while (dist[candidates.back()] != 0.0) candidates.pop_back();
    for (std::size_t i : candidates) {
      out.anchors.push_back(order[i]);
      out.distances.push_back(0.0);
      out.weights.push_back(1.0 / static_cast<double>(candidates.size()));
    }
  } else {
    double total = 0.0;
    for (std::size_t i : candidates) total += 1.0 / (dist[i] + 1e-9);
    for (std::size_t i : candidates) {
      out.anchors.push_back(order[i]);
      out.distances.push_back(dist[i]);
      out.weights.push_back(1.0 / (dist[i] + 1e-9) / total);
    }
  }

  std::vector<std::span<const double>> cols;
  for (TaskId a : out.anchors) cols.push_back(matrix_.column(a));
  const auto players = matrix_.players();
  for (std::size_t row = 0; row < players.size(); ++row) {
    // A proxy anchor has no value for its own player; reweight the others.
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double v = cols[j][row];
      if (std::isnan(v)) continue;
      num += out.weights[j] * v;
      den += out.weights[j];
    }
    const double value = den > 0.0 ? num / den : 0.0;
    if (value != 0.0) out.column.entries.emplace(players[row], value);
  }
  return out;
}

TaskAddReport Engine::append_solved(TaskId t, TaskAddReport report) {
  const auto trainings_before = game_.trainings();
  EstimateReport solved = solve_local(t);
  const SupportSet support = game_.support(t);
  report.expanded = true;
  report.provenance = solved.column.provenance;
  report.evaluations = solved.utility_evaluations;
  report.trainings = game_.trainings() - trainings_before;
  matrix_.append_column(solved.column, true);
  matrix_.set_task_label(t, game_.task(t).label);
  anchors_[t] = AnchorState{support.members, solved.column.provenance};
  return report;
}

TaskAddReport Engine::append_interpolated(TaskId t, Interpolation interp,
                                          TaskAddReport report) {
  report.expanded = false;
  report.provenance = Provenance::kInterpolated;
  matrix_.append_column(interp.column, false);
  matrix_.set_task_label(t, game_.task(t).label);
  report.interpolation = std::move(interp);
  return report;
}

TaskAddReport Engine::add_task(TaskId t, DataPoint point) {
  const auto start = Clock::now();
  if (matrix_.has_task(t)) {
    throw Error(ErrorCode::kAlreadyExists, "task " + std::to_string(t.value()) + " exists");
  }
  game_.add_task(t, std::move(point));
  TaskAddReport report;
  report.task = t;
  try {
    const std::vector<double> dist = anchor_distances(t);
    report.min_distance = dist.empty() ? std::numeric_limits<double>::infinity()
                                       : *std::min_element(dist.begin(), dist.end());
    if (report.min_distance <= config_.tau) {
      report = append_interpolated(t, task_update(t), std::move(report));
    } else {
      report = append_solved(t, std::move(report));
    }
  } catch (...) {
    if (!matrix_.has_task(t)) {
      game_.remove_task(t);
      profiles_.erase(t);
    }
    throw;
  }
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

void Engine::delete_task(TaskId t) {
  matrix_.remove_column(t);
  game_.remove_task(t);
  anchors_.erase(t);
  profiles_.erase(t);
}

std::map<TaskId, Coalition> Engine::anchor_supports() const {
  std::map<TaskId, Coalition> out;
  for (TaskId a : matrix_.anchor_order()) out.emplace(a, game_.support(a).members);
  return out;
}

void Engine::write_solution(TaskId a, const Coalition& old_support, const Coalition& support,
                            const ValueColumn& values) {
  const Coalition touched = set_union(old_support, support);
  for (PlayerId z : touched.members()) {
    if (matrix_.has_player(z) && !matrix_.is_absent(z, a)) matrix_.set(z, a, 0.0);
  }
  for (const auto& [z, v] : values.entries) matrix_.set(z, a, v);
}

void Engine::refresh_affected(const std::map<TaskId, Coalition>& before,
                              std::optional<PlayerId> arrival,
                              PlayerUpdateReport& report) {
  const auto trainings_before = game_.trainings();
  std::size_t largest = 0;
  for (TaskId a : std::vector<TaskId>(matrix_.anchor_order().begin(),
                                      matrix_.anchor_order().end())) {
    const Coalition& old_support = before.at(a);
    const Coalition support = game_.support(a).members;
    if (support == old_support) continue;
    report.affected_tasks.push_back(a);
    largest = std::max({largest, old_support.size(), support.size()});
    AnchorState& state = anchors_[a];

    const bool monotone = arrival && support == old_support.with(*arrival) &&
                          state.basis && *state.basis == old_support &&
                          state.provenance == Provenance::kExactLocal &&
                          support.size() <= config_.k_max;
    if (monotone) {
      // Additive correction of the old local solution; only coalitions that
      // contain the arrival are new.
      const TaskGame local(game_, a);
      const std::size_t n = old_support.size();
      const std::uint64_t total = std::uint64_t{1} << n;
      std::vector<double> without(total);
      std::vector<double> with(total);
      for (std::uint64_t mask = 0; mask < total; ++mask) {
        const Coalition s = old_support.subset(mask);
        without[mask] = local.value(s);
        with[mask] = local.value(s.with(*arrival));
      }
      report.evaluations += total;
      const double scale = 1.0 / static_cast<double>(n + 1);
      double newcomer = 0.0;
      for (std::uint64_t mask = 0; mask < total; ++mask) {
        const auto size = static_cast<std::size_t>(std::popcount(mask));
        newcomer += (with[mask] - without[mask]) * scale / binomial(n, size);
      }
      const auto members = old_support.members();
      for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t bit = std::uint64_t{1} << j;
        double delta = 0.0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
          if (mask & bit) continue;
          const auto size = static_cast<std::size_t>(std::popcount(mask));
          const double second = (with[mask | bit] - without[mask | bit]) -
                                (with[mask] - without[mask]);
          delta += second * scale / binomial(n, size + 1);
        }
        const double old_value = *matrix_.get(members[j], a);
        matrix_.set(members[j], a, old_value + delta);
        report.corrections[{members[j], a}] = delta;
      }
      matrix_.set(*arrival, a, newcomer);
      state.basis = support;
      state.provenance = Provenance::kExactLocal;
    } else {
      const EstimateReport solved = solve_local(a);
      report.evaluations += solved.utility_evaluations;
      write_solution(a, old_support, support, solved.column);
      state.basis = support;
      state.provenance = solved.column.provenance;
    }
  }
  report.largest_support = largest;
  report.bound = static_cast<double>(report.affected_tasks.size()) *
                 std::ldexp(1.0, static_cast<int>(largest));
  report.trainings = game_.trainings() - trainings_before;
}

PlayerUpdateReport Engine::add_player(DataPoint point) {
  const auto start = Clock::now();
  const PlayerId z(point.id);
  if (game_.has_player(z) || matrix_.has_player(z)) {
    throw Error(ErrorCode::kAlreadyExists, "player " + std::to_string(z.value()) + " exists");
  }
  const int label = point.label;
  const auto before = anchor_supports();
  game_.add_player(std::move(point));
  matrix_.append_row(z);
  matrix_.set_player_label(z, label);
  PlayerUpdateReport report;
  refresh_affected(before, z, report);
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

PlayerUpdateReport Engine::delete_player(PlayerId z) {
  const auto start = Clock::now();
  if (!game_.has_player(z) || !matrix_.has_player(z)) {
    throw Error(ErrorCode::kNotFound, "unknown player " + std::to_string(z.value()));
  }
  const auto before = anchor_supports();
  game_.remove_player(z);
  matrix_.remove_row(z);
  PlayerUpdateReport report;
  refresh_affected(before, std::nullopt, report);
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

PlayerUpdateReport Engine::replace_player(PlayerId old_id, DataPoint replacement) {
  PlayerUpdateReport report = delete_player(old_id);
  merge_into(report, add_player(std::move(replacement)));
  return report;
}

JointReport Engine::joint_update(std::vector<DataPoint> players,
                                 std::vector<std::pair<TaskId, DataPoint>> tasks) {
  for (const auto& p : players) {
    if (game_.has_player(PlayerId(p.id))) {
      throw Error(ErrorCode::kAlreadyExists, "player " + std::to_string(p.id) + " exists");
    }
  }
  for (const auto& [t, p] : tasks) {
    if (matrix_.has_task(t) || game_.has_task(t)) {
      throw Error(ErrorCode::kAlreadyExists, "task " + std::to_string(t.value()) + " exists");
    }
  }

  // Supports of the new tasks as the universe stood before the batch.
  std::map<TaskId, Coalition> prior;
  for (auto& [t, p] : tasks) {
    game_.add_task(t, std::move(p));
    prior.emplace(t, game_.support(t).members);
  }

  JointReport report;
  for (DataPoint& p : players) merge_into(report.players, add_player(std::move(p)));

  for (const auto& entry : tasks) {
    const TaskId t = entry.first;
    const auto start = Clock::now();
    TaskAddReport task_report;
    task_report.task = t;
    const std::vector<double> dist = anchor_distances(t);
    task_report.min_distance = dist.empty() ? std::numeric_limits<double>::infinity()
                                            : *std::min_element(dist.begin(), dist.end());
    const std::size_t drift =
        symmetric_difference_size(prior.at(t), game_.support(t).members);
    if (task_report.min_distance > config_.tau || drift > config_.kappa) {
      task_report = append_solved(t, std::move(task_report));
    } else {
      task_report = append_interpolated(t, task_update(t), std::move(task_report));
    }
    task_report.wall_clock_seconds = seconds_since(start);
    report.tasks.push_back(std::move(task_report));
  }
  return report;
}

}  // namespace shapmat

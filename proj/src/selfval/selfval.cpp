#include "shapmat/selfval/selfval.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <set>

#include "shapmat/core/error.hpp"
#include "shapmat/estimators/rng.hpp"
#include "shapmat/util/parallel.hpp"

namespace shapmat {
namespace {

using Clock = std::chrono::steady_clock;

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(r);
}

// Leave-one-out weights for a game of m = n - 1 players, by coalition size.
struct LooWeights {
  std::vector<double> plus;
  std::vector<double> minus;

  explicit LooWeights(std::size_t n) : plus(n + 1, 0.0), minus(n + 1, 0.0) {
    if (n < 2) return;
    const double m = static_cast<double>(n - 1);
    for (std::size_t s = 0; s + 1 <= n; ++s) {
      if (s >= 1) plus[s] = 1.0 / (m * binomial(n - 2, s - 1));
      if (s <= n - 2) minus[s] = 1.0 / (m * binomial(n - 2, s));
    }
  }
};

struct FullSetup {
  std::vector<PlayerId> universe;
  std::vector<std::size_t> anchor_pos;  // index of each anchor in universe
  std::vector<const DataPoint*> tasks;
};

FullSetup full_setup(const Game& game, std::span<const PlayerId> anchors) {
  FullSetup setup;
  const auto members = game.universe().members();
  setup.universe.assign(members.begin(), members.end());
  for (PlayerId a : anchors) {
    const auto it = std::lower_bound(setup.universe.begin(), setup.universe.end(), a);
    setup.anchor_pos.push_back(static_cast<std::size_t>(it - setup.universe.begin()));
    setup.tasks.push_back(&game.task(proxy_task(a)));
  }
  return setup;
}

// Credits one coalition's anchor utilities into per-anchor rows.
void credit(const FullSetup& setup, const LooWeights& w, std::uint64_t mask, std::size_t size,
            std::size_t anchor, double v, double scale, std::vector<double>& row) {
  const std::size_t n = setup.universe.size();
  const std::size_t self = setup.anchor_pos[anchor];
  for (std::size_t z = 0; z < n; ++z) {
    if (z == self) continue;
    if (mask >> z & 1U) {
      row[z] += v * w.plus[size] * scale;
    } else {
      row[z] -= v * w.minus[size] * scale;
    }
  }
}

void build_full_exact(Game& game, const FullSetup& setup,
                      std::vector<std::vector<double>>& phi, BuildReport& report) {
  const std::size_t n = setup.universe.size();
  const std::size_t k = setup.anchor_pos.size();
  const std::uint64_t total = std::uint64_t{1} << n;
  const LooWeights w(n);
  const Coalition universe = game.universe();
  std::uint64_t anchor_mask = 0;
  for (std::size_t p : setup.anchor_pos) anchor_mask |= std::uint64_t{1} << p;

  // values[mask * k + j]: utility of anchor j on the pivot-trained model.
  std::vector<double> values(total * k, std::numeric_limits<double>::quiet_NaN());
  parallel_for(total, [&](std::size_t mask) {
    if ((mask & anchor_mask) == anchor_mask) return;
    const ModelHandle model = game.train_uncached(universe.subset(mask));
    for (std::size_t j = 0; j < k; ++j) {
      if (mask >> setup.anchor_pos[j] & 1U) continue;
      values[mask * k + j] = game.evaluate(*model, *setup.tasks[j]);
    }
  });
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    for (std::size_t j = 0; j < k; ++j) {
      const double v = values[mask * k + j];
      if (std::isnan(v)) continue;
      ++report.utility_evaluations;
      credit(setup, w, mask, size, j, v, 1.0, phi[j]);
    }
  }
  report.samples = total;
}

void build_full_naive(Game& game, const FullSetup& setup,
                      std::vector<std::vector<double>>& phi, BuildReport& report) {
  const Coalition universe = game.universe();
  for (std::size_t j = 0; j < setup.anchor_pos.size(); ++j) {
    const PlayerId a = setup.universe[setup.anchor_pos[j]];
    const DataPoint& task = *setup.tasks[j];
    const FunctionGame local([&](const Coalition& s) {
      return game.evaluate(*game.train_uncached(s), task);
    });
    const EstimateReport r =
        exact_local_shapley(local, universe.without(a), proxy_task(a), kHardExactLimit);
    for (std::size_t z = 0; z < setup.universe.size(); ++z) {
      if (z != setup.anchor_pos[j]) phi[j][z] = r.column.value_or_zero(setup.universe[z]);
    }
    report.utility_evaluations += r.utility_evaluations;
    report.samples += r.samples_used;
  }
}

void build_full_mc(Game& game, const FullSetup& setup, const McConfig& mc,
                   std::vector<std::vector<double>>& phi, BuildReport& report) {
  mc.validate();
  const std::size_t n = setup.universe.size();
  const std::size_t k = setup.anchor_pos.size();
  const LooWeights w(n);
  const auto members = game.universe().members();

  std::vector<std::vector<double>> totals(k, std::vector<double>(n, 0.0));
  std::vector<std::uint64_t> used_by(k, 0);
  std::vector<bool> active(k, true);
  std::vector<ValueColumn> prev(k);
  auto estimate = [&](std::size_t j) {
    ValueColumn col;
    for (std::size_t z = 0; z < n; ++z) {
      if (z == setup.anchor_pos[j]) continue;
      col.entries.emplace(setup.universe[z],
                          used_by[j] ? totals[j][z] / static_cast<double>(used_by[j]) : 0.0);
    }
    return col;
  };
  for (std::size_t j = 0; j < k; ++j) prev[j] = estimate(j);

  std::uint64_t used = 0;
  while (used < mc.max_samples && std::find(active.begin(), active.end(), true) != active.end()) {
    const std::size_t batch = std::min<std::size_t>(mc.check_interval, mc.max_samples - used);
    std::vector<std::vector<double>> sums(batch, std::vector<double>(k * n, 0.0));
    std::vector<std::vector<char>> hit(batch, std::vector<char>(k, 0));
    parallel_for(batch, [&](std::size_t b) {
      auto rng = stream_rng(mc.seed, used + b);
      const std::size_t size = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::shuffle(order.begin(), order.end(), rng);
      std::uint64_t mask = 0;
      std::vector<PlayerId> ids;
      for (std::size_t i = 0; i < size; ++i) mask |= std::uint64_t{1} << order[i];
      for (std::size_t z = 0; z < n; ++z) {
        if (mask >> z & 1U) ids.push_back(members[z]);
      }
      // Inverse sampling probability of this coalition: n * C(n, |S|).
      const double scale = static_cast<double>(n) * binomial(n, size);
      const ModelHandle model = game.train_uncached(Coalition::from_sorted(std::move(ids)));
      for (std::size_t j = 0; j < k; ++j) {
        if (!active[j]) continue;
        hit[b][j] = 1;
        if (mask >> setup.anchor_pos[j] & 1U) continue;
        hit[b][j] = 2;
        const double v = game.evaluate(*model, *setup.tasks[j]);
        std::vector<double> row(n, 0.0);
        credit(setup, w, mask, size, j, v, scale, row);
        std::copy(row.begin(), row.end(), sums[b].begin() + static_cast<std::ptrdiff_t>(j * n));
      }
    });
    for (std::size_t b = 0; b < batch; ++b) {
      for (std::size_t j = 0; j < k; ++j) {
        if (!hit[b][j]) continue;
        ++used_by[j];
        if (hit[b][j] == 2) ++report.utility_evaluations;
        for (std::size_t z = 0; z < n; ++z) totals[j][z] += sums[b][j * n + z];
      }
    }
    used += batch;
    for (std::size_t j = 0; j < k; ++j) {
      if (!active[j]) continue;
      ValueColumn curr = estimate(j);
      if (stopping_check(prev[j], curr, mc.rel_change_stop)) active[j] = false;
      prev[j] = std::move(curr);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t z = 0; z < n; ++z) {
      phi[j][z] = used_by[j] ? totals[j][z] / static_cast<double>(used_by[j]) : 0.0;
    }
  }
  report.samples = used;
}

}  // namespace

CoverageReport covering_radius(std::span<const PlayerId> players,
                               std::span<const PlayerId> anchors,
                               const PlayerDistance& distance) {
  if (anchors.empty()) throw Error(ErrorCode::kInvalidArgument, "no anchors given");
  std::vector<PlayerId> sorted(players.begin(), players.end());
  std::sort(sorted.begin(), sorted.end());
  CoverageReport report;
  for (PlayerId z : sorted) {
    double best = std::numeric_limits<double>::infinity();
    for (PlayerId a : anchors) best = std::min(best, z == a ? 0.0 : distance(z, a));
    report.nearest_anchor_distance[z] = best;
    if (!report.farthest || best > report.r_max) {
      report.r_max = best;
      report.farthest = z;
    }
  }
  return report;
}

AnchorSelection select_anchors_fps(std::span<const PlayerId> players, std::size_t k,
                                   const PlayerDistance& distance,
                                   std::optional<std::uint64_t> seed) {
  std::vector<PlayerId> sorted(players.begin(), players.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate player in anchor candidates");
  }
  const std::size_t n = sorted.size();
  if (k < 1 || k > n) {
    throw Error(ErrorCode::kInvalidBudget,
                "anchor budget " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<bool> chosen(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t next = seed ? static_cast<std::size_t>(splitmix64(*seed) % n) : 0;

  AnchorSelection out;
  for (std::size_t round = 0; round < k; ++round) {
    chosen[next] = true;
    out.anchors.push_back(sorted[next]);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = i == next ? 0.0 : distance(sorted[i], sorted[next]);
      nearest[i] = std::min(nearest[i], d);
    }
    if (round + 1 == k) break;
    std::optional<std::size_t> pick;
    for (std::size_t i = 0; i < n; ++i) {
      if (chosen[i]) continue;
      if (!pick || nearest[i] > nearest[*pick]) pick = i;
    }
    next = *pick;
  }
  out.coverage = covering_radius(sorted, out.anchors, distance);
  return out;
}

void register_proxy_tasks(Game& game) {
  for (PlayerId z : game.universe().members()) {
    const TaskId t = proxy_task(z);
    if (game.has_task(t)) {
      if (game.proxy_of(t) != z) {
        throw Error(ErrorCode::kAlreadyExists,
                    "task " + std::to_string(t.value()) + " exists and is not a proxy of " +
                        std::to_string(z.value()));
      }
      continue;
    }
    game.add_task(t, game.player(z), z);
  }
}

PlayerDistance proxy_distance(const Game& game, const DistanceConfig& config) {
  auto cache = std::make_shared<std::map<PlayerId, SupportProfile>>();
  auto mutex = std::make_shared<std::mutex>();
  auto profile = [&game, config, cache, mutex](PlayerId z) {
    std::lock_guard<std::mutex> lock(*mutex);
    auto it = cache->find(z);
    if (it == cache->end()) it = cache->emplace(z, game.profile(proxy_task(z), config.kind)).first;
    return it->second;
  };
  return [config, profile](PlayerId a, PlayerId b) {
    return d_gamma(profile(a), profile(b), config);
  };
}

std::optional<PlayerId> pivot_of(const Coalition& s, std::span<const PlayerId> order) {
  for (PlayerId a : order) {
    if (!s.contains(a)) return a;
  }
  return std::nullopt;
}

const char* to_string(SelfValMode mode) noexcept {
  switch (mode) {
    case SelfValMode::kExactShared: return "EXACT_SHARED";
    case SelfValMode::kMcShared: return "MC_SHARED";
    case SelfValMode::kNaive: return "NAIVE";
  }
  return "UNKNOWN";
}

const char* to_string(SelfValScope scope) noexcept {
  switch (scope) {
    case SelfValScope::kFull: return "FULL";
    case SelfValScope::kSupport: return "SUPPORT";
  }
  return "UNKNOWN";
}

SelfValMode selfval_mode_from_string(const std::string& name) {
  for (SelfValMode m : {SelfValMode::kExactShared, SelfValMode::kMcShared, SelfValMode::kNaive}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown self-valuation mode '" + name + "'");
}

SelfValScope selfval_scope_from_string(const std::string& name) {
  for (SelfValScope s : {SelfValScope::kFull, SelfValScope::kSupport}) {
    if (name == to_string(s)) return s;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown self-valuation scope '" + name + "'");
}

SelfValuation build_self_matrix(Game& game, std::span<const PlayerId> anchors,
                                const SelfValOptions& options) {
  const auto start = Clock::now();
  std::set<PlayerId> seen;
  for (PlayerId a : anchors) {
    if (!game.has_player(a)) {
      throw Error(ErrorCode::kNotFound, "anchor " + std::to_string(a.value()) + " is not a player");
    }
    if (!seen.insert(a).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate anchor " + std::to_string(a.value()));
    }
  }
  const std::size_t n = game.universe().size();
  const bool full = options.scope == SelfValScope::kFull;
  if (full && options.mode != SelfValMode::kMcShared && n > kExactSelfValLimit) {
    throw Error(ErrorCode::kTooLarge,
                "exact self-valuation over " + std::to_string(n) + " players exceeds " +
                    std::to_string(kExactSelfValLimit));
  }
  if (full && n > 63) {
    throw Error(ErrorCode::kTooLarge, "full-scope self-valuation supports at most 63 players");
  }
  for (PlayerId a : anchors) {
    const TaskId t = proxy_task(a);
    if (!game.has_task(t)) {
      game.add_task(t, game.player(a), a);
    } else if (game.proxy_of(t) != a) {
      throw Error(ErrorCode::kAlreadyExists,
                  "task " + std::to_string(t.value()) + " exists and is not a proxy");
    }
  }

  SelfValuation out;
  BuildReport& report = out.report;
  report.n = n;
  report.k = anchors.size();
  report.mode = options.mode;
  report.scope = options.scope;
  const std::uint64_t trainings_before = game.trainings();

  std::vector<ValueColumn> columns;
  if (full) {
    const FullSetup setup = full_setup(game, anchors);
    std::vector<std::vector<double>> phi(anchors.size(), std::vector<double>(n, 0.0));
    switch (options.mode) {
      case SelfValMode::kExactShared: build_full_exact(game, setup, phi, report); break;
      case SelfValMode::kNaive: build_full_naive(game, setup, phi, report); break;
      case SelfValMode::kMcShared: build_full_mc(game, setup, options.mc, phi, report); break;
    }
    const Provenance prov =
        options.mode == SelfValMode::kMcShared ? Provenance::kMonteCarlo : Provenance::kExactLocal;
    for (std::size_t j = 0; j < anchors.size(); ++j) {
      ValueColumn col{proxy_task(anchors[j]), {}, prov};
      for (std::size_t z = 0; z < n; ++z) {
        if (z != setup.anchor_pos[j]) col.entries.emplace(setup.universe[z], phi[j][z]);
      }
      out.basis.emplace(col.task, game.universe().without(anchors[j]));
      out.provenance.emplace(col.task, prov);
      columns.push_back(std::move(col));
    }
  } else {
    for (PlayerId a : anchors) {
      const TaskId t = proxy_task(a);
      const Coalition support = game.support(t).members;
      const DataPoint& task = game.task(t);
      const TaskGame cached(game, t);
      const FunctionGame uncached([&](const Coalition& s) {
        return game.evaluate(*game.train_uncached(s), task);
      });
      const LocalGame& local =
          options.mode == SelfValMode::kNaive ? static_cast<const LocalGame&>(uncached) : cached;
      EstimateReport r;
      if (options.mode != SelfValMode::kMcShared && support.size() <= options.k_max) {
        r = exact_local_shapley(local, support, t, options.k_max);
      } else {
        McConfig mc = options.mc;
        mc.seed = splitmix64(options.mc.seed ^ splitmix64(t.value()));
        r = permutation_mc(local, support, t, mc, false);
      }
      report.utility_evaluations += r.utility_evaluations;
      report.samples += r.samples_used;
      out.basis.emplace(t, support);
      out.provenance.emplace(t, r.column.provenance);
      columns.push_back(std::move(r.column));
    }
  }

  ShapleyMatrix& m = out.matrix;
  for (PlayerId z : game.universe().members()) {
    m.append_row(z);
    m.set_player_label(z, game.player(z).label);
  }
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    m.append_column(columns[j], true, anchors[j]);
    m.set_task_label(columns[j].task, game.task(columns[j].task).label);
  }
  report.trainings = game.trainings() - trainings_before;
  report.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

}  // namespace shapmat

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shapmat/core/error.hpp"
#include "shapmat/harness/dataset.hpp"
#include "shapmat/selfval/selfval.hpp"

namespace shapmat {
namespace {

std::vector<PlayerId> ids(std::initializer_list<std::uint64_t> v) {
  std::vector<PlayerId> out;
  for (auto x : v) out.emplace_back(x);
  return out;
}

// Points on a line; distance is the absolute difference of positions.
PlayerDistance line_distance(std::vector<double> pos) {
  return [pos](PlayerId a, PlayerId b) { return std::abs(pos[a.value()] - pos[b.value()]); };
}

Game small_game(std::size_t n, std::uint64_t seed, UtilityKind u = UtilityKind::kConfidence) {
  BlobSpec spec;
  spec.classes = 2;
  spec.per_class = (n + 1) / 2;
  spec.total = n;
  spec.separation = 1.0;
  spec.seed = seed;
  GameConfig gc;
  gc.family = WknnParams{3, 2.0};
  gc.utility = u;
  return Game(gc, make_blobs(spec));
}

TEST(CoveringRadius, WorstNearestAnchor) {
  auto d = line_distance({0, 1, 2, 10});
  auto players = ids({0, 1, 2, 3});
  auto r = covering_radius(players, ids({0, 3}), d);
  EXPECT_DOUBLE_EQ(r.r_max, 2.0);
  EXPECT_EQ(r.farthest, PlayerId(2));
  EXPECT_DOUBLE_EQ(r.nearest_anchor_distance.at(PlayerId(3)), 0.0);
  EXPECT_THROW(covering_radius(players, {}, d), Error);
}

TEST(Fps, GreedyOrderOnLine) {
  auto d = line_distance({0, 1, 2, 10, 11});
  auto players = ids({0, 1, 2, 3, 4});
  auto sel = select_anchors_fps(players, 3, d);
  EXPECT_EQ(sel.anchors, ids({0, 4, 2}));
  EXPECT_DOUBLE_EQ(sel.coverage.r_max, 1.0);
}

TEST(Fps, TiesBreakByLowestId) {
  auto d = line_distance({0, -1, 1});
  auto sel = select_anchors_fps(ids({0, 1, 2}), 2, d);
  EXPECT_EQ(sel.anchors[1], PlayerId(1));
}

TEST(Fps, SeededStartIsDeterministic) {
  auto d = line_distance({0, 1, 2, 3, 4, 5});
  auto players = ids({0, 1, 2, 3, 4, 5});
  auto a = select_anchors_fps(players, 2, d, 42);
  auto b = select_anchors_fps(players, 2, d, 42);
  EXPECT_EQ(a.anchors, b.anchors);
}

TEST(Fps, BudgetOutOfRange) {
  auto d = line_distance({0, 1});
  for (std::size_t k : {0u, 3u}) {
    try {
      select_anchors_fps(ids({0, 1}), k, d);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidBudget);
    }
  }
  EXPECT_THROW(select_anchors_fps(ids({0, 0}), 1, d), Error);
}

TEST(Fps, TwoApproximationOnRandomPlanes) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 10;
    std::vector<std::pair<double, double>> xy(n);
    for (auto& p : xy) p = {u(rng), u(rng)};
    std::vector<std::vector<double>> table(n, std::vector<double>(n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        table[i][j] = std::hypot(xy[i].first - xy[j].first, xy[i].second - xy[j].second);
    PlayerDistance d = [&](PlayerId a, PlayerId b) { return table[a.value()][b.value()]; };
    std::vector<PlayerId> players;
    for (int i = 0; i < n; ++i) players.emplace_back(i);
    for (int k = 1; k <= n; ++k) {
      auto sel = select_anchors_fps(players, k, d);
      EXPECT_LE(sel.coverage.r_max, 2.0 * oracle::brute_force_k_center(table, k) + 1e-12);
    }
  }
}

TEST(Pivot, FirstAnchorOutsideCoalition) {
  auto order = ids({5, 2, 9});
  EXPECT_EQ(pivot_of(Coalition{PlayerId(5)}, order), PlayerId(2));
  EXPECT_EQ(pivot_of(Coalition{}, order), PlayerId(5));
  EXPECT_FALSE(pivot_of(Coalition{PlayerId(2), PlayerId(5), PlayerId(9)}, order).has_value());
}

TEST(ProxyTasks, RegisteredOncePerPlayer) {
  auto g = small_game(6, 1);
  register_proxy_tasks(g);
  register_proxy_tasks(g);
  for (PlayerId z : g.universe().members()) EXPECT_EQ(g.proxy_of(proxy_task(z)), z);
  // The proxy's own player never enters its support.
  for (PlayerId z : g.universe().members()) {
    EXPECT_FALSE(g.support(proxy_task(z)).members.contains(z));
  }
}

TEST(ProxyTasks, ClashingTaskIdIsRejected) {
  auto g = small_game(4, 1);
  g.add_task(TaskId(2), g.player(PlayerId(2)));
  EXPECT_THROW(register_proxy_tasks(g), Error);
}

TEST(ModeNames, RoundTrip) {
  for (auto m : {SelfValMode::kExactShared, SelfValMode::kMcShared, SelfValMode::kNaive}) {
    EXPECT_EQ(selfval_mode_from_string(to_string(m)), m);
  }
  for (auto s : {SelfValScope::kFull, SelfValScope::kSupport}) {
    EXPECT_EQ(selfval_scope_from_string(to_string(s)), s);
  }
  EXPECT_THROW(selfval_mode_from_string("FAST"), Error);
}

// Leave-one-out Shapley values by the permutation oracle.
std::vector<double> oracle_column(const Game& g, PlayerId anchor) {
  std::vector<PlayerId> others;
  for (PlayerId z : g.universe().members())
    if (z != anchor) others.push_back(z);
  const int m = static_cast<int>(others.size());
  const DataPoint task = g.task(proxy_task(anchor));
  return oracle::permutation_shapley(m, [&](std::uint32_t mask) {
    std::vector<PlayerId> s;
    for (int i = 0; i < m; ++i)
      if (mask >> i & 1u) s.push_back(others[i]);
    return g.evaluate(*g.train_uncached(Coalition(s)), task);
  });
}

TEST(BuildSelfMatrix, FullExactMatchesOracle) {
  auto g = small_game(7, 3);
  auto anchors = ids({0, 3, 5});
  SelfValOptions opts;
  auto out = build_self_matrix(g, anchors, opts);
  ASSERT_EQ(out.matrix.anchor_order().size(), 3u);
  for (PlayerId a : anchors) {
    auto ref = oracle_column(g, a);
    std::size_t i = 0;
    for (PlayerId z : g.universe().members()) {
      if (z == a) {
        EXPECT_TRUE(out.matrix.is_absent(z, proxy_task(a)));
        continue;
      }
      EXPECT_NEAR(*out.matrix.get(z, proxy_task(a)), ref[i++], 1e-12);
    }
    EXPECT_EQ(out.provenance.at(proxy_task(a)), Provenance::kExactLocal);
    EXPECT_EQ(out.basis.at(proxy_task(a)), g.universe().without(a));
  }
}

TEST(BuildSelfMatrix, SharedAndNaiveAgreeAndSharedTrainsLess) {
  auto g1 = small_game(8, 4);
  auto g2 = small_game(8, 4);
  auto anchors = ids({0, 2, 4, 6});
  SelfValOptions shared;
  SelfValOptions naive;
  naive.mode = SelfValMode::kNaive;
  auto a = build_self_matrix(g1, anchors, shared);
  auto b = build_self_matrix(g2, anchors, naive);
  for (PlayerId z : a.matrix.players()) {
    for (TaskId t : a.matrix.tasks()) {
      auto x = a.matrix.get(z, t), y = b.matrix.get(z, t);
      ASSERT_EQ(x.has_value(), y.has_value());
      if (x) EXPECT_NEAR(*x, *y, 1e-12);
    }
  }
  // Shared: every coalition missing some anchor, 2^8 - 2^4. Naive: 4 * 2^7.
  EXPECT_EQ(a.report.trainings, 256u - 16u);
  EXPECT_EQ(b.report.trainings, 4u * 128u);
}

TEST(BuildSelfMatrix, FullMcApproachesExact) {
  auto g1 = small_game(8, 5);
  auto g2 = small_game(8, 5);
  auto anchors = ids({1, 6});
  SelfValOptions mc;
  mc.mode = SelfValMode::kMcShared;
  mc.mc.max_samples = 20000;
  mc.mc.check_interval = 20000;
  auto est = build_self_matrix(g1, anchors, mc);
  auto ref = build_self_matrix(g2, anchors, SelfValOptions{});
  std::vector<double> x, y;
  for (PlayerId z : est.matrix.players())
    for (TaskId t : est.matrix.tasks())
      if (auto v = est.matrix.get(z, t)) {
        x.push_back(*v);
        y.push_back(*ref.matrix.get(z, t));
      }
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 0.1);
  EXPECT_EQ(est.provenance.begin()->second, Provenance::kMonteCarlo);
}

TEST(BuildSelfMatrix, SupportScopeSolvesLocalGames) {
  auto g = small_game(20, 6);
  auto anchors = ids({0, 7, 13});
  SelfValOptions opts;
  opts.scope = SelfValScope::kSupport;
  auto out = build_self_matrix(g, anchors, opts);
  for (PlayerId a : anchors) {
    const TaskId t = proxy_task(a);
    auto exact = exact_local_shapley(g, g.support(t));
    for (PlayerId z : g.universe().members()) {
      if (z == a) continue;
      EXPECT_EQ(*out.matrix.get(z, t), exact.column.value_or_zero(z));
    }
    EXPECT_EQ(out.basis.at(t), g.support(t).members);
    EXPECT_EQ(out.matrix.task_label(t), g.player(a).label);
  }
}

TEST(BuildSelfMatrix, Errors) {
  auto g = small_game(20, 7);
  EXPECT_THROW(build_self_matrix(g, ids({0}), SelfValOptions{}), Error);  // n > 16
  auto h = small_game(6, 7);
  EXPECT_THROW(build_self_matrix(h, ids({0, 0}), SelfValOptions{}), Error);
  EXPECT_THROW(build_self_matrix(h, ids({99}), SelfValOptions{}), Error);
  try {
    build_self_matrix(g, ids({0}), SelfValOptions{});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooLarge);
  }
}

TEST(ProxyDistance, UsesProxyProfiles) {
  auto g = small_game(10, 8);
  register_proxy_tasks(g);
  DistanceConfig cfg;
  cfg.label_strict = false;
  auto d = proxy_distance(g, cfg);
  EXPECT_DOUBLE_EQ(d(PlayerId(1), PlayerId(1)), 0.0);
  const double ab = d(PlayerId(1), PlayerId(4));
  EXPECT_DOUBLE_EQ(ab, d(PlayerId(4), PlayerId(1)));
  EXPECT_GE(ab, 0.0);
  EXPECT_LE(ab, 1.0);
}

}  // namespace
}  // namespace shapmat

#include <bit>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "shapmat/core/error.hpp"
#include "shapmat/maintenance/stream_event.hpp"

namespace shapmat {
namespace {

DataPoint as_task(DataPoint p, std::uint64_t id) {
  p.id = id;
  return p;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

// Checks a column against a from-scratch exact solve of its current support.
void expect_exact_column(const Game& game, const ShapleyMatrix& m, TaskId a, double tol) {
  auto exact = exact_local_shapley(game, game.support(a));
  for (PlayerId z : m.players()) {
    auto v = m.get(z, a);
    if (!v) continue;
    EXPECT_NEAR(*v, exact.column.value_or_zero(z), tol) << "player " << z << " task " << a;
  }
}

TEST(EngineConfig, Validation) {
  EngineConfig c;
  EXPECT_NO_THROW(c.validate());
  c.k_interp = 0;
  EXPECT_THROW(c.validate(), Error);
  c = EngineConfig{};
  c.k_max = 26;
  EXPECT_THROW(c.validate(), Error);
  c = EngineConfig{};
  c.tau = -1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Engine, InterpolationWeightsAreNormalizedInverseDistances) {
  auto s = fixture::make_wknn(30, 5, 10, 1);
  const TaskId t(1000);
  auto report = s.engine->add_task(t, as_task(s.spare[0], 1000));
  ASSERT_FALSE(report.expanded);
  ASSERT_TRUE(report.interpolation);
  const auto& in = *report.interpolation;
  EXPECT_LE(in.anchors.size(), 6u);
  double total = 0.0;
  for (std::size_t i = 0; i < in.weights.size(); ++i) {
    total += in.weights[i];
    if (i > 0) EXPECT_LE(in.distances[i - 1], in.distances[i]);
    EXPECT_EQ(s.matrix->task_label(in.anchors[i]), s.spare[0].label);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  // Recompute every entry from the anchor columns, skipping ABSENT cells.
  for (PlayerId z : s.matrix->players()) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < in.anchors.size(); ++i) {
      auto v = s.matrix->get(z, in.anchors[i]);
      if (!v) continue;
      num += in.weights[i] * *v;
      den += in.weights[i];
    }
    EXPECT_NEAR(*s.matrix->get(z, t), den > 0 ? num / den : 0.0, 1e-15);
  }
  EXPECT_FALSE(s.matrix->is_anchor(t));
}

TEST(Engine, ZeroDistanceAnchorIsCopied) {
  auto s = fixture::make_wknn(30, 1, 10, 2, /*tau=*/0.0);
  // The first copy becomes an anchor; a second copy sits at distance zero.
  auto first = s.engine->add_task(TaskId(2000), as_task(s.spare[0], 2000));
  ASSERT_TRUE(first.expanded);
  s.game->add_task(TaskId(2001), as_task(s.spare[0], 2001));
  auto interp = s.engine->task_update(TaskId(2001));
  ASSERT_GE(interp.anchors.size(), 1u);
  EXPECT_EQ(interp.distances.front(), 0.0);
  for (std::size_t i = 0; i < interp.anchors.size(); ++i) {
    EXPECT_EQ(interp.distances[i], 0.0);
    EXPECT_DOUBLE_EQ(interp.weights[i], 1.0 / static_cast<double>(interp.anchors.size()));
  }
  for (PlayerId z : s.matrix->players()) {
    if (interp.anchors.size() == 1) {
      EXPECT_EQ(interp.column.value_or_zero(z), *s.matrix->get(z, TaskId(2000)));
    }
  }
}

TEST(Engine, KInterpLimitsNeighbours) {
  auto s = fixture::make_wknn(30, 3, 12, 3);
  EngineConfig cfg = s.engine->config();
  cfg.k_interp = 1;
  Engine one(*s.game, *s.matrix, cfg);
  s.game->add_task(TaskId(1000), as_task(s.spare[0], 1000));
  auto in = one.task_update(TaskId(1000));
  ASSERT_EQ(in.anchors.size(), 1u);
  EXPECT_DOUBLE_EQ(in.weights[0], 1.0);
}

TEST(Engine, FarTaskBecomesExactAnchor) {
  auto s = fixture::make_wknn(30, 3, 10, 4, /*tau=*/0.0);
  const TaskId t(1000);
  auto report = s.engine->add_task(t, as_task(s.spare[1], 1000));
  if (report.min_distance == 0.0) GTEST_SKIP() << "task coincides with an anchor";
  EXPECT_TRUE(report.expanded);
  EXPECT_EQ(report.provenance, Provenance::kExactLocal);
  EXPECT_EQ(s.matrix->anchor_order().back(), t);
  expect_exact_column(*s.game, *s.matrix, t, 0.0);
  EXPECT_EQ(s.engine->basis(t), s.game->support(t).members);
}

TEST(Engine, IncompatibleTaskEscalatesToAnchor) {
  auto s = fixture::make_wknn(30, 0, 4, 5);
  DataPoint odd = s.game->player(PlayerId(0));
  odd.id = 1000;
  odd.label = 7;  // no anchor carries this label
  s.game->add_task(TaskId(1000), odd);
  try {
    s.engine->task_update(TaskId(1000));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoCompatibleAnchor);
  }
  s.game->remove_task(TaskId(1000));
  auto report = s.engine->add_task(TaskId(1000), odd);
  EXPECT_TRUE(std::isinf(report.min_distance));
  EXPECT_TRUE(report.expanded);
  EXPECT_TRUE(s.matrix->is_anchor(TaskId(1000)));
}

TEST(Engine, FailedAddLeavesNoTrace) {
  auto s = fixture::make_wknn(30, 0, 4, 5);
  DataPoint bad = s.game->player(PlayerId(0));
  bad.id = 1000;
  bad.features.push_back(0.0);  // wrong dimension
  EXPECT_THROW(s.engine->add_task(TaskId(1000), bad), Error);
  EXPECT_FALSE(s.game->has_task(TaskId(1000)));
  EXPECT_FALSE(s.matrix->has_task(TaskId(1000)));
  EXPECT_THROW(s.engine->add_task(TaskId(0), s.game->player(PlayerId(0))), Error);
}

TEST(Engine, DeleteTaskRemovesColumnAndAnchor) {
  auto s = fixture::make_wknn(30, 0, 6, 6);
  const TaskId a = s.matrix->anchor_order()[2];
  s.engine->delete_task(a);
  EXPECT_FALSE(s.matrix->has_task(a));
  EXPECT_FALSE(s.game->has_task(a));
  EXPECT_EQ(s.matrix->anchor_order().size(), 5u);
  EXPECT_THROW(s.engine->basis(a), Error);
}

TEST(Engine, AddPlayerFreezesUnaffectedColumns) {
  auto s = fixture::make_wknn(36, 6, 18, 7);
  for (const DataPoint& p : s.spare) {
    const ShapleyMatrix before = *s.matrix;
    auto report = s.engine->add_player(p);
    std::set<TaskId> affected(report.affected_tasks.begin(), report.affected_tasks.end());
    for (TaskId t : before.tasks()) {
      if (affected.contains(t)) continue;
      for (PlayerId z : before.players()) {
        auto a = before.get(z, t), b = s.matrix->get(z, t);
        ASSERT_EQ(a.has_value(), b.has_value());
        if (a) EXPECT_TRUE(same_bits(*a, *b));
      }
      EXPECT_EQ(s.matrix->get(PlayerId(p.id), t), 0.0);
    }
    EXPECT_LE(static_cast<double>(report.evaluations), report.bound);
    for (TaskId a : report.affected_tasks) expect_exact_column(*s.game, *s.matrix, a, 1e-12);
  }
}

TEST(Engine, MonotoneCorrectionMatchesDirectRecomputation) {
  auto s = fixture::make_rbf(24, 12, 12, 8);
  std::size_t corrected = 0;
  for (const DataPoint& p : s.spare) {
    auto report = s.engine->add_player(p);
    corrected += report.corrections.size();
    for (const auto& [key, delta] : report.corrections) {
      (void)delta;
      const TaskId a = key.second;
      expect_exact_column(*s.game, *s.matrix, a, 1e-12);
    }
  }
  EXPECT_GT(corrected, 0u);
}

TEST(Engine, DeletePlayerResolvesAffectedAnchors) {
  auto s = fixture::make_wknn(30, 0, 10, 9);
  const PlayerId gone(s.game->universe().members()[4]);
  auto report = s.engine->delete_player(gone);
  EXPECT_FALSE(s.matrix->has_player(gone));
  EXPECT_FALSE(s.game->has_player(gone));
  EXPECT_TRUE(report.corrections.empty());
  for (TaskId a : report.affected_tasks) expect_exact_column(*s.game, *s.matrix, a, 1e-12);
  EXPECT_THROW(s.engine->delete_player(gone), Error);
}

TEST(Engine, ReplacePlayerSumsBounds) {
  auto s = fixture::make_wknn(30, 1, 10, 10);
  const PlayerId old(s.game->universe().members()[7]);
  auto report = s.engine->replace_player(old, s.spare[0]);
  EXPECT_FALSE(s.matrix->has_player(old));
  EXPECT_TRUE(s.matrix->has_player(PlayerId(s.spare[0].id)));
  EXPECT_LE(static_cast<double>(report.evaluations), report.bound);
  for (TaskId a : report.affected_tasks) expect_exact_column(*s.game, *s.matrix, a, 1e-12);
}

TEST(Engine, AddPlayerRejectsDuplicates) {
  auto s = fixture::make_wknn(30, 0, 5, 11);
  EXPECT_THROW(s.engine->add_player(s.game->player(PlayerId(3))), Error);
}

TEST(Engine, JointUpdateAppliesPlayersFirst) {
  auto s = fixture::make_wknn(30, 6, 10, 12);
  std::vector<DataPoint> players(s.spare.begin(), s.spare.begin() + 3);
  std::vector<std::pair<TaskId, DataPoint>> tasks;
  tasks.emplace_back(TaskId(1000), as_task(s.spare[3], 1000));
  tasks.emplace_back(TaskId(1001), as_task(s.spare[4], 1001));
  auto report = s.engine->joint_update(players, tasks);
  ASSERT_EQ(report.tasks.size(), 2u);
  for (const auto& p : players) EXPECT_TRUE(s.matrix->has_player(PlayerId(p.id)));
  for (const auto& tr : report.tasks) {
    EXPECT_TRUE(s.matrix->has_task(tr.task));
    if (tr.expanded) expect_exact_column(*s.game, *s.matrix, tr.task, 0.0);
  }
  EXPECT_THROW(s.engine->joint_update({}, {{TaskId(1000), s.spare[5]}}), Error);
}

TEST(Engine, JointUpdateKappaForcesExactness) {
  auto s = fixture::make_wknn(30, 8, 10, 13);
  EngineConfig cfg = s.engine->config();
  cfg.kappa = 0;
  cfg.tau = 100.0;
  Engine strict(*s.game, *s.matrix, cfg);
  for (TaskId a : s.matrix->anchor_order()) {
    strict.set_basis(a, *s.engine->basis(a), Provenance::kExactLocal);
  }
  // Arrivals right next to the task move its support.
  DataPoint target = as_task(s.spare[0], 1000);
  std::vector<DataPoint> arrivals;
  for (std::uint64_t i = 0; i < 3; ++i) {
    DataPoint p = target;
    p.id = 500 + i;
    p.features[0] += 1e-3 * static_cast<double>(i + 1);
    arrivals.push_back(p);
  }
  auto report = strict.joint_update(arrivals, {{TaskId(1000), target}});
  ASSERT_EQ(report.tasks.size(), 1u);
  EXPECT_TRUE(report.tasks[0].expanded);
  EXPECT_TRUE(s.matrix->is_anchor(TaskId(1000)));
}

TEST(Engine, SolveLocalFallsBackToSamplingAboveKMax) {
  auto s = fixture::make_wknn(30, 0, 5, 14);
  EngineConfig cfg = s.engine->config();
  cfg.k_max = 3;
  Engine small(*s.game, *s.matrix, cfg);
  const TaskId a = s.matrix->anchor_order()[0];
  auto r = small.solve_local(a);
  EXPECT_EQ(r.column.provenance, Provenance::kMonteCarlo);
  auto again = small.solve_local(a);
  EXPECT_EQ(r.column.entries, again.column.entries);
}

TEST(Engine, UnknownAnchorBasis) {
  auto s = fixture::make_wknn(30, 0, 5, 15);
  EXPECT_THROW(s.engine->set_basis(TaskId(999), Coalition{}, Provenance::kExactLocal), Error);
}

TEST(StreamEvent, KindNamesRoundTrip) {
  for (auto k : {EventKind::kTaskAdd, EventKind::kTaskDelete, EventKind::kTaskReplace,
                 EventKind::kPlayerAdd, EventKind::kPlayerDelete, EventKind::kPlayerReplace,
                 EventKind::kJoint}) {
    EXPECT_EQ(event_kind_from_string(to_string(k)), k);
  }
  EXPECT_STREQ(to_string(EventKind::kPlayerReplace), "PLAYER_REPLACE");
  EXPECT_THROW(event_kind_from_string("TASK_MOVE"), Error);
}

TEST(StreamEvent, ValidationChecksPayload) {
  StreamEvent e;
  e.kind = EventKind::kTaskAdd;
  EXPECT_THROW(e.validate(), Error);
  e.kind = EventKind::kPlayerDelete;
  EXPECT_THROW(e.validate(), Error);
  e.target_player = PlayerId(3);
  EXPECT_NO_THROW(e.validate());
  e.kind = EventKind::kPlayerReplace;
  EXPECT_THROW(e.validate(), Error);
}

TEST(StreamEvent, ApplyDispatchesAllKinds) {
  auto s = fixture::make_wknn(30, 6, 10, 16);
  StreamEvent add_task{EventKind::kTaskAdd, {}, {{TaskId(1000), as_task(s.spare[0], 1000)}}, {}, {}};
  auto out = apply_event(*s.engine, add_task);
  EXPECT_EQ(out.kind, EventKind::kTaskAdd);
  EXPECT_TRUE(s.matrix->has_task(TaskId(1000)));

  StreamEvent replace_task{EventKind::kTaskReplace, {}, {{TaskId(1001), as_task(s.spare[1], 1001)}}, {}, TaskId(1000)};
  apply_event(*s.engine, replace_task);
  EXPECT_FALSE(s.matrix->has_task(TaskId(1000)));
  EXPECT_TRUE(s.matrix->has_task(TaskId(1001)));

  StreamEvent del_task{EventKind::kTaskDelete, {}, {}, {}, TaskId(1001)};
  apply_event(*s.engine, del_task);
  EXPECT_FALSE(s.matrix->has_task(TaskId(1001)));

  StreamEvent add_player{EventKind::kPlayerAdd, {s.spare[2]}, {}, {}, {}};
  auto po = apply_event(*s.engine, add_player);
  EXPECT_LE(static_cast<double>(po.evaluations), po.bound);
  StreamEvent replace{EventKind::kPlayerReplace, {s.spare[3]}, {}, PlayerId(s.spare[2].id), {}};
  apply_event(*s.engine, replace);
  EXPECT_FALSE(s.matrix->has_player(PlayerId(s.spare[2].id)));
  StreamEvent del{EventKind::kPlayerDelete, {}, {}, PlayerId(s.spare[3].id), {}};
  apply_event(*s.engine, del);
  EXPECT_FALSE(s.matrix->has_player(PlayerId(s.spare[3].id)));

  StreamEvent joint{EventKind::kJoint, {s.spare[4]}, {{TaskId(1002), as_task(s.spare[5], 1002)}}, {}, {}};
  auto jo = apply_event(*s.engine, joint);
  EXPECT_TRUE(s.matrix->has_task(TaskId(1002)));
  EXPECT_EQ(jo.kind, EventKind::kJoint);
}

}  // namespace
}  // namespace shapmat

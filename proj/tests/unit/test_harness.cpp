#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shapmat/core/error.hpp"
#include "shapmat/core/matrix_io.hpp"
#include "shapmat/harness/config.hpp"
#include "shapmat/harness/dataset.hpp"
#include "shapmat/harness/experiment.hpp"
#include "shapmat/harness/metrics.hpp"

namespace shapmat {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("shapmat_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(StreamMode mode, std::size_t count = 6) {
  ExperimentConfig c;
  BlobSpec b;
  b.classes = 3;
  b.per_class = 10;
  b.separation = 1.0;
  c.dataset.synthetic = b;
  c.game.family = WknnParams{3, 2.0};
  c.stream.mode = mode;
  c.stream.count = count;
  c.seed = 4;
  c.mc.seed = 4;
  return c;
}

TEST(Points, RoundTripWithEmbeddings) {
  std::vector<DataPoint> pts{{3, {0.5, -1.25}, 1, {0.1, 0.2, 0.3}}, {9, {1e-17, 2.0}, 0, {0, 0, 1}}};
  std::stringstream ss;
  write_points(ss, pts);
  auto back = read_points(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].id, 3u);
  EXPECT_EQ(back[0].features, pts[0].features);
  EXPECT_EQ(back[1].embedding, pts[1].embedding);
  EXPECT_EQ(back[1].label, 0);
}

TEST(Points, ParseErrorsNameTheLine) {
  std::istringstream bad("id,label,f1\n1,0,0.5\n2,x,0.1\n");
  try {
    read_points(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream short_row("id,label,f1,f2\n1,0,0.5\n");
  EXPECT_THROW(read_points(short_row), ParseError);
  std::istringstream no_header("");
  EXPECT_THROW(read_points(no_header), ParseError);
  std::istringstream dup("id,label,f1\n1,0,0.5\n1,0,0.1\n");
  EXPECT_THROW(read_points(dup), ParseError);
}

TEST(Edges, RoundTrip) {
  Graph g;
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  std::stringstream ss;
  write_edges(ss, g);
  auto back = read_edges(ss);
  EXPECT_EQ(back.degree(2), 2u);
  EXPECT_EQ(back.degree(1), 1u);
  std::istringstream bad("src,dst\n1\n");
  EXPECT_THROW(read_edges(bad), ParseError);
}

TEST(Blobs, DeterministicInterleavedAndTruncated) {
  BlobSpec spec;
  spec.classes = 3;
  spec.per_class = 4;
  spec.embed_dims = 3;
  spec.seed = 9;
  auto a = make_blobs(spec);
  auto b = make_blobs(spec);
  ASSERT_EQ(a.size(), 12u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, i);
    EXPECT_EQ(a[i].label, static_cast<int>(i % 3));
    EXPECT_EQ(a[i].features, b[i].features);
    EXPECT_EQ(a[i].embedding.size(), 3u);
  }
  spec.total = 7;
  EXPECT_EQ(make_blobs(spec).size(), 7u);
  spec.total = 13;
  EXPECT_THROW(make_blobs(spec), Error);
  spec.total.reset();
  spec.classes = 0;
  EXPECT_THROW(make_blobs(spec), Error);
}

TEST(RingGraph, DegreesWithChords) {
  std::vector<std::uint64_t> ids{0, 1, 2, 3, 4, 5};
  auto ring = ring_graph(ids);
  for (auto id : ids) EXPECT_EQ(ring.degree(id), 2u);
  auto chorded = ring_graph(ids, 3);
  for (auto id : ids) EXPECT_EQ(chorded.degree(id), 3u);
}

TEST(Metrics, PearsonAndSpearmanByHand) {
  std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 9};
  EXPECT_NEAR(spearman(x, y), 1.0, 1e-15);
  const double mx = 2.5, my = 5.25;
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  EXPECT_NEAR(pearson(x, y), sxy / std::sqrt(sxx * syy), 1e-15);
  EXPECT_EQ(pearson(x, std::vector<double>{1, 1, 1, 1}), 0.0);
  EXPECT_EQ(average_ranks(std::vector<double>{5, 1, 5, 3}), (std::vector<double>{3.5, 1, 3.5, 2}));
  std::vector<double> a{3, 1, 4, 1, 5, 9, 2, 6}, b{2, 7, 1, 8, 2, 8, 1, 8};
  EXPECT_NEAR(spearman(a, b), oracle::spearman(a, b), 1e-14);
}

TEST(Metrics, CompareMatricesFiltersAndSkipsAbsent) {
  ShapleyMatrix ref, est;
  for (std::uint64_t z : {1, 2, 3, 4}) {
    ref.append_row(PlayerId(z));
    est.append_row(PlayerId(z));
  }
  ValueColumn rc{TaskId(1), {{PlayerId(2), 0.5}, {PlayerId(3), 1e-4}, {PlayerId(4), -0.2}}};
  ValueColumn ec{TaskId(1), {{PlayerId(2), 0.4}, {PlayerId(3), 9.0}, {PlayerId(4), -0.1}}};
  ref.append_column(rc, true, PlayerId(1));
  est.append_column(ec, true, PlayerId(1));
  auto m = compare_matrices(est, ref);
  EXPECT_EQ(m.omega, 2u);  // player 3 filtered, player 1 ABSENT
  EXPECT_NEAR(m.spearman, 1.0, 1e-15);
  try {
    compare_matrices(est, ref, std::nullopt, 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientSupport);
  }
  ShapleyMatrix missing;
  missing.append_row(PlayerId(2));
  missing.append_column(ValueColumn{TaskId(1)}, false);
  EXPECT_THROW(compare_matrices(missing, ref), Error);
}

TEST(Config, JsonRoundTrip) {
  auto c = small_config(StreamMode::kMixed);
  c.game.family = RidgeParams{};
  c.distance.kind = ProfileKind::kEmbedding;
  c.distance.embedding_metric = EmbeddingMetric::kEuclidean;
  c.anchor_count = 5;
  c.fps_seed = 12;
  c.reference = ReferenceMode::kGlobalMc;
  auto text = config_to_json(c);
  auto back = config_from_json(text);
  EXPECT_EQ(config_to_json(back), text);
  EXPECT_EQ(back.anchor_count, 5u);
  EXPECT_EQ(back.distance.embedding_metric, EmbeddingMetric::kEuclidean);
  EXPECT_EQ(back.stream.mode, StreamMode::kMixed);
}

TEST(Config, DefaultsFollowFamily) {
  auto c = config_from_json(R"({"dataset": {"synthetic": {}}, "seed": 3,
                                 "model": {"family": "tree", "max_depth": 2}})");
  EXPECT_EQ(c.distance.kind, ProfileKind::kDecisionPath);
  EXPECT_EQ(c.mc.seed, 3u);
  EXPECT_EQ(c.dataset.synthetic->seed, 3u);
  EXPECT_EQ(std::get<TreeParams>(c.game.family).max_depth, 2u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, InvalidInputs) {
  EXPECT_THROW(config_from_json("{not json"), Error);
  EXPECT_THROW(config_from_json(R"({"model": {"family": "svm"}})"), Error);
  auto c = config_from_json(R"({"dataset": {"path": "/nonexistent.csv"}})");
  EXPECT_THROW(c.validate(), Error);
  auto both = small_config(StreamMode::kTask);
  both.dataset.path = "x.csv";
  EXPECT_THROW(both.validate(), Error);
  auto ratio = small_config(StreamMode::kTask);
  ratio.anchor_ratio = 0.0;
  EXPECT_THROW(ratio.validate(), Error);
}

TEST(Experiment, TaskStreamRunsAndScores) {
  auto r = run_stream(small_config(StreamMode::kTask));
  EXPECT_EQ(r.events.size(), 6u);
  EXPECT_EQ(r.compared.size(), 6u);
  ASSERT_TRUE(r.metrics);
  EXPECT_GT(r.metrics->omega, 1u);
  EXPECT_EQ(r.matrix.num_players(), 24u);
  EXPECT_EQ(r.totals.at("TASK_ADD").events, 6u);
}

TEST(Experiment, PlayerStreamComparesAnchors) {
  auto r = run_stream(small_config(StreamMode::kPlayer));
  EXPECT_EQ(r.matrix.num_players(), 30u);
  EXPECT_EQ(r.compared.size(), r.matrix.anchor_order().size());
  ASSERT_TRUE(r.metrics);
  // Affected anchors are re-solved exactly over the final supports.
  EXPECT_NEAR(r.metrics->spearman, 1.0, 1e-12);
}

TEST(Experiment, MixedStreamAlternates) {
  auto run = prepare_run(small_config(StreamMode::kMixed));
  auto events = make_stream(run);
  ASSERT_EQ(events.size(), 6u);
  EXPECT_EQ(events[0].kind, EventKind::kPlayerAdd);
  EXPECT_EQ(events[1].kind, EventKind::kTaskAdd);
}

TEST(Experiment, SameSeedSameMatrixAndReplayMatches) {
  auto cfg = small_config(StreamMode::kMixed);
  auto a = run_stream(cfg);
  auto b = run_stream(cfg);
  EXPECT_TRUE(a.matrix == b.matrix);
  auto dir = scratch("replay");
  write_artifacts(a, dir.string());
  auto replayed = replay_stream((dir / "events.jsonl").string());
  EXPECT_TRUE(replayed.matrix == a.matrix);
  auto dir2 = scratch("replay2");
  write_artifacts(replayed, dir2.string());
  EXPECT_EQ(slurp(dir / "matrix.csv"), slurp(dir2 / "matrix.csv"));
  EXPECT_TRUE(load_matrix(dir / "matrix.csv") == a.matrix);
  EXPECT_TRUE(fs::exists(dir / "matrix.meta.json"));
  EXPECT_TRUE(fs::exists(dir / "report.json"));
}

TEST(Experiment, ReplayRejectsCorruptLog) {
  auto dir = scratch("corrupt");
  std::ofstream(dir / "events.jsonl") << "{\"config\": 5}\n";
  EXPECT_THROW(replay_stream((dir / "events.jsonl").string()), std::exception);
}

TEST(Experiment, SweepOverTau) {
  auto rows = sweep(small_config(StreamMode::kTask), SweepKnob::kTau, {0.0, 1.0});
  ASSERT_EQ(rows.size(), 2u);
  // tau = 0 expands every streamed task into an exact anchor.
  EXPECT_GT(rows[0].anchors, rows[1].anchors);
  EXPECT_NEAR(rows[0].spearman, 1.0, 1e-12);
  std::stringstream ss;
  write_sweep_table(ss, SweepKnob::kTau, rows);
  EXPECT_NE(ss.str().find("tau"), std::string::npos);
  EXPECT_THROW(sweep_knob_from_string("depth"), Error);
}

TEST(Experiment, ApplyKnobs) {
  auto c = small_config(StreamMode::kTask);
  EXPECT_EQ(apply_knob(c, SweepKnob::kInterpK, 2).k_interp, 2u);
  EXPECT_DOUBLE_EQ(apply_knob(c, SweepKnob::kAnchorRatio, 0.25).anchor_ratio, 0.25);
  auto wide = std::get<WknnParams>(apply_knob(c, SweepKnob::kSupportSize, 9).game.family);
  EXPECT_EQ(wide.k, 3u);
  EXPECT_DOUBLE_EQ(wide.support_multiplier, 3.0);
  auto narrow = std::get<WknnParams>(apply_knob(c, SweepKnob::kSupportSize, 2).game.family);
  EXPECT_EQ(narrow.k, 2u);
  EXPECT_THROW(apply_knob(c, SweepKnob::kSupportSize, 2.5), Error);
}

TEST(Experiment, BaselinesCoverHeldOutTasks) {
  auto cfg = small_config(StreamMode::kTask, 2);
  cfg.mc.max_samples = 200;
  for (auto m : {BaselineMethod::kGlobalMc, BaselineMethod::kTmc, BaselineMethod::kComplementary}) {
    auto r = run_baseline(cfg, m);
    EXPECT_EQ(r.matrix.num_tasks(), 2u);
    EXPECT_EQ(r.matrix.num_players(), 28u);
    EXPECT_GT(r.utility_evaluations, 0u);
  }
  EXPECT_THROW(baseline_method_from_string("shap"), Error);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SHAPMAT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

TEST(Cli, ExitCodes) {
  auto dir = scratch("cli");
  EXPECT_EQ(run_cli("synth --seed 1 --per-class 10 --out " + (dir / "pts.csv").string()), 0);
  std::ofstream(dir / "cfg.json") << config_to_json(small_config(StreamMode::kTask));
  std::ofstream(dir / "bad.json") << "{\"anchors\": {\"tau\": -1}}";
  const auto cfg = (dir / "cfg.json").string();
  EXPECT_EQ(run_cli("stream --config " + cfg + " --out " + (dir / "o").string()), 2);
  EXPECT_EQ(run_cli("stream --config " + (dir / "bad.json").string() + " --seed 1 --out " +
                    (dir / "o").string()),
            2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("stream --config " + cfg + " --seed 1 --out " + (dir / "o").string()), 0);
  EXPECT_EQ(run_cli("stream --replay " + (dir / "o" / "events.jsonl").string() + " --out " +
                    (dir / "r").string()),
            0);
  EXPECT_EQ(slurp(dir / "o" / "matrix.csv"), slurp(dir / "r" / "matrix.csv"));
  EXPECT_EQ(run_cli("eval --estimate " + (dir / "o" / "matrix.csv").string() + " --reference " +
                    (dir / "o" / "reference.csv").string()),
            0);
  std::ofstream(dir / "junk.csv") << "junk\n";
  EXPECT_EQ(run_cli("eval --estimate " + (dir / "junk.csv").string() + " --reference " +
                    (dir / "o" / "reference.csv").string()),
            2);
}

}  // namespace
}  // namespace shapmat

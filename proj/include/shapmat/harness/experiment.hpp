#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shapmat/core/shapley_matrix.hpp"
#include "shapmat/harness/config.hpp"
#include "shapmat/harness/metrics.hpp"
#include "shapmat/maintenance/engine.hpp"
#include "shapmat/maintenance/stream_event.hpp"
#include "shapmat/selfval/selfval.hpp"

namespace shapmat {

// Everything built before the first stream event.
struct PreparedRun {
  ExperimentConfig config;
  std::unique_ptr<Game> game;
  std::unique_ptr<ShapleyMatrix> matrix;
  std::unique_ptr<Engine> engine;
  std::vector<DataPoint> held_out;  // streamed records, in stream order
  AnchorSelection anchors;
  BuildReport build;
};

// Loads or synthesizes the dataset, shuffles it with the run seed, splits off
// the held-out pool, selects anchors among the initial players, and builds
// the self-valuation matrix.
PreparedRun prepare_run(const ExperimentConfig& config);

// Held-out records turned into events according to the stream mode.
std::vector<StreamEvent> make_stream(const PreparedRun& run);

struct KindTotals {
  std::size_t events = 0;
  std::uint64_t evaluations = 0;
  std::uint64_t trainings = 0;
  double seconds = 0.0;
};

struct StreamResult {
  ExperimentConfig config;
  ShapleyMatrix matrix;
  BuildReport build;
  CoverageReport coverage;
  std::vector<StreamEvent> events;
  std::vector<EventOutcome> outcomes;
  std::map<std::string, KindTotals> totals;  // by event kind name
  std::vector<TaskId> compared;
  std::optional<ShapleyMatrix> reference;
  std::optional<MetricsReport> metrics;
  std::string metrics_error;  // set when metrics could not be computed
  std::size_t anchors_final = 0;
};

StreamResult run_stream(const ExperimentConfig& config);
// Rebuilds from the log's header config and reapplies its events verbatim.
StreamResult replay_stream(const std::string& events_path);

// Columns a run is judged on: streamed tasks (task mode), anchors (player
// mode), or every column (mixed).
std::vector<TaskId> compared_tasks(const ExperimentConfig& config, const ShapleyMatrix& m,
                                   const std::vector<StreamEvent>& events);

// Per-column reference over the game's current universe.
ShapleyMatrix reference_matrix(const Game& game, const std::vector<TaskId>& tasks,
                               ReferenceMode mode, const McConfig& mc, std::size_t k_max);

// Writes matrix.csv, matrix.meta.json, events.jsonl and report.json.
void write_artifacts(const StreamResult& result, const std::string& dir);
void write_event_log(std::ostream& out, const ExperimentConfig& config,
                     const std::vector<StreamEvent>& events,
                     const std::vector<EventOutcome>& outcomes);
void write_meta(std::ostream& out, const ExperimentConfig& config);
std::string report_json(const StreamResult& result);

enum class SweepKnob { kSupportSize, kAnchorRatio, kInterpK, kTau };
SweepKnob sweep_knob_from_string(const std::string& name);
const char* to_string(SweepKnob knob) noexcept;

struct SweepRow {
  double value = 0.0;
  double spearman = 0.0;
  double pearson = 0.0;
  std::size_t omega = 0;
  std::size_t anchors = 0;
  double r_max = 0.0;
  std::uint64_t build_trainings = 0;
  std::uint64_t build_evaluations = 0;
  std::uint64_t stream_evaluations = 0;
  std::uint64_t stream_trainings = 0;
  double build_seconds = 0.0;
  double stream_seconds = 0.0;
};

ExperimentConfig apply_knob(ExperimentConfig config, SweepKnob knob, double value);
std::vector<SweepRow> sweep(const ExperimentConfig& config, SweepKnob knob,
                            const std::vector<double>& grid);
void write_sweep_table(std::ostream& out, SweepKnob knob, const std::vector<SweepRow>& rows);

enum class BaselineMethod { kGlobalMc, kTmc, kComplementary };
BaselineMethod baseline_method_from_string(const std::string& name);

struct BaselineResult {
  ShapleyMatrix matrix;
  std::uint64_t utility_evaluations = 0;
  std::uint64_t trainings = 0;
  std::uint64_t samples = 0;
  double wall_clock_seconds = 0.0;
};

// Recomputes every held-out task column over the full initial universe with
// a sampling estimator, as the non-local comparison point.
BaselineResult run_baseline(const ExperimentConfig& config, BaselineMethod method);

}  // namespace shapmat

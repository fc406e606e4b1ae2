// shapmat: build, maintain and evaluate player-by-task Shapley matrices.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shapmat/core/error.hpp"
#include "shapmat/core/matrix_io.hpp"
#include "shapmat/harness/config.hpp"
#include "shapmat/harness/dataset.hpp"
#include "shapmat/harness/experiment.hpp"
#include "shapmat/harness/metrics.hpp"

namespace {

using nlohmann::json;
using namespace shapmat;

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

struct ConfigFailure {
  std::string message;
};

// The command-line seed becomes the run seed; nested seeds the file sets
// explicitly are kept.
ExperimentConfig load_with_seed(const std::string& path, std::uint64_t seed) {
  try {
    std::ifstream in(path);
    if (!in) throw ConfigFailure{"cannot open config '" + path + "'"};
    json j = json::parse(in);
    j["seed"] = seed;
    ExperimentConfig config = config_from_json(j.dump());
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw ConfigFailure{std::string("config: ") + e.what()};
  } catch (const Error& e) {
    throw ConfigFailure{e.what()};
  }
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigFailure{"bad grid value '" + cell + "'"};
    }
  }
  if (out.empty()) throw ConfigFailure{"empty grid"};
  return out;
}

void print_summary(const StreamResult& r) {
  std::cout << "anchors=" << r.anchors_final << " events=" << r.events.size();
  if (r.metrics) {
    std::cout << " spearman=" << format_double(r.metrics->spearman)
              << " pearson=" << format_double(r.metrics->pearson)
              << " omega=" << r.metrics->omega;
  } else if (!r.metrics_error.empty()) {
    std::cout << " metrics_error=\"" << r.metrics_error << '"';
  }
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shapley matrix maintenance under streaming updates"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_path;

  auto* synth = app.add_subcommand("synth", "write a synthetic Gaussian-blob dataset");
  BlobSpec blobs;
  std::string edges_path;
  std::size_t ring_chord = 0;
  synth->add_option("--seed", seed, "random seed")->required();
  synth->add_option("--classes", blobs.classes, "number of classes");
  synth->add_option("--per-class", blobs.per_class, "records per class");
  synth->add_option("--dims", blobs.dims, "feature dimension");
  synth->add_option("--separation", blobs.separation, "class center radius");
  synth->add_option("--spread", blobs.spread, "per-coordinate standard deviation");
  synth->add_option("--embed-dims", blobs.embed_dims, "embedding dimension (0 for none)");
  synth->add_option("--total", blobs.total, "stop after this many records");
  synth->add_option("--out", out_path, "output CSV")->required();
  synth->add_option("--edges", edges_path, "also write a ring graph edge list here");
  synth->add_option("--ring-chord", ring_chord, "extra ring edges to the node this far ahead");

  auto* build = app.add_subcommand("build", "self-valuation matrix over the initial pool");
  build->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  build->add_option("--seed", seed, "random seed")->required();
  build->add_option("--out", out_path, "output directory")->required();

  auto* stream = app.add_subcommand("stream", "build, then apply the held-out stream");
  std::string replay_path;
  auto* stream_config = stream->add_option("--config", config_path, "experiment config (JSON)")
                            ->check(CLI::ExistingFile);
  auto* stream_seed = stream->add_option("--seed", seed, "random seed");
  auto* replay = stream->add_option("--replay", replay_path, "replay a saved events.jsonl")
                     ->check(CLI::ExistingFile);
  stream->add_option("--out", out_path, "output directory")->required();
  stream_config->excludes(replay);
  stream_seed->excludes(replay);

  auto* baseline = app.add_subcommand("baseline", "sampling recompute of held-out tasks");
  std::string method = "global_mc";
  baseline->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  baseline->add_option("--seed", seed, "random seed")->required();
  baseline->add_option("--method", method, "global_mc, tmc or complementary")
      ->check(CLI::IsMember({"global_mc", "tmc", "complementary"}));
  baseline->add_option("--out", out_path, "output matrix CSV")->required();

  auto* eval = app.add_subcommand("eval", "correlations between two matrix files");
  std::string estimate_path;
  std::string reference_path;
  double threshold = kOmegaThreshold;
  eval->add_option("--estimate", estimate_path, "estimated matrix")->required()->check(CLI::ExistingFile);
  eval->add_option("--reference", reference_path, "reference matrix")->required()->check(CLI::ExistingFile);
  eval->add_option("--threshold", threshold, "reference magnitude filter");

  auto* sweep_cmd = app.add_subcommand("sweep", "one stream run per grid value");
  std::string knob;
  std::string grid;
  sweep_cmd->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--seed", seed, "random seed")->required();
  sweep_cmd->add_option("--knob", knob, "support_size, anchor_ratio, interp_K or tau")
      ->required()
      ->check(CLI::IsMember({"support_size", "anchor_ratio", "interp_K", "tau"}));
  sweep_cmd->add_option("--grid", grid, "comma-separated values")->required();
  sweep_cmd->add_option("--out", out_path, "output table (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*synth) {
      blobs.seed = seed;
      std::vector<DataPoint> points;
      try {
        points = make_blobs(blobs);
      } catch (const Error& e) {
        throw ConfigFailure{e.what()};
      }
      save_points(out_path, points);
      if (!edges_path.empty()) {
        std::vector<std::uint64_t> ids;
        for (const DataPoint& p : points) ids.push_back(p.id);
        save_edges(edges_path, ring_graph(ids, ring_chord));
      }
      std::cout << "wrote " << points.size() << " records to " << out_path << '\n';
    } else if (*build) {
      const ExperimentConfig config = load_with_seed(config_path, seed);
      const PreparedRun run = prepare_run(config);
      std::filesystem::create_directories(out_path);
      const std::filesystem::path dir(out_path);
      save_matrix((dir / "matrix.csv").string(), *run.matrix);
      {
        std::ofstream meta(dir / "matrix.meta.json");
        write_meta(meta, config);
      }
      StreamResult summary;
      summary.config = config;
      summary.build = run.build;
      summary.coverage = run.anchors.coverage;
      summary.anchors_final = run.matrix->anchor_order().size();
      std::ofstream(dir / "report.json") << report_json(summary) << '\n';
      std::cout << "n=" << run.build.n << " k=" << run.build.k
                << " trainings=" << run.build.trainings
                << " r_max=" << format_double(run.anchors.coverage.r_max) << '\n';
    } else if (*stream) {
      StreamResult result;
      if (!replay_path.empty()) {
        result = replay_stream(replay_path);
      } else {
        if (config_path.empty() || stream_seed->count() == 0) {
          throw ConfigFailure{"stream needs --config and --seed, or --replay"};
        }
        result = run_stream(load_with_seed(config_path, seed));
      }
      write_artifacts(result, out_path);
      print_summary(result);
    } else if (*baseline) {
      const ExperimentConfig config = load_with_seed(config_path, seed);
      const BaselineResult r = run_baseline(config, baseline_method_from_string(method));
      save_matrix(out_path, r.matrix);
      std::cout << json{{"method", method},
                        {"tasks", r.matrix.num_tasks()},
                        {"utility_evaluations", r.utility_evaluations},
                        {"trainings", r.trainings},
                        {"samples", r.samples},
                        {"wall_clock_seconds", r.wall_clock_seconds}}
                       .dump(2)
                << '\n';
    } else if (*eval) {
      ShapleyMatrix estimate;
      ShapleyMatrix reference;
      try {
        estimate = load_matrix(estimate_path);
        reference = load_matrix(reference_path);
      } catch (const ParseError& e) {
        throw ConfigFailure{e.what()};
      }
      const MetricsReport m = compare_matrices(estimate, reference, std::nullopt, threshold);
      std::cout << json{{"spearman", m.spearman}, {"pearson", m.pearson}, {"omega", m.omega}}.dump(2)
                << '\n';
    } else if (*sweep_cmd) {
      const ExperimentConfig config = load_with_seed(config_path, seed);
      const SweepKnob k = sweep_knob_from_string(knob);
      const std::vector<SweepRow> rows = sweep(config, k, parse_grid(grid));
      if (out_path.empty()) {
        write_sweep_table(std::cout, k, rows);
      } else {
        std::ofstream out(out_path);
        write_sweep_table(out, k, rows);
      }
    }
  } catch (const ConfigFailure& e) {
    std::cerr << "config error: " << e.message << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}

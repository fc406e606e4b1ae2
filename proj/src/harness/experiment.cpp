#include "shapmat/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "json_codec.hpp"
#include "shapmat/core/error.hpp"
#include "shapmat/core/matrix_io.hpp"
#include "shapmat/estimators/rng.hpp"

namespace shapmat {

using detail::json;

namespace {

struct Split {
  std::vector<DataPoint> pool;
  std::vector<DataPoint> held_out;
  std::optional<Graph> graph;
};

Split split_dataset(const ExperimentConfig& config) {
  config.validate();
  Dataset ds;
  if (config.dataset.path) {
    ds = load_dataset(*config.dataset.path, config.dataset.edges);
  } else {
    ds.points = make_blobs(*config.dataset.synthetic);
    if (config.dataset.edges) {
      std::ifstream in(*config.dataset.edges);
      ds.graph = read_edges(in);
    }
  }
  if (config.dataset.ring && !ds.graph) {
    std::vector<std::uint64_t> ids;
    for (const DataPoint& p : ds.points) ids.push_back(p.id);
    std::sort(ids.begin(), ids.end());
    ds.graph = ring_graph(ids, config.dataset.ring_chord);
  }

  std::vector<DataPoint> points = std::move(ds.points);
  std::mt19937_64 rng(splitmix64(config.seed ^ 0x5eedULL));
  std::shuffle(points.begin(), points.end(), rng);

  std::size_t held = 0;
  if (config.stream.count) {
    held = *config.stream.count;
  } else if (config.stream.fraction) {
    held = static_cast<std::size_t>(
        std::llround(*config.stream.fraction * static_cast<double>(points.size())));
  }
  if (held >= points.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "held-out pool of " + std::to_string(held) + " leaves no initial players");
  }
  Split split;
  split.graph = std::move(ds.graph);
  const auto cut = points.end() - static_cast<std::ptrdiff_t>(held);
  split.pool.assign(std::make_move_iterator(points.begin()), std::make_move_iterator(cut));
  split.held_out.assign(std::make_move_iterator(cut), std::make_move_iterator(points.end()));
  return split;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

json event_to_json(std::size_t index, const StreamEvent& e, const EventOutcome* outcome) {
  json j{{"type", "event"}, {"index", index}, {"kind", to_string(e.kind)}};
  json players = json::array();
  for (const DataPoint& p : e.players) players.push_back(detail::point_to_json(p));
  json tasks = json::array();
  for (const auto& [t, p] : e.tasks) {
    tasks.push_back({{"task", t.value()}, {"point", detail::point_to_json(p)}});
  }
  j["players"] = players;
  j["tasks"] = tasks;
  j["target_player"] = e.target_player ? json(e.target_player->value()) : json(nullptr);
  j["target_task"] = e.target_task ? json(e.target_task->value()) : json(nullptr);
  j["timestamp"] = utc_timestamp();
  if (outcome) {
    j["seconds"] = outcome->wall_clock_seconds;
    j["evaluations"] = outcome->evaluations;
    j["trainings"] = outcome->trainings;
    json affected = json::array();
    for (TaskId t : outcome->affected_tasks) affected.push_back(t.value());
    j["affected"] = affected;
  }
  return j;
}

StreamEvent event_from_json(const json& j) {
  StreamEvent e;
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  for (const json& p : j.at("players")) e.players.push_back(detail::point_from_json(p));
  for (const json& t : j.at("tasks")) {
    e.tasks.emplace_back(TaskId(t.at("task").get<std::uint64_t>()),
                         detail::point_from_json(t.at("point")));
  }
  if (!j.at("target_player").is_null()) e.target_player = PlayerId(j.at("target_player").get<std::uint64_t>());
  if (!j.at("target_task").is_null()) e.target_task = TaskId(j.at("target_task").get<std::uint64_t>());
  e.validate();
  return e;
}

StreamResult apply_and_finish(PreparedRun run, std::vector<StreamEvent> events) {
  StreamResult result;
  result.config = run.config;
  result.build = run.build;
  result.coverage = run.anchors.coverage;
  for (std::size_t i = 0; i < events.size(); ++i) {
    try {
      EventOutcome outcome = apply_event(*run.engine, events[i]);
      KindTotals& totals = result.totals[to_string(outcome.kind)];
      ++totals.events;
      totals.evaluations += outcome.evaluations;
      totals.trainings += outcome.trainings;
      totals.seconds += outcome.wall_clock_seconds;
      result.outcomes.push_back(std::move(outcome));
    } catch (const Error& e) {
      throw Error(e.code(), "event " + std::to_string(i) + ": " + e.what());
    }
  }
  result.events = std::move(events);
  result.matrix = *run.matrix;
  result.anchors_final = run.matrix->anchor_order().size();
  result.compared = compared_tasks(run.config, result.matrix, result.events);

  if (run.config.reference != ReferenceMode::kNone && !result.compared.empty()) {
    result.reference = reference_matrix(*run.game, result.compared, run.config.reference,
                                        run.config.mc, run.config.k_max);
    try {
      result.metrics = compare_matrices(result.matrix, *result.reference, result.compared);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInsufficientSupport) throw;
      result.metrics_error = e.what();
    }
  }
  return result;
}

}  // namespace

PreparedRun prepare_run(const ExperimentConfig& config) {
  Split split = split_dataset(config);
  PreparedRun run;
  run.config = config;
  run.held_out = std::move(split.held_out);
  run.game = std::make_unique<Game>(config.game, std::move(split.pool));
  if (split.graph) run.game->attach_graph(std::move(*split.graph));
  run.game->fit();
  register_proxy_tasks(*run.game);

  const auto members = run.game->universe().members();
  const std::size_t n = members.size();
  const std::size_t k =
      config.anchor_count
          ? *config.anchor_count
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(config.anchor_ratio * static_cast<double>(n))));
  run.anchors = select_anchors_fps(members, k, proxy_distance(*run.game, config.distance),
                                   config.fps_seed);

  SelfValuation sv = build_self_matrix(*run.game, run.anchors.anchors, config.selfval);
  sv.report.r_max = run.anchors.coverage.r_max;
  run.build = sv.report;
  run.matrix = std::make_unique<ShapleyMatrix>(std::move(sv.matrix));

  EngineConfig ec;
  ec.distance = config.distance;
  ec.tau = config.tau;
  ec.k_interp = config.k_interp;
  ec.k_max = config.k_max;
  ec.kappa = config.kappa;
  ec.mc = config.mc;
  run.engine = std::make_unique<Engine>(*run.game, *run.matrix, ec);
  for (const auto& [t, basis] : sv.basis) run.engine->set_basis(t, basis, sv.provenance.at(t));
  return run;
}

std::vector<StreamEvent> make_stream(const PreparedRun& run) {
  std::vector<StreamEvent> events;
  for (std::size_t i = 0; i < run.held_out.size(); ++i) {
    const DataPoint& p = run.held_out[i];
    StreamEvent e;
    const bool as_player = run.config.stream.mode == StreamMode::kPlayer ||
                           (run.config.stream.mode == StreamMode::kMixed && i % 2 == 0);
    if (as_player) {
      e.kind = EventKind::kPlayerAdd;
      e.players.push_back(p);
    } else {
      e.kind = EventKind::kTaskAdd;
      e.tasks.emplace_back(TaskId(p.id), p);
    }
    events.push_back(std::move(e));
  }
  return events;
}

StreamResult run_stream(const ExperimentConfig& config) {
  PreparedRun run = prepare_run(config);
  std::vector<StreamEvent> events = make_stream(run);
  return apply_and_finish(std::move(run), std::move(events));
}

StreamResult replay_stream(const std::string& events_path) {
  std::ifstream in(events_path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open event log '" + events_path + "'");
  std::string line;
  std::size_t number = 0;
  std::optional<ExperimentConfig> config;
  std::vector<StreamEvent> events;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        config = detail::config_from_value(j.at("config"));
      } else if (type == "event") {
        if (!config) throw ParseError(number, "event before header");
        events.push_back(event_from_json(j));
      } else {
        throw ParseError(number, "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ParseError(number, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(number, e.what());
    }
  }
  if (!config) throw ParseError(1, "event log has no header");
  return apply_and_finish(prepare_run(*config), std::move(events));
}

std::vector<TaskId> compared_tasks(const ExperimentConfig& config, const ShapleyMatrix& m,
                                   const std::vector<StreamEvent>& events) {
  std::vector<TaskId> out;
  switch (config.stream.mode) {
    case StreamMode::kTask:
      for (const StreamEvent& e : events) {
        for (const auto& [t, p] : e.tasks) {
          if (m.has_task(t)) out.push_back(t);
        }
      }
      break;
    case StreamMode::kPlayer:
      out.assign(m.anchor_order().begin(), m.anchor_order().end());
      break;
    case StreamMode::kMixed:
      out.assign(m.tasks().begin(), m.tasks().end());
      break;
  }
  return out;
}

ShapleyMatrix reference_matrix(const Game& game, const std::vector<TaskId>& tasks,
                               ReferenceMode mode, const McConfig& mc, std::size_t k_max) {
  ShapleyMatrix ref;
  for (PlayerId z : game.universe().members()) ref.append_row(z);
  for (TaskId t : tasks) {
    const TaskGame local(game, t);
    McConfig seeded = mc;
    seeded.seed = splitmix64(mc.seed ^ splitmix64(t.value() + 0x7ef));
    EstimateReport r;
    if (mode == ReferenceMode::kGlobalMc) {
      Coalition players = game.universe();
      if (const auto proxy = game.proxy_of(t); proxy && players.contains(*proxy)) {
        players = players.without(*proxy);
      }
      r = permutation_mc(local, players, t, seeded, false);
    } else {
      const Coalition support = game.support(t).members;
      const std::size_t limit = std::min(k_max, kHardExactLimit);
      r = support.size() <= limit ? exact_local_shapley(local, support, t, limit)
                                  : permutation_mc(local, support, t, seeded, false);
    }
    std::optional<PlayerId> proxy = game.proxy_of(t);
    if (proxy && !ref.has_player(*proxy)) proxy.reset();
    ref.append_column(r.column, false, proxy);
  }
  return ref;
}

void write_meta(std::ostream& out, const ExperimentConfig& config) {
  const json c = detail::config_to_value(config);
  json meta{{"model", c.at("model")},
            {"distance", c.at("distance")},
            {"tau", config.tau},
            {"k_interp", config.k_interp},
            {"k_max", config.k_max},
            {"kappa", config.kappa},
            {"seed", config.seed},
            {"mc_seed", config.mc.seed}};
  out << meta.dump(2) << '\n';
}

void write_event_log(std::ostream& out, const ExperimentConfig& config,
                     const std::vector<StreamEvent>& events,
                     const std::vector<EventOutcome>& outcomes) {
  json header{{"type", "header"},
              {"version", 1},
              {"timestamp", utc_timestamp()},
              {"config", detail::config_to_value(config)}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < events.size(); ++i) {
    out << event_to_json(i, events[i], i < outcomes.size() ? &outcomes[i] : nullptr).dump()
        << '\n';
  }
}

std::string report_json(const StreamResult& r) {
  json build{{"n", r.build.n},
             {"k", r.build.k},
             {"mode", to_string(r.build.mode)},
             {"scope", to_string(r.build.scope)},
             {"trainings", r.build.trainings},
             {"utility_evaluations", r.build.utility_evaluations},
             {"samples", r.build.samples},
             {"wall_clock_seconds", r.build.wall_clock_seconds},
             {"r_max", r.build.r_max ? json(*r.build.r_max) : json(nullptr)}};
  json totals = json::object();
  for (const auto& [kind, t] : r.totals) {
    totals[kind] = {{"events", t.events},
                    {"evaluations", t.evaluations},
                    {"trainings", t.trainings},
                    {"wall_clock_seconds", t.seconds}};
  }
  json metrics = nullptr;
  if (r.metrics) {
    metrics = {{"spearman", r.metrics->spearman},
               {"pearson", r.metrics->pearson},
               {"omega", r.metrics->omega},
               {"compared_tasks", r.compared.size()}};
  }
  json report{{"config", detail::config_to_value(r.config)},
              {"build", build},
              {"stream", {{"events", r.events.size()}, {"by_kind", totals}}},
              {"anchors_final", r.anchors_final},
              {"metrics", metrics}};
  if (!r.metrics_error.empty()) report["metrics_error"] = r.metrics_error;
  return report.dump(2);
}

void write_artifacts(const StreamResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_matrix((base / "matrix.csv").string(), result.matrix);
  {
    std::ofstream out(base / "matrix.meta.json");
    write_meta(out, result.config);
  }
  {
    std::ofstream out(base / "events.jsonl");
    write_event_log(out, result.config, result.events, result.outcomes);
  }
  {
    std::ofstream out(base / "report.json");
    out << report_json(result) << '\n';
  }
  if (result.reference) save_matrix((base / "reference.csv").string(), *result.reference);
}

const char* to_string(SweepKnob knob) noexcept {
  switch (knob) {
    case SweepKnob::kSupportSize: return "support_size";
    case SweepKnob::kAnchorRatio: return "anchor_ratio";
    case SweepKnob::kInterpK: return "interp_K";
    case SweepKnob::kTau: return "tau";
  }
  return "unknown";
}

SweepKnob sweep_knob_from_string(const std::string& name) {
  for (SweepKnob k : {SweepKnob::kSupportSize, SweepKnob::kAnchorRatio, SweepKnob::kInterpK,
                      SweepKnob::kTau}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown sweep knob '" + name + "'");
}

ExperimentConfig apply_knob(ExperimentConfig config, SweepKnob knob, double value) {
  auto whole = [&](double v) {
    if (!(v >= 1.0) || v != std::floor(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string(to_string(knob)) + " needs positive integers");
    }
    return static_cast<std::size_t>(v);
  };
  switch (knob) {
    case SweepKnob::kSupportSize: {
      const std::size_t s = whole(value);
      config.game.support_cap = std::max(config.game.support_cap, s);
      if (auto* w = std::get_if<WknnParams>(&config.game.family)) {
        if (s >= w->k) {
          w->support_multiplier = static_cast<double>(s) / static_cast<double>(w->k);
        } else {
          w->k = s;
          w->support_multiplier = 1.0;
        }
      } else if (auto* r = std::get_if<RidgeParams>(&config.game.family)) {
        r->support_k = s;
      } else {
        config.game.support_cap = s;
      }
      break;
    }
    case SweepKnob::kAnchorRatio:
      config.anchor_count.reset();
      config.anchor_ratio = value;
      break;
    case SweepKnob::kInterpK:
      config.k_interp = whole(value);
      break;
    case SweepKnob::kTau:
      config.tau = value;
      break;
  }
  config.output_dir.reset();
  return config;
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, SweepKnob knob,
                            const std::vector<double>& grid) {
  std::vector<SweepRow> rows;
  for (double value : grid) {
    const StreamResult r = run_stream(apply_knob(config, knob, value));
    SweepRow row;
    row.value = value;
    row.spearman = r.metrics ? r.metrics->spearman : std::numeric_limits<double>::quiet_NaN();
    row.pearson = r.metrics ? r.metrics->pearson : std::numeric_limits<double>::quiet_NaN();
    row.omega = r.metrics ? r.metrics->omega : 0;
    row.anchors = r.anchors_final;
    row.r_max = r.coverage.r_max;
    row.build_trainings = r.build.trainings;
    row.build_evaluations = r.build.utility_evaluations;
    row.build_seconds = r.build.wall_clock_seconds;
    for (const auto& [kind, t] : r.totals) {
      row.stream_evaluations += t.evaluations;
      row.stream_trainings += t.trainings;
      row.stream_seconds += t.seconds;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_table(std::ostream& out, SweepKnob knob, const std::vector<SweepRow>& rows) {
  out << to_string(knob)
      << ",spearman,pearson,omega,anchors,r_max,build_trainings,build_evaluations,"
         "stream_evaluations,stream_trainings,build_seconds,stream_seconds\n";
  for (const SweepRow& r : rows) {
    out << format_double(r.value) << ',' << format_double(r.spearman) << ','
        << format_double(r.pearson) << ',' << r.omega << ',' << r.anchors << ','
        << format_double(r.r_max) << ',' << r.build_trainings << ',' << r.build_evaluations
        << ',' << r.stream_evaluations << ',' << r.stream_trainings << ','
        << format_double(r.build_seconds) << ',' << format_double(r.stream_seconds) << '\n';
  }
}

BaselineMethod baseline_method_from_string(const std::string& name) {
  if (name == "global_mc") return BaselineMethod::kGlobalMc;
  if (name == "tmc") return BaselineMethod::kTmc;
  if (name == "complementary") return BaselineMethod::kComplementary;
  throw Error(ErrorCode::kInvalidArgument,
              "baseline method must be global_mc, tmc or complementary");
}

BaselineResult run_baseline(const ExperimentConfig& config, BaselineMethod method) {
  const auto start = std::chrono::steady_clock::now();
  Split split = split_dataset(config);
  Game game(config.game, std::move(split.pool));
  if (split.graph) game.attach_graph(std::move(*split.graph));
  game.fit();

  BaselineResult out;
  for (PlayerId z : game.universe().members()) out.matrix.append_row(z);
  for (const DataPoint& p : split.held_out) {
    const TaskId t(p.id);
    game.add_task(t, p);
    const TaskGame local(game, t);
    McConfig mc = config.mc;
    mc.seed = splitmix64(config.mc.seed ^ splitmix64(t.value()));
    const std::uint64_t before = game.trainings();
    const EstimateReport r =
        method == BaselineMethod::kComplementary
            ? complementary_mc(local, game.universe(), t, mc)
            : permutation_mc(local, game.universe(), t, mc, method == BaselineMethod::kTmc);
    out.utility_evaluations += r.utility_evaluations;
    out.trainings += game.trainings() - before;
    out.samples += r.samples_used;
    out.matrix.append_column(r.column, false);
    out.matrix.set_task_label(t, p.label);
  }
  out.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace shapmat

#include "shapmat/harness/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_codec.hpp"
#include "shapmat/core/error.hpp"

namespace shapmat {
namespace detail {
namespace {

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <class T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

ProfileKind profile_kind_from_string(const std::string& name) {
  for (ProfileKind k : {ProfileKind::kNeighborWeights, ProfileKind::kDecisionPath,
                        ProfileKind::kKernelRelevance, ProfileKind::kEmbedding,
                        ProfileKind::kPpr}) {
    if (name == to_string(k)) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown distance kind '" + name + "'");
}

json family_to_value(const ModelFamily& family) {
  json j;
  j["family"] = family_name(family);
  if (const auto* p = std::get_if<WknnParams>(&family)) {
    j["k"] = p->k;
    j["support_multiplier"] = p->support_multiplier;
  } else if (const auto* p = std::get_if<TreeParams>(&family)) {
    j["max_depth"] = p->max_depth;
    j["min_leaf"] = p->min_leaf;
  } else if (const auto* p = std::get_if<RbfParams>(&family)) {
    j["gamma"] = p->gamma ? json(*p->gamma) : json(nullptr);
    j["relevance_threshold"] = p->relevance_threshold;
  } else if (const auto* p = std::get_if<RidgeParams>(&family)) {
    j["mu"] = p->mu;
    j["loss_lipschitz"] = p->loss_lipschitz;
    j["loss_at_zero_bound"] = p->loss_at_zero_bound;
    j["support_k"] = p->support_k;
    j["positive_label"] = p->positive_label;
  }
  return j;
}

ModelFamily family_from_value(const json& j) {
  const std::string name = j.value("family", std::string("wknn"));
  if (name == "wknn") {
    WknnParams p;
    read_opt(j, "k", p.k);
    read_opt(j, "support_multiplier", p.support_multiplier);
    return p;
  }
  if (name == "tree") {
    TreeParams p;
    read_opt(j, "max_depth", p.max_depth);
    read_opt(j, "min_leaf", p.min_leaf);
    return p;
  }
  if (name == "rbf") {
    RbfParams p;
    read_opt(j, "gamma", p.gamma);
    read_opt(j, "relevance_threshold", p.relevance_threshold);
    return p;
  }
  if (name == "ridge") {
    RidgeParams p;
    read_opt(j, "mu", p.mu);
    read_opt(j, "loss_lipschitz", p.loss_lipschitz);
    p.loss_at_zero_bound = p.loss_lipschitz * std::log(2.0);
    read_opt(j, "loss_at_zero_bound", p.loss_at_zero_bound);
    read_opt(j, "support_k", p.support_k);
    read_opt(j, "positive_label", p.positive_label);
    return p;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown model family '" + name + "'");
}

ProfileKind natural_kind(const ModelFamily& family) {
  if (std::holds_alternative<TreeParams>(family)) return ProfileKind::kDecisionPath;
  if (std::holds_alternative<RbfParams>(family)) return ProfileKind::kKernelRelevance;
  if (std::holds_alternative<RidgeParams>(family)) return ProfileKind::kEmbedding;
  return ProfileKind::kNeighborWeights;
}

}  // namespace

json point_to_json(const DataPoint& p) {
  json j{{"id", p.id}, {"label", p.label}, {"features", p.features}};
  if (!p.embedding.empty()) j["embedding"] = p.embedding;
  return j;
}

DataPoint point_from_json(const json& j) {
  DataPoint p;
  p.id = j.at("id").get<std::uint64_t>();
  p.label = j.at("label").get<int>();
  p.features = j.at("features").get<std::vector<double>>();
  read_opt(j, "embedding", p.embedding);
  return p;
}

json config_to_value(const ExperimentConfig& c) {
  json ds;
  if (c.dataset.path) ds["path"] = *c.dataset.path;
  if (c.dataset.edges) ds["edges"] = *c.dataset.edges;
  if (c.dataset.synthetic) {
    const BlobSpec& b = *c.dataset.synthetic;
    ds["synthetic"] = {{"classes", b.classes}, {"per_class", b.per_class}, {"dims", b.dims},
                       {"separation", b.separation}, {"spread", b.spread},
                       {"embed_dims", b.embed_dims}, {"seed", b.seed},
                       {"total", b.total ? json(*b.total) : json(nullptr)}};
  }
  ds["ring"] = c.dataset.ring;
  ds["ring_chord"] = c.dataset.ring_chord;

  json model = family_to_value(c.game.family);
  model["utility"] = to_string(c.game.utility);
  model["default_class"] = c.game.default_class;
  model["num_classes"] = c.game.num_classes;
  model["support_cap"] = c.game.support_cap;
  model["cache_capacity"] = c.game.cache_capacity;

  const DistanceConfig& d = c.distance;
  json distance{{"kind", to_string(d.kind)},
                {"label_strict", d.label_strict},
                {"label_penalty", d.label_penalty == LabelPenalty::kAugmented ? "augmented" : "ignore"},
                {"embedding_metric", d.embedding_metric == EmbeddingMetric::kCosine ? "cosine" : "euclidean"},
                {"ppr_alpha", d.ppr_alpha},
                {"ppr_tolerance", d.ppr_tolerance},
                {"ppr_max_iterations", d.ppr_max_iterations},
                {"lipschitz", d.lipschitz ? json(*d.lipschitz) : json(nullptr)}};

  json anchors{{"count", c.anchor_count ? json(*c.anchor_count) : json(nullptr)},
               {"ratio", c.anchor_ratio},
               {"fps_seed", c.fps_seed ? json(*c.fps_seed) : json(nullptr)},
               {"tau", c.tau},
               {"k_interp", c.k_interp},
               {"k_max", c.k_max},
               {"kappa", c.kappa}};

  json stream{{"mode", to_string(c.stream.mode)},
              {"count", c.stream.count ? json(*c.stream.count) : json(nullptr)},
              {"fraction", c.stream.fraction ? json(*c.stream.fraction) : json(nullptr)}};

  json mc{{"max_samples", c.mc.max_samples},
          {"check_interval", c.mc.check_interval},
          {"rel_change_stop", c.mc.rel_change_stop},
          {"truncation_tolerance", c.mc.truncation_tolerance},
          {"seed", c.mc.seed}};

  return json{{"dataset", ds},
              {"seed", c.seed},
              {"model", model},
              {"distance", distance},
              {"anchors", anchors},
              {"selfval", {{"mode", to_string(c.selfval.mode)}, {"scope", to_string(c.selfval.scope)}}},
              {"stream", stream},
              {"mc", mc},
              {"reference", to_string(c.reference)},
              {"output_dir", c.output_dir ? json(*c.output_dir) : json(nullptr)}};
}

ExperimentConfig config_from_value(const json& j) {
  ExperimentConfig c;
  read_opt(j, "seed", c.seed);
  c.mc.seed = c.seed;

  if (j.contains("dataset")) {
    const json& ds = j.at("dataset");
    read_opt(ds, "path", c.dataset.path);
    read_opt(ds, "edges", c.dataset.edges);
    read_opt(ds, "ring", c.dataset.ring);
    read_opt(ds, "ring_chord", c.dataset.ring_chord);
    if (ds.contains("synthetic") && !ds.at("synthetic").is_null()) {
      const json& s = ds.at("synthetic");
      BlobSpec b;
      b.seed = c.seed;
      read_opt(s, "classes", b.classes);
      read_opt(s, "per_class", b.per_class);
      read_opt(s, "dims", b.dims);
      read_opt(s, "separation", b.separation);
      read_opt(s, "spread", b.spread);
      read_opt(s, "embed_dims", b.embed_dims);
      read_opt(s, "seed", b.seed);
      read_opt(s, "total", b.total);
      c.dataset.synthetic = b;
    }
  }

  if (j.contains("model")) {
    const json& m = j.at("model");
    c.game.family = family_from_value(m);
    if (m.contains("utility")) c.game.utility = utility_kind_from_string(m.at("utility").get<std::string>());
    read_opt(m, "default_class", c.game.default_class);
    read_opt(m, "num_classes", c.game.num_classes);
    read_opt(m, "support_cap", c.game.support_cap);
    read_opt(m, "cache_capacity", c.game.cache_capacity);
  }

  c.distance.kind = natural_kind(c.game.family);
  if (j.contains("distance")) {
    const json& d = j.at("distance");
    if (d.contains("kind")) c.distance.kind = profile_kind_from_string(d.at("kind").get<std::string>());
    read_opt(d, "label_strict", c.distance.label_strict);
    if (d.contains("label_penalty")) {
      const auto v = d.at("label_penalty").get<std::string>();
      if (v != "ignore" && v != "augmented") {
        throw Error(ErrorCode::kInvalidArgument, "label_penalty must be ignore or augmented");
      }
      c.distance.label_penalty = v == "augmented" ? LabelPenalty::kAugmented : LabelPenalty::kIgnore;
    }
    if (d.contains("embedding_metric")) {
      const auto v = d.at("embedding_metric").get<std::string>();
      if (v != "cosine" && v != "euclidean") {
        throw Error(ErrorCode::kInvalidArgument, "embedding_metric must be cosine or euclidean");
      }
      c.distance.embedding_metric = v == "cosine" ? EmbeddingMetric::kCosine : EmbeddingMetric::kEuclidean;
    }
    read_opt(d, "ppr_alpha", c.distance.ppr_alpha);
    read_opt(d, "ppr_tolerance", c.distance.ppr_tolerance);
    read_opt(d, "ppr_max_iterations", c.distance.ppr_max_iterations);
    read_opt(d, "lipschitz", c.distance.lipschitz);
  }
  c.game.ppr_alpha = c.distance.ppr_alpha;
  c.game.ppr_tolerance = c.distance.ppr_tolerance;

  if (j.contains("anchors")) {
    const json& a = j.at("anchors");
    read_opt(a, "count", c.anchor_count);
    read_opt(a, "ratio", c.anchor_ratio);
    read_opt(a, "fps_seed", c.fps_seed);
    read_opt(a, "tau", c.tau);
    read_opt(a, "k_interp", c.k_interp);
    read_opt(a, "k_max", c.k_max);
    read_opt(a, "kappa", c.kappa);
  }
  c.selfval.k_max = c.k_max;
  if (j.contains("selfval")) {
    const json& s = j.at("selfval");
    if (s.contains("mode")) c.selfval.mode = selfval_mode_from_string(s.at("mode").get<std::string>());
    if (s.contains("scope")) c.selfval.scope = selfval_scope_from_string(s.at("scope").get<std::string>());
  }

  if (j.contains("stream")) {
    const json& s = j.at("stream");
    if (s.contains("mode")) {
      const auto v = s.at("mode").get<std::string>();
      if (v == "task") c.stream.mode = StreamMode::kTask;
      else if (v == "player") c.stream.mode = StreamMode::kPlayer;
      else if (v == "mixed") c.stream.mode = StreamMode::kMixed;
      else throw Error(ErrorCode::kInvalidArgument, "stream mode must be task, player or mixed");
    }
    read_opt(s, "count", c.stream.count);
    read_opt(s, "fraction", c.stream.fraction);
  }

  if (j.contains("mc")) {
    const json& m = j.at("mc");
    read_opt(m, "max_samples", c.mc.max_samples);
    read_opt(m, "check_interval", c.mc.check_interval);
    read_opt(m, "rel_change_stop", c.mc.rel_change_stop);
    read_opt(m, "truncation_tolerance", c.mc.truncation_tolerance);
    read_opt(m, "seed", c.mc.seed);
  }
  c.selfval.mc = c.mc;

  if (j.contains("reference")) {
    const auto v = j.at("reference").get<std::string>();
    if (v == "none") c.reference = ReferenceMode::kNone;
    else if (v == "exact") c.reference = ReferenceMode::kExact;
    else if (v == "global_mc") c.reference = ReferenceMode::kGlobalMc;
    else throw Error(ErrorCode::kInvalidArgument, "reference must be none, exact or global_mc");
  }
  read_opt(j, "output_dir", c.output_dir);
  return c;
}

}  // namespace detail

const char* to_string(StreamMode mode) noexcept {
  switch (mode) {
    case StreamMode::kTask: return "task";
    case StreamMode::kPlayer: return "player";
    case StreamMode::kMixed: return "mixed";
  }
  return "unknown";
}

const char* to_string(ReferenceMode mode) noexcept {
  switch (mode) {
    case ReferenceMode::kNone: return "none";
    case ReferenceMode::kExact: return "exact";
    case ReferenceMode::kGlobalMc: return "global_mc";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::kInvalidArgument, m); };
  if (dataset.path.has_value() == dataset.synthetic.has_value()) {
    fail("dataset needs exactly one of 'path' or 'synthetic'");
  }
  for (const auto& p : {dataset.path, dataset.edges}) {
    if (p && !std::filesystem::exists(*p)) fail("dataset file '" + *p + "' does not exist");
  }
  if (dataset.synthetic) dataset.synthetic->validate();
  shapmat::validate(game.family);
  distance.validate();
  if (!anchor_count && !(anchor_ratio > 0.0 && anchor_ratio <= 1.0)) {
    fail("anchor ratio must lie in (0, 1]");
  }
  if (anchor_count && *anchor_count == 0) fail("anchor count must be >= 1");
  if (stream.fraction && !(*stream.fraction > 0.0 && *stream.fraction < 1.0)) {
    fail("stream fraction must lie in (0, 1)");
  }
  if (!(tau >= 0.0) || k_interp < 1 || k_max < 1 || k_max > kHardExactLimit) {
    fail("tau, k_interp or k_max out of range");
  }
  mc.validate();
}

ExperimentConfig config_from_json(const std::string& text) {
  try {
    return detail::config_from_value(detail::json::parse(text));
  } catch (const detail::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config: ") + e.what());
  }
}

std::string config_to_json(const ExperimentConfig& config) {
  return detail::config_to_value(config).dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

}  // namespace shapmat

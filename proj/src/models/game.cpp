#include "shapmat/models/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Cholesky>

#include "shapmat/core/error.hpp"
#include "shapmat/locality/distance.hpp"

namespace shapmat {
namespace {

constexpr double kWeightGuard = 1e-12;
constexpr double kProbFloor = 1e-12;

struct Scored {
  double score;
  PointRef point;
};

// Ascending score, ties by ascending id.
void sort_ascending(std::vector<Scored>& v) {
  std::sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.point->id < b.point->id;
  });
}

// Descending score, ties by ascending id.
void sort_descending(std::vector<Scored>& v) {
  std::sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.point->id < b.point->id;
  });
}

Coalition coalition_of(const std::vector<Scored>& v, std::size_t count) {
  std::vector<PlayerId> ids;
  ids.reserve(count);
  for (std::size_t i = 0; i < count && i < v.size(); ++i) ids.emplace_back(v[i].point->id);
  return Coalition(std::move(ids));
}

double sigmoid(double a) {
  return a >= 0.0 ? 1.0 / (1.0 + std::exp(-a)) : std::exp(a) / (1.0 + std::exp(a));
}

// log(1 + exp(-m)) without overflow.
double softplus_neg(double m) {
  return m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

int argmax_or(const std::vector<double>& proba, int fallback) {
  double best = -1.0;
  int arg = fallback;
  for (std::size_t c = 0; c < proba.size(); ++c) {
    if (proba[c] > best) {
      best = proba[c];
      arg = static_cast<int>(c);
    }
  }
  return arg;
}

double median_pairwise_sq(const std::vector<DataPoint>& points) {
  std::vector<double> d;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      d.push_back(squared_distance(points[i].features, points[j].features));
    }
  }
  if (d.empty()) return 0.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  return *mid;
}

}  // namespace

Game::Game(GameConfig config, std::vector<DataPoint> players) : config_(std::move(config)) {
  validate(config_.family);
  if (config_.support_cap == 0) {
    throw Error(ErrorCode::kInvalidArgument, "support_cap must be >= 1");
  }
  if (config_.default_class < 0) {
    throw Error(ErrorCode::kInvalidArgument, "default_class must be >= 0");
  }
  int max_label = config_.default_class;
  for (const DataPoint& p : players) {
    if (p.label < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "negative label on record " + std::to_string(p.id));
    }
    max_label = std::max(max_label, p.label);
  }
  num_classes_ = config_.num_classes > 0 ? config_.num_classes : std::max(2, max_label + 1);
  if (config_.default_class >= num_classes_) {
    throw Error(ErrorCode::kInvalidArgument, "default_class outside the label set");
  }
  if (!players.empty()) dimension_ = players.front().features.size();

  rbf_gamma_ = 1.0;
  if (const auto* rbf = std::get_if<RbfParams>(&config_.family); rbf && rbf->gamma) {
    rbf_gamma_ = *rbf->gamma;
  } else {
    const double med = median_pairwise_sq(players);
    if (med > 0.0) rbf_gamma_ = 1.0 / med;
  }

  std::vector<PlayerId> ids;
  for (DataPoint& p : players) {
    const PlayerId id(p.id);
    check_point(p);
    if (!players_.emplace(id, std::make_shared<const DataPoint>(std::move(p))).second) {
      throw Error(ErrorCode::kAlreadyExists, "duplicate player " + std::to_string(id.value()));
    }
    ids.push_back(id);
  }
  universe_ = Coalition(std::move(ids));
}

void Game::check_point(const DataPoint& p) const {
  if (dimension_ && p.features.size() != *dimension_) {
    throw Error(ErrorCode::kInvalidArgument,
                "record " + std::to_string(p.id) + " has " +
                    std::to_string(p.features.size()) + " features, expected " +
                    std::to_string(*dimension_));
  }
}

const DataPoint& Game::player(PlayerId z) const { return *player_ref(z); }

PointRef Game::player_ref(PlayerId z) const {
  auto it = players_.find(z);
  if (it == players_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown player " + std::to_string(z.value()));
  }
  return it->second;
}

void Game::add_player(DataPoint point) {
  const PlayerId id(point.id);
  if (players_.contains(id)) {
    throw Error(ErrorCode::kAlreadyExists, "player " + std::to_string(id.value()) + " exists");
  }
  if (point.label < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "negative label on record " + std::to_string(point.id));
  }
  if (!dimension_) dimension_ = point.features.size();
  check_point(point);
  // A returning id may carry different data; cached models could be stale.
  if (retired_.erase(id) > 0) clear_cache();
  players_.emplace(id, std::make_shared<const DataPoint>(std::move(point)));
  universe_ = universe_.with(id);
  on_universe_changed();
}

void Game::remove_player(PlayerId z) {
  if (players_.erase(z) == 0) {
    throw Error(ErrorCode::kNotFound, "unknown player " + std::to_string(z.value()));
  }
  retired_.insert(z);
  universe_ = universe_.without(z);
  on_universe_changed();
}

void Game::on_universe_changed() {
  ++epoch_;
  if (fitted_) fit();
}

void Game::add_task(TaskId t, DataPoint point, std::optional<PlayerId> proxy_of) {
  if (tasks_.contains(t)) {
    throw Error(ErrorCode::kAlreadyExists, "task " + std::to_string(t.value()) + " exists");
  }
  if (proxy_of && !players_.contains(*proxy_of)) {
    throw Error(ErrorCode::kNotFound,
                "proxy target " + std::to_string(proxy_of->value()) + " is not a player");
  }
  check_point(point);
  tasks_.emplace(t, TaskEntry{std::move(point), proxy_of});
}

void Game::remove_task(TaskId t) {
  if (tasks_.erase(t) == 0) {
    throw Error(ErrorCode::kNotFound, "unknown task " + std::to_string(t.value()));
  }
}

const DataPoint& Game::task(TaskId t) const {
  auto it = tasks_.find(t);
  if (it == tasks_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown task " + std::to_string(t.value()));
  }
  return it->second.point;
}

std::optional<PlayerId> Game::proxy_of(TaskId t) const {
  auto it = tasks_.find(t);
  if (it == tasks_.end()) {
    throw Error(ErrorCode::kNotFound, "unknown task " + std::to_string(t.value()));
  }
  return it->second.proxy_of;
}

void Game::attach_graph(Graph graph) { graph_ = std::move(graph); }

void Game::fit() {
  fitted_ = true;
  if (const auto* params = std::get_if<TreeParams>(&config_.family)) {
    std::vector<const DataPoint*> pts;
    pts.reserve(players_.size());
    for (const auto& [id, p] : players_) pts.push_back(p.get());
    universe_tree_ = DecisionTree::fit(pts, *params, num_classes_, config_.default_class);
    tree_id_ = epoch_;
  }
}

// ---------------------------------------------------------------------------
// training

TrainedModel Game::fit_model(const Coalition& s) const {
  std::vector<PointRef> pts;
  pts.reserve(s.size());
  for (PlayerId z : s.members()) pts.push_back(player_ref(z));

  if (const auto* tree = std::get_if<TreeParams>(&config_.family)) {
    std::vector<const DataPoint*> raw;
    raw.reserve(pts.size());
    for (const PointRef& p : pts) raw.push_back(p.get());
    return TreeModel{DecisionTree::fit(raw, *tree, num_classes_, config_.default_class)};
  }
  if (const auto* ridge = std::get_if<RidgeParams>(&config_.family)) {
    return LinearModel{fit_ridge(pts, *ridge)};
  }
  return NeighborVoteModel{std::move(pts)};
}

Eigen::VectorXd Game::fit_ridge(const std::vector<PointRef>& pts,
                                const RidgeParams& params) const {
  const std::size_t dim =
      players_.empty() ? (dimension_ ? *dimension_ : 0)
                       : representation(*players_.begin()->second).size();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  if (pts.empty()) return theta;

  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim));
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& psi = representation(*pts[static_cast<std::size_t>(i)]);
    if (psi.size() != dim) {
      throw Error(ErrorCode::kInvalidArgument, "representation dimensions differ");
    }
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(psi.data(), static_cast<Eigen::Index>(dim));
    y(i) = pts[static_cast<std::size_t>(i)]->label == params.positive_label ? 1.0 : -1.0;
  }
  const double scale = params.loss_lipschitz / static_cast<double>(n);

  // Mean loss plus (mu/2)|theta|^2; strongly convex, so damped Newton converges.
  auto objective = [&](const Eigen::VectorXd& th) {
    const Eigen::VectorXd m = (x * th).cwiseProduct(y);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += softplus_neg(m(i));
    return scale * loss + 0.5 * params.mu * th.squaredNorm();
  };

  double f = objective(theta);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd m = (x * theta).cwiseProduct(y);
    Eigen::VectorXd g_coef(n);
    Eigen::VectorXd h_coef(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = sigmoid(-m(i));
      g_coef(i) = -scale * y(i) * s;
      h_coef(i) = scale * s * (1.0 - s);
    }
    const Eigen::VectorXd grad = x.transpose() * g_coef + params.mu * theta;
    if (grad.norm() < 1e-12) break;
    Eigen::MatrixXd hess = x.transpose() * h_coef.asDiagonal() * x;
    hess.diagonal().array() += params.mu;
    const Eigen::VectorXd step = hess.ldlt().solve(-grad);
    double t = 1.0;
    Eigen::VectorXd candidate = theta + step;
    double fc = objective(candidate);
    while (fc > f && t > 1e-10) {
      t *= 0.5;
      candidate = theta + t * step;
      fc = objective(candidate);
    }
    if (fc > f) break;
    const bool stalled = (candidate - theta).norm() == 0.0;
    theta = candidate;
    f = fc;
    if (stalled) break;
  }
  return theta;
}

ModelHandle Game::train(const Coalition& s) const {
  s.require_subset_of(universe_);
  if (!config_.cache_enabled) return train_uncached(s);

  std::shared_ptr<CacheEntry> entry;
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto key = s.key();
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      if (cache_.size() >= config_.cache_capacity) cache_.clear();
      it = cache_.emplace(std::move(key), std::make_shared<CacheEntry>()).first;
    }
    entry = it->second;
  }
  std::call_once(entry->once, [&] {
    entry->model = std::make_shared<const TrainedModel>(fit_model(s));
    trainings_.fetch_add(1);
  });
  return entry->model;
}

ModelHandle Game::train_uncached(const Coalition& s) const {
  s.require_subset_of(universe_);
  auto model = std::make_shared<const TrainedModel>(fit_model(s));
  trainings_.fetch_add(1);
  return model;
}

void Game::clear_cache() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.clear();
}

// ---------------------------------------------------------------------------
// evaluation

double Game::linear_score(const LinearModel& model, const DataPoint& task) const {
  const auto& psi = representation(task);
  if (static_cast<Eigen::Index>(psi.size()) != model.theta.size()) {
    throw Error(ErrorCode::kInvalidArgument, "task representation dimension mismatch");
  }
  return model.theta.dot(
      Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(psi.size())));
}

std::vector<double> Game::class_proba(const TrainedModel& model,
                                      const DataPoint& task) const {
  const auto classes = static_cast<std::size_t>(num_classes_);
  std::vector<double> proba(classes, 0.0);
  auto uniform = [&] { return std::vector<double>(classes, 1.0 / static_cast<double>(classes)); };

  if (const auto* tm = std::get_if<TreeModel>(&model)) {
    const auto p = tm->tree.proba(task.features);
    return {p.begin(), p.end()};
  }
  const auto& vote = std::get<NeighborVoteModel>(model);
  if (vote.points.empty()) return uniform();

  if (const auto* wknn = std::get_if<WknnParams>(&config_.family)) {
    std::vector<Scored> near;
    near.reserve(vote.points.size());
    for (const PointRef& p : vote.points) {
      near.push_back({squared_distance(p->features, task.features), p});
    }
    const std::size_t k = std::min(wknn->k, near.size());
    std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end(),
                      [](const Scored& a, const Scored& b) {
                        if (a.score != b.score) return a.score < b.score;
                        return a.point->id < b.point->id;
                      });
    double total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double w = 1.0 / (std::sqrt(near[i].score) + kWeightGuard);
      const auto label = static_cast<std::size_t>(near[i].point->label);
      if (label < classes) proba[label] += w;
      total += w;
    }
    for (double& v : proba) v /= total;
    return proba;
  }

  // Kernel vote; an all-underflow coalition behaves like the empty one.
  double total = 0.0;
  for (const PointRef& p : vote.points) {
    const double w = std::exp(-rbf_gamma_ * squared_distance(p->features, task.features));
    const auto label = static_cast<std::size_t>(p->label);
    if (label < classes) proba[label] += w;
    total += w;
  }
  if (total <= 0.0) return uniform();
  for (double& v : proba) v /= total;
  return proba;
}

double Game::evaluate(const TrainedModel& model, const DataPoint& task) const {
  if (const auto* linear = std::get_if<LinearModel>(&model)) {
    const auto* ridge = std::get_if<RidgeParams>(&config_.family);
    const double y = task.label == ridge->positive_label ? 1.0 : -1.0;
    const double margin = y * linear_score(*linear, task);
    switch (config_.utility) {
      case UtilityKind::kAccuracy: return margin > 0.0 ? 1.0 : 0.0;
      case UtilityKind::kConfidence: return sigmoid(margin);
      case UtilityKind::kNegativeLoss: return -ridge->loss_lipschitz * softplus_neg(margin);
    }
    return 0.0;
  }

  const std::vector<double> proba = class_proba(model, task);
  const auto label = static_cast<std::size_t>(task.label);
  const double p_true = task.label >= 0 && label < proba.size() ? proba[label] : 0.0;
  switch (config_.utility) {
    case UtilityKind::kAccuracy: {
      int predicted = config_.default_class;
      const bool empty_vote = std::holds_alternative<NeighborVoteModel>(model) &&
                              std::all_of(proba.begin(), proba.end(), [&](double v) {
                                return v == proba.front();
                              });
      if (!empty_vote) predicted = argmax_or(proba, config_.default_class);
      if (const auto* tm = std::get_if<TreeModel>(&model)) {
        predicted = tm->tree.predict(task.features);
      }
      return predicted == task.label ? 1.0 : 0.0;
    }
    case UtilityKind::kConfidence: return p_true;
    case UtilityKind::kNegativeLoss: return std::log(std::max(p_true, kProbFloor));
  }
  return 0.0;
}

double Game::utility(const Coalition& s, TaskId t) const {
  const DataPoint& point = task(t);
  const ModelHandle model = train(s);
  evaluations_.fetch_add(1);
  return evaluate(*model, point);
}

// ---------------------------------------------------------------------------
// locality

const std::vector<double>& Game::representation(const DataPoint& p) const {
  return p.embedding.empty() ? p.features : p.embedding;
}

std::vector<PointRef> Game::eligible(TaskId t) const {
  const std::optional<PlayerId> proxy = proxy_of(t);
  std::vector<PointRef> out;
  out.reserve(players_.size());
  for (const auto& [id, p] : players_) {
    if (!proxy || id != *proxy) out.push_back(p);
  }
  return out;
}

SupportSet Game::support(TaskId t) const {
  const DataPoint& target = task(t);
  const std::vector<PointRef> pool = eligible(t);
  const std::size_t cap = config_.support_cap;
  std::vector<Scored> scored;
  scored.reserve(pool.size());

  Coalition members;
  if (const auto* wknn = std::get_if<WknnParams>(&config_.family)) {
    for (const PointRef& p : pool) scored.push_back({squared_distance(p->features, target.features), p});
    sort_ascending(scored);
    const auto want = static_cast<std::size_t>(
        std::llround(wknn->support_multiplier * static_cast<double>(wknn->k)));
    members = coalition_of(scored, std::min(want, cap));
  } else if (std::holds_alternative<TreeParams>(config_.family)) {
    if (!universe_tree_) {
      throw Error(ErrorCode::kNotFitted, "tree support requested before fit()");
    }
    const auto leaf = universe_tree_->leaf_of(target.features);
    const auto occupants = universe_tree_->leaf_members(leaf);
    for (const PointRef& p : pool) {
      if (std::binary_search(occupants.begin(), occupants.end(), p->id)) {
        scored.push_back({squared_distance(p->features, target.features), p});
      }
    }
    sort_ascending(scored);
    members = coalition_of(scored, cap);
  } else if (const auto* rbf = std::get_if<RbfParams>(&config_.family)) {
    for (const PointRef& p : pool) {
      const double k = std::exp(-rbf_gamma_ * squared_distance(p->features, target.features));
      if (k >= rbf->relevance_threshold) scored.push_back({k, p});
    }
    sort_descending(scored);
    members = coalition_of(scored, cap);
  } else {
    const auto& ridge = std::get<RidgeParams>(config_.family);
    const auto& psi_t = representation(target);
    for (const PointRef& p : pool) {
      const auto& psi = representation(*p);
      const double dot = std::inner_product(psi.begin(), psi.end(), psi_t.begin(), 0.0);
      scored.push_back({std::abs(dot), p});
    }
    sort_descending(scored);
    members = coalition_of(scored, std::min(ridge.support_k, cap));
  }
  return SupportSet{t, std::move(members), epoch_};
}

ProfileKind Game::natural_profile_kind() const {
  struct Kind {
    ProfileKind operator()(const WknnParams&) const { return ProfileKind::kNeighborWeights; }
    ProfileKind operator()(const TreeParams&) const { return ProfileKind::kDecisionPath; }
    ProfileKind operator()(const RbfParams&) const { return ProfileKind::kKernelRelevance; }
    ProfileKind operator()(const RidgeParams&) const { return ProfileKind::kEmbedding; }
  };
  return std::visit(Kind{}, config_.family);
}

SupportProfile Game::profile(TaskId t) const { return profile(t, natural_profile_kind()); }

SupportProfile Game::profile(TaskId t, ProfileKind kind) const {
  const DataPoint& target = task(t);
  SupportProfile out;
  out.kind = kind;
  out.label = target.label;
  out.universe = epoch_;

  switch (kind) {
    case ProfileKind::kNeighborWeights: {
      const SupportSet n = support(t);
      double total = 0.0;
      for (PlayerId z : n.members.members()) {
        const double d = std::sqrt(squared_distance(player(z).features, target.features));
        const double w = 1.0 / (d + kWeightGuard);
        out.weights.emplace(z, w);
        total += w;
      }
      for (auto& [z, w] : out.weights) w /= total;
      break;
    }
    case ProfileKind::kDecisionPath:
      if (!universe_tree_) {
        throw Error(ErrorCode::kNotFitted, "tree profile requested before fit()");
      }
      out.path = universe_tree_->path(target.features);
      out.tree_id = tree_id_;
      break;
    case ProfileKind::kKernelRelevance:
      for (const PointRef& p : eligible(t)) {
        const double k = std::exp(-rbf_gamma_ * squared_distance(p->features, target.features));
        if (k > 0.0) out.weights.emplace(PlayerId(p->id), k);
      }
      break;
    case ProfileKind::kEmbedding:
      out.vector = representation(target);
      break;
    case ProfileKind::kPpr: {
      if (!graph_) {
        throw Error(ErrorCode::kInvalidArgument, "PPR profile needs an attached graph");
      }
      const std::optional<PlayerId> proxy = proxy_of(t);
      for (const auto& [node, mass] : personalized_pagerank(
               *graph_, target.id, config_.ppr_alpha, config_.ppr_tolerance)) {
        const PlayerId z(node);
        if (players_.contains(z) && (!proxy || z != *proxy)) out.weights.emplace(z, mass);
      }
      break;
    }
  }
  return out;
}

double Game::ridge_norm_bound() const {
  const auto* ridge = std::get_if<RidgeParams>(&config_.family);
  if (!ridge) throw Error(ErrorCode::kInvalidArgument, "game is not a ridge family");
  return ridge->norm_bound();
}

double Game::ridge_task_lipschitz() const {
  const auto* ridge = std::get_if<RidgeParams>(&config_.family);
  if (!ridge) throw Error(ErrorCode::kInvalidArgument, "game is not a ridge family");
  return ridge->task_lipschitz();
}

}  // namespace shapmat

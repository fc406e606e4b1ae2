#include "shapmat/locality/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <vector>

#include "shapmat/core/error.hpp"

namespace shapmat {
namespace {

void require_kind(const SupportProfile& p, const SupportProfile& q, bool ok,
                  const char* what) {
  if (p.kind != q.kind || !ok) {
    throw Error(ErrorCode::kKindMismatch,
                std::string(what) + " needs matching profiles, got " +
                    to_string(p.kind) + " and " + to_string(q.kind));
  }
}

void require_same_universe(const SupportProfile& p, const SupportProfile& q) {
  if (p.universe != q.universe) {
    throw Error(ErrorCode::kUniverseMismatch,
                "profiles computed over universes " + std::to_string(p.universe) +
                    " and " + std::to_string(q.universe));
  }
}

void require_vectors(const SupportProfile& p, const SupportProfile& q) {
  if (p.vector.size() != q.vector.size()) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimensions differ");
  }
}

}  // namespace

void DistanceConfig::validate() const {
  if (!(ppr_alpha > 0.0 && ppr_alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ppr_alpha must lie in (0, 1)");
  }
  if (!(ppr_tolerance > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ppr_tolerance must be > 0");
  }
  if (ppr_max_iterations == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ppr_max_iterations must be >= 1");
  }
  if (lipschitz && !(*lipschitz >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "lipschitz must be >= 0");
  }
  if (label_penalty == LabelPenalty::kAugmented && kind != ProfileKind::kEmbedding) {
    throw Error(ErrorCode::kInvalidArgument,
                "the augmented label penalty applies to embedding profiles only");
  }
}

double weighted_tanimoto(const SupportProfile& p, const SupportProfile& q) {
  require_kind(p, q, is_weight_kind(p.kind), "weighted_tanimoto");
  require_same_universe(p, q);
  double lo = 0.0;
  double hi = 0.0;
  auto a = p.weights.begin();
  auto b = q.weights.begin();
  // Merge walk over the two ordered maps; the sums are order-symmetric.
  while (a != p.weights.end() || b != q.weights.end()) {
    if (b == q.weights.end() || (a != p.weights.end() && a->first < b->first)) {
      hi += a->second;
      ++a;
    } else if (a == p.weights.end() || b->first < a->first) {
      hi += b->second;
      ++b;
    } else {
      lo += std::min(a->second, b->second);
      hi += std::max(a->second, b->second);
      ++a;
      ++b;
    }
  }
  if (hi <= 0.0) return 0.0;
  return std::clamp(1.0 - lo / hi, 0.0, 1.0);
}

double path_jaccard(const SupportProfile& p, const SupportProfile& q) {
  require_kind(p, q, p.kind == ProfileKind::kDecisionPath, "path_jaccard");
  if (p.tree_id != q.tree_id) {
    throw Error(ErrorCode::kTreeMismatch,
                "paths come from trees " + std::to_string(p.tree_id) + " and " +
                    std::to_string(q.tree_id));
  }
  std::vector<std::uint32_t> a(p.path);
  std::vector<std::uint32_t> b(q.path);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  std::vector<std::uint32_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(common));
  const std::size_t uni = a.size() + b.size() - common.size();
  if (uni == 0) return 0.0;
  return 1.0 - static_cast<double>(common.size()) / static_cast<double>(uni);
}

double cosine_distance(const SupportProfile& p, const SupportProfile& q) {
  require_kind(p, q, p.kind == ProfileKind::kEmbedding, "cosine_distance");
  require_vectors(p, q);
  double dot = 0.0;
  double np = 0.0;
  double nq = 0.0;
  for (std::size_t i = 0; i < p.vector.size(); ++i) {
    dot += p.vector[i] * q.vector[i];
    np += p.vector[i] * p.vector[i];
    nq += q.vector[i] * q.vector[i];
  }
  if (np == 0.0 || nq == 0.0) {
    throw Error(ErrorCode::kDegenerateEmbedding, "zero embedding vector");
  }
  const double cos = std::clamp(dot / (std::sqrt(np) * std::sqrt(nq)), -1.0, 1.0);
  return 0.5 * (1.0 - cos);
}

double euclidean_distance(const SupportProfile& p, const SupportProfile& q) {
  require_kind(p, q, p.kind == ProfileKind::kEmbedding, "euclidean_distance");
  require_vectors(p, q);
  return std::sqrt(squared_distance(p.vector, q.vector));
}

std::map<std::uint64_t, double> personalized_pagerank(const Graph& graph,
                                                      std::uint64_t node, double alpha,
                                                      double tolerance,
                                                      std::size_t max_iterations) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "ppr alpha must lie in (0, 1)");
  }
  if (graph.degree(node) == 0) return {{node, 1.0}};

  // Restrict to the connected component of `node`; mass never leaves it.
  std::vector<std::uint64_t> ids{node};
  std::unordered_map<std::uint64_t, std::size_t> index{{node, 0}};
  for (std::size_t head = 0; head < ids.size(); ++head) {
    for (std::uint64_t nb : graph.neighbors.at(ids[head])) {
      if (index.emplace(nb, ids.size()).second) ids.push_back(nb);
    }
  }
  const std::size_t n = ids.size();
  std::vector<std::vector<std::size_t>> adj(n);
  std::vector<double> inv_degree(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint64_t nb : graph.neighbors.at(ids[i])) adj[i].push_back(index.at(nb));
    inv_degree[i] = 1.0 / static_cast<double>(adj[i].size());
  }

  std::vector<double> pi(n, 0.0);
  std::vector<double> next(n);
  pi[0] = 1.0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double share = (1.0 - alpha) * pi[j] * inv_degree[j];
      for (std::size_t i : adj[j]) next[i] += share;
    }
    next[0] += alpha;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (change < tolerance) break;
  }

  std::map<std::uint64_t, double> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (pi[i] > 0.0) out.emplace(ids[i], pi[i]);
  }
  return out;
}

SupportProfile ppr_profile(const Graph& graph, std::uint64_t node, double alpha,
                           double tolerance, std::size_t max_iterations) {
  SupportProfile profile;
  profile.kind = ProfileKind::kPpr;
  for (const auto& [id, mass] :
       personalized_pagerank(graph, node, alpha, tolerance, max_iterations)) {
    profile.weights.emplace(PlayerId(id), mass);
  }
  return profile;
}

double d_gamma(const SupportProfile& p, const SupportProfile& q,
               const DistanceConfig& config) {
  if (p.kind != config.kind || q.kind != config.kind) {
    throw Error(ErrorCode::kKindMismatch,
                std::string("distance configured for ") + to_string(config.kind) +
                    ", got " + to_string(p.kind) + " and " + to_string(q.kind));
  }
  const bool labels_differ = p.label != q.label;
  if (config.label_strict && labels_differ) {
    return std::numeric_limits<double>::infinity();
  }

  double base = 0.0;
  switch (config.kind) {
    case ProfileKind::kNeighborWeights:
    case ProfileKind::kKernelRelevance:
    case ProfileKind::kPpr:
      base = weighted_tanimoto(p, q);
      break;
    case ProfileKind::kDecisionPath:
      base = path_jaccard(p, q);
      break;
    case ProfileKind::kEmbedding:
      base = config.embedding_metric == EmbeddingMetric::kCosine
                 ? cosine_distance(p, q)
                 : euclidean_distance(p, q);
      break;
  }
  if (labels_differ && config.label_penalty == LabelPenalty::kAugmented) base += 1.0;
  return base;
}

}  // namespace shapmat

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>

#include "shapmat/models/data_point.hpp"
#include "shapmat/models/support_profile.hpp"

namespace shapmat {

enum class EmbeddingMetric { kCosine, kEuclidean };

// How differing task labels are treated when label_strict is off.
//   kIgnore     plain base distance
//   kAugmented  base + 1 (embedding profiles only)
enum class LabelPenalty { kIgnore, kAugmented };

struct DistanceConfig {
  ProfileKind kind = ProfileKind::kNeighborWeights;
  bool label_strict = true;
  LabelPenalty label_penalty = LabelPenalty::kIgnore;
  EmbeddingMetric embedding_metric = EmbeddingMetric::kCosine;
  double ppr_alpha = 0.15;
  double ppr_tolerance = 1e-8;
  std::size_t ppr_max_iterations = 10000;
  // Task-side Lipschitz constant of the utility in this distance, if known.
  std::optional<double> lipschitz;

  // Throws kInvalidArgument on out-of-range fields.
  void validate() const;
};

// 1 - sum(min) / sum(max) over the union of keys. Both empty gives 0.
double weighted_tanimoto(const SupportProfile& p, const SupportProfile& q);

// 1 - |P & Q| / |P | Q| over internal node ids. Both empty gives 0.
double path_jaccard(const SupportProfile& p, const SupportProfile& q);

// (1 - cos) / 2 of the two embedding vectors.
double cosine_distance(const SupportProfile& p, const SupportProfile& q);

// Plain L2 distance of the embedding vectors; unbounded.
double euclidean_distance(const SupportProfile& p, const SupportProfile& q);

// Personalized PageRank of `node` on an undirected graph:
//   pi = alpha * e_node + (1 - alpha) * A_col pi
// with A_col the column-normalized adjacency, by power iteration until the
// L1 change drops below `tolerance`. Zero entries are omitted.
std::map<std::uint64_t, double> personalized_pagerank(const Graph& graph,
                                                      std::uint64_t node, double alpha,
                                                      double tolerance,
                                                      std::size_t max_iterations = 10000);

// PPR-kind profile keyed by node id; `universe` is left at 0.
SupportProfile ppr_profile(const Graph& graph, std::uint64_t node, double alpha,
                           double tolerance = 1e-8,
                           std::size_t max_iterations = 10000);

// Kind dispatch plus label handling; +inf when labels are incompatible.
double d_gamma(const SupportProfile& p, const SupportProfile& q,
               const DistanceConfig& config);

}  // namespace shapmat

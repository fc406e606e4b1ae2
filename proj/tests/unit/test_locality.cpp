#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "shapmat/core/error.hpp"
#include "shapmat/locality/distance.hpp"

namespace shapmat {
namespace {

SupportProfile weights(std::map<std::uint64_t, double> w, int label = 0,
                       ProfileKind kind = ProfileKind::kNeighborWeights) {
  SupportProfile p;
  p.kind = kind;
  p.label = label;
  for (auto [k, v] : w) p.weights.emplace(PlayerId(k), v);
  return p;
}

SupportProfile path(std::vector<std::uint32_t> nodes, std::uint64_t tree = 0) {
  SupportProfile p;
  p.kind = ProfileKind::kDecisionPath;
  p.path = std::move(nodes);
  p.tree_id = tree;
  p.label = 0;
  return p;
}

SupportProfile embed(std::vector<double> v, int label = 0) {
  SupportProfile p;
  p.kind = ProfileKind::kEmbedding;
  p.vector = std::move(v);
  p.label = label;
  return p;
}

TEST(WeightedTanimoto, MatchesHandComputation) {
  auto p = weights({{1, 0.5}, {2, 0.5}});
  auto q = weights({{2, 0.25}, {3, 0.75}});
  // min sum 0.25; max sum 0.5 + 0.5 + 0.75.
  EXPECT_NEAR(weighted_tanimoto(p, q), 1.0 - 0.25 / 1.75, 1e-15);
  EXPECT_DOUBLE_EQ(weighted_tanimoto(q, p), weighted_tanimoto(p, q));
  EXPECT_DOUBLE_EQ(weighted_tanimoto(p, p), 0.0);
}

TEST(WeightedTanimoto, EdgeCases) {
  EXPECT_DOUBLE_EQ(weighted_tanimoto(weights({}), weights({})), 0.0);
  EXPECT_DOUBLE_EQ(weighted_tanimoto(weights({{1, 1.0}}), weights({{2, 1.0}})), 1.0);
  auto a = weights({{1, 1.0}});
  auto b = weights({{1, 1.0}});
  b.universe = 4;
  EXPECT_THROW(weighted_tanimoto(a, b), Error);
  EXPECT_THROW(weighted_tanimoto(a, embed({1.0})), Error);
}

TEST(PathJaccard, MatchesHandComputation) {
  EXPECT_DOUBLE_EQ(path_jaccard(path({0, 1, 3}), path({0, 1, 4})), 0.5);
  EXPECT_DOUBLE_EQ(path_jaccard(path({}), path({})), 0.0);
  EXPECT_DOUBLE_EQ(path_jaccard(path({0}), path({0})), 0.0);
  try {
    path_jaccard(path({0}, 1), path({0}, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTreeMismatch);
  }
}

TEST(CosineDistance, RangeAndDegenerate) {
  EXPECT_NEAR(cosine_distance(embed({1, 0}), embed({0, 1})), 0.5, 1e-15);
  EXPECT_NEAR(cosine_distance(embed({1, 0}), embed({-2, 0})), 1.0, 1e-15);
  EXPECT_NEAR(cosine_distance(embed({1, 1}), embed({2, 2})), 0.0, 1e-15);
  try {
    cosine_distance(embed({0, 0}), embed({1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateEmbedding);
  }
  EXPECT_THROW(cosine_distance(embed({1}), embed({1, 0})), Error);
}

TEST(EuclideanDistance, PlainNorm) {
  EXPECT_DOUBLE_EQ(euclidean_distance(embed({0, 0}), embed({3, 4})), 5.0);
}

TEST(Ppr, MatchesLinearSolveOnPath) {
  // Path 0 - 1 - 2.
  Graph g;
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  const double alpha = 0.15;
  auto pi = personalized_pagerank(g, 0, alpha, 1e-14, 100000);
  auto exact = oracle::exact_ppr({{1}, {0, 2}, {1}}, 0, alpha);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(pi.at(i), exact[i], 1e-12);
  double total = 0;
  for (auto& [k, v] : pi) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Ppr, MatchesLinearSolveOnTriangleWithTail) {
  Graph g;
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  g.add_edge(2, 3);
  auto pi = personalized_pagerank(g, 3, 0.3, 1e-14, 100000);
  auto exact = oracle::exact_ppr({{1, 2}, {0, 2}, {1, 0, 3}, {2}}, 3, 0.3);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pi.at(i), exact[i], 1e-12);
}

TEST(Ppr, IsolatedNodeAndOtherComponents) {
  Graph g;
  g.add_node(7);
  g.add_edge(1, 2);
  auto pi = personalized_pagerank(g, 7, 0.15, 1e-8);
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_DOUBLE_EQ(pi.at(7), 1.0);
  auto other = personalized_pagerank(g, 1, 0.15, 1e-10);
  EXPECT_FALSE(other.contains(7));
  EXPECT_THROW(personalized_pagerank(g, 1, 1.0, 1e-8), Error);
}

TEST(Ppr, ProfileHasPprKind) {
  Graph g;
  g.add_edge(0, 1);
  auto p = ppr_profile(g, 0, 0.5);
  EXPECT_EQ(p.kind, ProfileKind::kPpr);
  EXPECT_EQ(p.weights.size(), 2u);
}

TEST(DGamma, LabelStrictGivesInfinity) {
  DistanceConfig cfg;
  auto a = weights({{1, 1.0}}, 0);
  auto b = weights({{1, 1.0}}, 1);
  EXPECT_TRUE(std::isinf(d_gamma(a, b, cfg)));
  cfg.label_strict = false;
  EXPECT_DOUBLE_EQ(d_gamma(a, b, cfg), 0.0);
}

TEST(DGamma, AugmentedPenaltyForEmbeddings) {
  DistanceConfig cfg;
  cfg.kind = ProfileKind::kEmbedding;
  cfg.label_strict = false;
  cfg.label_penalty = LabelPenalty::kAugmented;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_NEAR(d_gamma(embed({1, 0}, 0), embed({0, 1}, 1), cfg), 1.5, 1e-15);
  EXPECT_NEAR(d_gamma(embed({1, 0}, 0), embed({0, 1}, 0), cfg), 0.5, 1e-15);
  cfg.embedding_metric = EmbeddingMetric::kEuclidean;
  EXPECT_NEAR(d_gamma(embed({0, 0}, 0), embed({3, 4}, 0), cfg), 5.0, 1e-15);
}

TEST(DGamma, KindDispatchAndMismatch) {
  DistanceConfig cfg;
  cfg.kind = ProfileKind::kDecisionPath;
  EXPECT_DOUBLE_EQ(d_gamma(path({0, 2}), path({0, 1}), cfg), 1.0 - 1.0 / 3.0);
  EXPECT_THROW(d_gamma(weights({}), weights({}), cfg), Error);
  cfg.kind = ProfileKind::kPpr;
  auto p = weights({{1, 0.5}}, 0, ProfileKind::kPpr);
  EXPECT_DOUBLE_EQ(d_gamma(p, p, cfg), 0.0);
}

TEST(DistanceConfig, Validation) {
  DistanceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.ppr_alpha = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = DistanceConfig{};
  cfg.label_penalty = LabelPenalty::kAugmented;  // not an embedding kind
  EXPECT_THROW(cfg.validate(), Error);
  cfg = DistanceConfig{};
  cfg.lipschitz = -1.0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(DGamma, TriangleInequalityOnRandomWeights) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DistanceConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    SupportProfile p[3];
    for (auto& x : p) {
      x.label = 0;
      for (std::uint64_t k = 0; k < 6; ++k)
        if (u(rng) < 0.6) x.weights.emplace(PlayerId(k), u(rng));
    }
    const double ab = d_gamma(p[0], p[1], cfg), bc = d_gamma(p[1], p[2], cfg),
                 ac = d_gamma(p[0], p[2], cfg);
    EXPECT_LE(ac, ab + bc + 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

}  // namespace
}  // namespace shapmat

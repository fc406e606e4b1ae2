#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "shapmat/models/data_point.hpp"
#include "shapmat/models/model_family.hpp"

namespace shapmat {

// Axis-aligned Gini CART. Nodes are numbered in preorder from 0 (the root).
// Leaves remember the ids of the training records that reached them so the
// fitted tree can answer "who shares my leaf".
class DecisionTree {
 public:
  // An empty training set yields a single leaf predicting `default_class`
  // with a uniform class distribution.
  static DecisionTree fit(std::span<const DataPoint* const> points,
                          const TreeParams& params, int num_classes,
                          int default_class);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t depth() const;

  std::uint32_t leaf_of(const std::vector<double>& x) const;
  // Internal nodes visited from the root to the leaf; empty for a lone leaf.
  std::vector<std::uint32_t> path(const std::vector<double>& x) const;
  std::span<const std::uint64_t> leaf_members(std::uint32_t leaf) const;

  std::span<const double> proba(const std::vector<double>& x) const;
  int predict(const std::vector<double>& x) const;

 private:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    std::size_t depth = 0;
    std::vector<double> proba;
    int prediction = 0;
    std::vector<std::uint64_t> members;
  };

  std::uint32_t grow(std::vector<const DataPoint*>& points, std::size_t depth,
                     const TreeParams& params, int num_classes, int default_class);

  std::vector<Node> nodes_;
};

}  // namespace shapmat

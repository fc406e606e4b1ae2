#include "shapmat/models/decision_tree.hpp"

#include <algorithm>
#include <limits>

namespace shapmat {
namespace {

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += (c / total) * (c / total);
  return 1.0 - sum_sq;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

}  // namespace

DecisionTree DecisionTree::fit(std::span<const DataPoint* const> points,
                               const TreeParams& params, int num_classes,
                               int default_class) {
  DecisionTree tree;
  std::vector<const DataPoint*> work(points.begin(), points.end());
  // Fixed record order makes split search independent of caller order.
  std::sort(work.begin(), work.end(),
            [](const DataPoint* a, const DataPoint* b) { return a->id < b->id; });
  tree.grow(work, 0, params, num_classes, default_class);
  return tree;
}

std::uint32_t DecisionTree::grow(std::vector<const DataPoint*>& points,
                                 std::size_t depth, const TreeParams& params,
                                 int num_classes, int default_class) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_[index].depth = depth;

  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (const DataPoint* p : points) counts[static_cast<std::size_t>(p->label)] += 1.0;
  const double total = static_cast<double>(points.size());
  {
    Node& node = nodes_[index];
    for (const DataPoint* p : points) node.members.push_back(p->id);
    if (points.empty()) {
      node.proba.assign(counts.size(), 1.0 / static_cast<double>(num_classes));
      node.prediction = default_class;
    } else {
      node.proba.resize(counts.size());
      for (std::size_t c = 0; c < counts.size(); ++c) node.proba[c] = counts[c] / total;
      node.prediction = static_cast<int>(
          std::max_element(counts.begin(), counts.end()) - counts.begin());
    }
  }

  const double parent = gini(counts, total);
  if (depth >= params.max_depth || points.size() < 2 * params.min_leaf ||
      parent <= 0.0) {
    return index;
  }

  Split best;
  const std::size_t dims = points.front()->features.size();
  for (std::size_t f = 0; f < dims; ++f) {
    std::vector<const DataPoint*> sorted(points);
    std::stable_sort(sorted.begin(), sorted.end(),
                     [f](const DataPoint* a, const DataPoint* b) {
                       return a->features[f] < b->features[f];
                     });
    std::vector<double> left(counts.size(), 0.0);
    std::vector<double> right(counts);
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
      const auto c = static_cast<std::size_t>(sorted[i]->label);
      left[c] += 1.0;
      right[c] -= 1.0;
      const double lo = sorted[i]->features[f];
      const double hi = sorted[i + 1]->features[f];
      const std::size_t n_left = i + 1;
      const std::size_t n_right = sorted.size() - n_left;
      if (lo == hi || n_left < params.min_leaf || n_right < params.min_leaf) continue;
      const double nl = static_cast<double>(n_left);
      const double nr = static_cast<double>(n_right);
      const double impurity = (nl * gini(left, nl) + nr * gini(right, nr)) / total;
      if (impurity < best.impurity - 1e-12) {
        best = Split{static_cast<int>(f), 0.5 * (lo + hi), impurity};
      }
    }
  }
  if (best.feature < 0 || best.impurity >= parent - 1e-12) return index;

  std::vector<const DataPoint*> lhs;
  std::vector<const DataPoint*> rhs;
  for (const DataPoint* p : points) {
    (p->features[static_cast<std::size_t>(best.feature)] <= best.threshold ? lhs : rhs)
        .push_back(p);
  }
  nodes_[index].feature = best.feature;
  nodes_[index].threshold = best.threshold;
  nodes_[index].members.clear();
  const std::uint32_t l = grow(lhs, depth + 1, params, num_classes, default_class);
  const std::uint32_t r = grow(rhs, depth + 1, params, num_classes, default_class);
  nodes_[index].left = l;
  nodes_[index].right = r;
  return index;
}

std::size_t DecisionTree::depth() const {
  std::size_t d = 0;
  for (const Node& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::uint32_t DecisionTree::leaf_of(const std::vector<double>& x) const {
  std::uint32_t i = 0;
  while (nodes_[i].feature >= 0) {
    const Node& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return i;
}

std::vector<std::uint32_t> DecisionTree::path(const std::vector<double>& x) const {
  std::vector<std::uint32_t> out;
  std::uint32_t i = 0;
  while (nodes_[i].feature >= 0) {
    out.push_back(i);
    const Node& n = nodes_[i];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return out;
}

std::span<const std::uint64_t> DecisionTree::leaf_members(std::uint32_t leaf) const {
  return nodes_.at(leaf).members;
}

std::span<const double> DecisionTree::proba(const std::vector<double>& x) const {
  return nodes_[leaf_of(x)].proba;
}

int DecisionTree::predict(const std::vector<double>& x) const {
  return nodes_[leaf_of(x)].prediction;
}

}  // namespace shapmat

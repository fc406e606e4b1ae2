#include "shapmat/models/data_point.hpp"

#include <algorithm>

#include "shapmat/core/error.hpp"

namespace shapmat {

void Graph::add_edge(std::uint64_t a, std::uint64_t b) {
  if (a == b) return;
  auto& na = neighbors[a];
  if (std::find(na.begin(), na.end(), b) == na.end()) na.push_back(b);
  auto& nb = neighbors[b];
  if (std::find(nb.begin(), nb.end(), a) == nb.end()) nb.push_back(a);
}

std::size_t Graph::degree(std::uint64_t a) const {
  auto it = neighbors.find(a);
  return it == neighbors.end() ? 0 : it->second.size();
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "feature dimensions differ");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace shapmat

#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace shapmat {

// One labelled record. The same type describes players and tasks; `id` is
// the record id from the dataset, which becomes a PlayerId or TaskId.
struct DataPoint {
  std::uint64_t id = 0;
  std::vector<double> features;
  int label = 0;
  std::vector<double> embedding;  // empty when the dataset has none
};

// Undirected graph over record ids.
struct Graph {
  std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> neighbors;

  void add_edge(std::uint64_t a, std::uint64_t b);
  void add_node(std::uint64_t a) { neighbors.try_emplace(a); }
  std::size_t degree(std::uint64_t a) const;
};

double squared_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace shapmat

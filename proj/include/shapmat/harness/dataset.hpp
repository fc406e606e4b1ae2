#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shapmat/models/data_point.hpp"

namespace shapmat {

struct Dataset {
  std::vector<DataPoint> points;  // file order
  std::optional<Graph> graph;
};

// Records with header `id,label,f1..fd[,e1..ek]`. Throws ParseError naming
// the offending line (the header is line 1).
std::vector<DataPoint> read_points(std::istream& in);
void write_points(std::ostream& out, const std::vector<DataPoint>& points);

// Undirected edge list with header `src,dst`.
Graph read_edges(std::istream& in);
void write_edges(std::ostream& out, const Graph& graph);

Dataset load_dataset(const std::string& points_path,
                     const std::optional<std::string>& edges_path = std::nullopt);
void save_points(const std::string& path, const std::vector<DataPoint>& points);
void save_edges(const std::string& path, const Graph& graph);

struct BlobSpec {
  std::size_t classes = 3;
  std::size_t per_class = 20;
  std::size_t dims = 2;
  // Distance of class centers from the origin; centers sit on a circle in
  // the first two dimensions.
  double separation = 3.0;
  double spread = 1.0;
  // Embedding coordinates: the leading features plus small noise, zero
  // padded past the feature count.
  std::size_t embed_dims = 0;
  // When set, generation stops after this many records (at most
  // classes * per_class).
  std::optional<std::size_t> total;
  std::uint64_t seed = 0;

  void validate() const;
};

// Ids are 0.. in class-interleaved order.
std::vector<DataPoint> make_blobs(const BlobSpec& spec);

// Ring over the given ids; with chord_stride > 1 every node also links to the
// node that many steps ahead.
Graph ring_graph(const std::vector<std::uint64_t>& ids, std::size_t chord_stride = 0);

}  // namespace shapmat

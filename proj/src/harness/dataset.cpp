#include "shapmat/harness/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "shapmat/core/error.hpp"
#include "shapmat/core/matrix_io.hpp"
#include "shapmat/estimators/rng.hpp"

namespace shapmat {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::uint64_t parse_id(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "bad id '" + s + "'");
  }
  return v;
}

int parse_label(const std::string& s, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || v < 0) {
    throw ParseError(line, "bad label '" + s + "'");
  }
  return v;
}

double parse_real(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, "bad number '" + s + "'");
  }
}

// Checks `prefix1..prefixN` starting at column `from`; returns N.
std::size_t numbered_run(const std::vector<std::string>& header, std::size_t from, char prefix) {
  std::size_t count = 0;
  while (from + count < header.size() &&
         header[from + count] == std::string(1, prefix) + std::to_string(count + 1)) {
    ++count;
  }
  return count;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write '" + path + "'");
  return out;
}

}  // namespace

std::vector<DataPoint> read_points(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "id" || header[1] != "label") {
    throw ParseError(1, "header must start with 'id,label'");
  }
  const std::size_t d = numbered_run(header, 2, 'f');
  if (d == 0) throw ParseError(1, "header declares no feature columns f1..fd");
  const std::size_t k = numbered_run(header, 2 + d, 'e');
  if (2 + d + k != header.size()) {
    throw ParseError(1, "unexpected column '" + header[2 + d + k] + "'");
  }

  std::vector<DataPoint> points;
  std::set<std::uint64_t> ids;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(number, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(cells.size()));
    }
    DataPoint p;
    p.id = parse_id(cells[0], number);
    if (!ids.insert(p.id).second) {
      throw ParseError(number, "duplicate id " + std::to_string(p.id));
    }
    p.label = parse_label(cells[1], number);
    for (std::size_t i = 0; i < d; ++i) p.features.push_back(parse_real(cells[2 + i], number));
    for (std::size_t i = 0; i < k; ++i) p.embedding.push_back(parse_real(cells[2 + d + i], number));
    points.push_back(std::move(p));
  }
  return points;
}

void write_points(std::ostream& out, const std::vector<DataPoint>& points) {
  const std::size_t d = points.empty() ? 0 : points.front().features.size();
  const std::size_t k = points.empty() ? 0 : points.front().embedding.size();
  out << "id,label";
  for (std::size_t i = 1; i <= d; ++i) out << ",f" << i;
  for (std::size_t i = 1; i <= k; ++i) out << ",e" << i;
  out << '\n';
  for (const DataPoint& p : points) {
    if (p.features.size() != d || p.embedding.size() != k) {
      throw Error(ErrorCode::kInvalidArgument, "records have differing widths");
    }
    out << p.id << ',' << p.label;
    for (double v : p.features) out << ',' << format_double(v);
    for (double v : p.embedding) out << ',' << format_double(v);
    out << '\n';
  }
}

Graph read_edges(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = split(line);
  if (header != std::vector<std::string>{"src", "dst"}) {
    throw ParseError(1, "edge header must be 'src,dst'");
  }
  Graph g;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() != 2) throw ParseError(number, "expected 2 fields");
    const auto a = parse_id(cells[0], number);
    const auto b = parse_id(cells[1], number);
    g.add_node(a);
    g.add_node(b);
    g.add_edge(a, b);
  }
  return g;
}

void write_edges(std::ostream& out, const Graph& graph) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;
  for (const auto& [a, nbs] : graph.neighbors) {
    for (std::uint64_t b : nbs) {
      if (a < b) edges.emplace_back(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  out << "src,dst\n";
  for (const auto& [a, b] : edges) out << a << ',' << b << '\n';
}

Dataset load_dataset(const std::string& points_path,
                     const std::optional<std::string>& edges_path) {
  Dataset ds;
  auto in = open_in(points_path);
  ds.points = read_points(in);
  if (edges_path) {
    auto ein = open_in(*edges_path);
    ds.graph = read_edges(ein);
  }
  return ds;
}

void save_points(const std::string& path, const std::vector<DataPoint>& points) {
  auto out = open_out(path);
  write_points(out, points);
}

void save_edges(const std::string& path, const Graph& graph) {
  auto out = open_out(path);
  write_edges(out, graph);
}

void BlobSpec::validate() const {
  if (classes < 1 || per_class < 1 || dims < 1) {
    throw Error(ErrorCode::kInvalidArgument, "blobs need classes, per_class, dims >= 1");
  }
  if (total && (*total < 1 || *total > classes * per_class)) {
    throw Error(ErrorCode::kInvalidArgument, "blobs total must lie in [1, classes * per_class]");
  }
  if (!(separation >= 0.0) || !(spread > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "blobs need separation >= 0 and spread > 0");
  }
}

std::vector<DataPoint> make_blobs(const BlobSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(splitmix64(spec.seed));
  std::normal_distribution<double> noise(0.0, spec.spread);
  std::vector<std::vector<double>> centers(spec.classes, std::vector<double>(spec.dims, 0.0));
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                         static_cast<double>(spec.classes);
    centers[c][0] = spec.separation * std::cos(angle);
    if (spec.dims > 1) centers[c][1] = spec.separation * std::sin(angle);
  }
  std::vector<DataPoint> points;
  points.reserve(spec.classes * spec.per_class);
  for (std::size_t i = 0; i < spec.per_class; ++i) {
    for (std::size_t c = 0; c < spec.classes; ++c) {
      if (spec.total && points.size() == *spec.total) return points;
      DataPoint p;
      p.id = points.size();
      p.label = static_cast<int>(c);
      for (std::size_t j = 0; j < spec.dims; ++j) p.features.push_back(centers[c][j] + noise(rng));
      for (std::size_t j = 0; j < spec.embed_dims; ++j) {
        const double base = j < spec.dims ? p.features[j] : 0.0;
        p.embedding.push_back(base + 0.1 * noise(rng));
      }
      points.push_back(std::move(p));
    }
  }
  return points;
}

Graph ring_graph(const std::vector<std::uint64_t>& ids, std::size_t chord_stride) {
  Graph g;
  const std::size_t n = ids.size();
  for (std::uint64_t id : ids) g.add_node(id);
  if (n < 2) return g;
  for (std::size_t i = 0; i < n; ++i) {
    g.add_edge(ids[i], ids[(i + 1) % n]);
    if (chord_stride > 1 && chord_stride < n) g.add_edge(ids[i], ids[(i + chord_stride) % n]);
  }
  return g;
}

}  // namespace shapmat

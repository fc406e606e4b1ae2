#include "shapmat/core/matrix_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "shapmat/core/error.hpp"

namespace shapmat {
namespace {

constexpr const char* kAnchorPrefix = "#anchor_order=";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::uint64_t parse_id(const std::string& text, std::size_t line) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(line, "bad id '" + text + "'");
  }
  return v;
}

double parse_cell(const std::string& text, std::size_t line) {
  // strtod round-trips %.17g output exactly.
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ParseError(line, "bad cell '" + text + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_matrix(std::ostream& os, const ShapleyMatrix& m) {
  os << kAnchorPrefix;
  const auto anchors = m.anchor_order();
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    if (a) os << ',';
    os << anchors[a].value();
  }
  os << '\n' << "player";
  for (TaskId t : m.tasks()) {
    os << ',' << t.value();
    if (m.is_anchor(t)) os << '*';
  }
  os << '\n';
  for (PlayerId z : m.players()) {
    os << z.value();
    for (TaskId t : m.tasks()) {
      const auto v = m.get(z, t);
      os << ',' << (v ? format_double(*v) : std::string("NA"));
    }
    os << '\n';
  }
}

ShapleyMatrix read_matrix(std::istream& is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line) || line.rfind(kAnchorPrefix, 0) != 0) {
    throw ParseError(lineno, "expected anchor_order header");
  }
  std::vector<TaskId> anchor_order;
  const std::string anchor_list = line.substr(std::string(kAnchorPrefix).size());
  if (!anchor_list.empty()) {
    for (const auto& tok : split(anchor_list, ',')) {
      anchor_order.emplace_back(parse_id(tok, lineno));
    }
  }

  ++lineno;
  if (!std::getline(is, line)) throw ParseError(lineno, "missing task header");
  auto header = split(line, ',');
  if (header.empty() || header[0] != "player") {
    throw ParseError(lineno, "task header must start with 'player'");
  }
  std::vector<TaskId> tasks;
  std::vector<bool> starred;
  for (std::size_t j = 1; j < header.size(); ++j) {
    std::string tok = header[j];
    const bool star = !tok.empty() && tok.back() == '*';
    if (star) tok.pop_back();
    tasks.emplace_back(parse_id(tok, lineno));
    starred.push_back(star);
  }

  std::vector<PlayerId> players;
  std::vector<std::vector<std::optional<double>>> rows;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != tasks.size() + 1) {
      throw ParseError(lineno, "expected " + std::to_string(tasks.size() + 1) +
                                   " cells, found " + std::to_string(cells.size()));
    }
    players.emplace_back(parse_id(cells[0], lineno));
    std::vector<std::optional<double>> row;
    for (std::size_t j = 1; j < cells.size(); ++j) {
      if (cells[j] == "NA") {
        row.emplace_back(std::nullopt);
      } else {
        row.emplace_back(parse_cell(cells[j], lineno));
      }
    }
    rows.push_back(std::move(row));
  }

  ShapleyMatrix m;
  for (PlayerId z : players) m.append_row(z);
  for (std::size_t j = 0; j < tasks.size(); ++j) {
    ValueColumn col;
    col.task = tasks[j];
    std::optional<PlayerId> proxy;
    for (std::size_t i = 0; i < players.size(); ++i) {
      const auto& cell = rows[i][j];
      if (!cell) {
        if (proxy) throw ParseError(0, "task has more than one NA cell");
        proxy = players[i];
      } else if (*cell != 0.0 || std::signbit(*cell)) {
        col.entries[players[i]] = *cell;
      }
    }
    m.append_column(col, false, proxy);
  }
  for (TaskId a : anchor_order) {
    if (!m.has_task(a) || !starred[m.task_index(a)]) {
      throw ParseError(1, "anchor " + std::to_string(a.value()) +
                              " is not a starred column");
    }
    m.promote_to_anchor(a);
  }
  if (m.anchor_order().size() !=
      static_cast<std::size_t>(std::count(starred.begin(), starred.end(), true))) {
    throw ParseError(2, "starred columns disagree with anchor_order");
  }
  return m;
}

void save_matrix(const std::filesystem::path& path, const ShapleyMatrix& m) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kNotFound, "cannot write " + path.string());
  write_matrix(os, m);
}

ShapleyMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kNotFound, "cannot read " + path.string());
  return read_matrix(is);
}

}  // namespace shapmat

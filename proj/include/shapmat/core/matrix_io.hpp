#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "shapmat/core/shapley_matrix.hpp"

namespace shapmat {

// Text grid format:
//
//   #anchor_order=<id>,<id>,...
//   player,<task>[*],<task>[*],...
//   <player>,<cell>,<cell>,...
//
// `*` marks anchor columns. Cells are printed with 17 significant digits so a
// save/load round trip is exact; ABSENT cells are written as `NA` and a loaded
// `NA` re-establishes the proxy relation of its task. Labels are not part of
// the grid; they live in the metadata sidecar.
void write_matrix(std::ostream& os, const ShapleyMatrix& m);
ShapleyMatrix read_matrix(std::istream& is);

void save_matrix(const std::filesystem::path& path, const ShapleyMatrix& m);
ShapleyMatrix load_matrix(const std::filesystem::path& path);

std::string format_double(double value);

}  // namespace shapmat

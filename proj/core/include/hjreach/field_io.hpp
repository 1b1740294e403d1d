#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hjreach/grid.hpp"
#include "hjreach/value_function.hpp"

namespace hjreach {

// Field dump: one line of JSON describing the grid, then the samples as raw
// little-endian float64 in row-major order. Round-trips bit-exactly.
void write_field(std::ostream& out, const ScalarField& field);
ScalarField read_field(std::istream& in);
void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(const std::filesystem::path& path);

// JSON text for the grid part of a dump header (also embedded in manifests).
std::string grid_header_json(const GridSpec& grid);

// Value-function dump: `manifest.json` (grid, times, file list, convergence
// flag) plus one field dump per stored time. Existing files are overwritten.
void write_value_function(const std::filesystem::path& dir, const ValueFunction& vf);
ValueFunction read_value_function(const std::filesystem::path& dir);

}  // namespace hjreach

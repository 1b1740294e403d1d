#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hjreach/grid.hpp"

namespace hjreach::cli {

using Mask = std::vector<std::uint8_t>;

// Grows a node mask by `cells` nodes along every axis (box neighbourhood),
// wrapping on periodic axes.
Mask dilate(const GridSpec& grid, const Mask& mask, std::size_t cells);

struct SetComparison {
  std::size_t count_a = 0;
  std::size_t count_b = 0;
  std::size_t a_minus_b = 0;
  std::size_t b_minus_a = 0;
  std::size_t band_cells = 1;
  // Nodes of A \ B farther than band_cells from B, and vice versa.
  std::size_t a_outside_b_band = 0;
  std::size_t b_outside_a_band = 0;

  std::size_t symmetric_difference() const noexcept { return a_minus_b + b_minus_a; }
  bool a_within_b() const noexcept { return a_outside_b_band == 0; }
  bool b_within_a() const noexcept { return b_outside_a_band == 0; }
};

SetComparison compare_sets(const GridSpec& grid, const Mask& a, const Mask& b,
                           std::size_t band_cells = 1);

std::string to_json(const SetComparison& c, double t);

}  // namespace hjreach::cli

#include "hjreach_cli/compare.hpp"

#include <nlohmann/json.hpp>

#include "hjreach/error.hpp"

namespace hjreach::cli {

Mask dilate(const GridSpec& grid, const Mask& mask, std::size_t cells) {
  if (mask.size() != grid.size()) throw UsageError("mask size does not match the grid");
  Mask cur = mask, next(mask.size());
  for (std::size_t d = 0; d < grid.ndim(); ++d) {
    const Axis& a = grid.axis(d);
    const std::size_t stride = grid.stride(d);
    for (std::size_t k = 0; k < cur.size(); ++k) {
      const std::size_t i = (k / stride) % a.count;
      const std::size_t base = k - i * stride;
      std::uint8_t v = cur[k];
      for (std::size_t s = 1; s <= cells && !v; ++s) {
        for (int sign : {-1, 1}) {
          std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + sign * static_cast<std::ptrdiff_t>(s);
          const auto n = static_cast<std::ptrdiff_t>(a.count);
          if (a.periodic) {
            j = ((j % n) + n) % n;
          } else if (j < 0 || j >= n) {
            continue;
          }
          if (cur[base + static_cast<std::size_t>(j) * stride]) v = 1;
        }
      }
      next[k] = v;
    }
    cur.swap(next);
  }
  return cur;
}

SetComparison compare_sets(const GridSpec& grid, const Mask& a, const Mask& b,
                           std::size_t band_cells) {
  if (a.size() != grid.size() || b.size() != grid.size()) {
    throw UsageError("mask size does not match the grid");
  }
  SetComparison c;
  c.band_cells = band_cells;
  const Mask da = dilate(grid, a, band_cells), db = dilate(grid, b, band_cells);
  for (std::size_t k = 0; k < a.size(); ++k) {
    c.count_a += a[k];
    c.count_b += b[k];
    if (a[k] && !b[k]) {
      ++c.a_minus_b;
      if (!db[k]) ++c.a_outside_b_band;
    }
    if (b[k] && !a[k]) {
      ++c.b_minus_a;
      if (!da[k]) ++c.b_outside_a_band;
    }
  }
  return c;
}

std::string to_json(const SetComparison& c, double t) {
  nlohmann::ordered_json j;
  j["time_s"] = t;
  j["count_a"] = c.count_a;
  j["count_b"] = c.count_b;
  j["a_minus_b"] = c.a_minus_b;
  j["b_minus_a"] = c.b_minus_a;
  j["symmetric_difference"] = c.symmetric_difference();
  j["band_cells"] = c.band_cells;
  j["a_outside_b_band"] = c.a_outside_b_band;
  j["b_outside_a_band"] = c.b_outside_a_band;
  j["a_within_b"] = c.a_within_b();
  j["b_within_a"] = c.b_within_a();
  return j.dump(2);
}

}  // namespace hjreach::cli

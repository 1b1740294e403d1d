#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hjreach/error.hpp"
#include "hjreach/grid.hpp"

using namespace hjreach;

TEST(Axis, Spacing) {
  EXPECT_DOUBLE_EQ((Axis{0.0, 1.0, 11, false}.spacing()), 0.1);
  EXPECT_DOUBLE_EQ((Axis{-std::numbers::pi, std::numbers::pi, 8, true}.spacing()), std::numbers::pi / 4);
}

TEST(GridSpec, RejectsDegenerateAxes) {
  EXPECT_THROW(GridSpec({{0.0, 1.0, 2, false}}), UsageError);
  EXPECT_THROW(GridSpec({{1.0, 1.0, 5, false}}), UsageError);
  EXPECT_THROW(GridSpec(std::vector<Axis>(8, Axis{0.0, 1.0, 3, false})), UsageError);
  EXPECT_THROW(GridSpec(std::vector<Axis>{}), UsageError);
}

TEST(GridSpec, RowMajorLastFastest) {
  const GridSpec g({{0, 1, 3, false}, {0, 1, 4, false}, {0, 1, 5, false}});
  EXPECT_EQ(g.size(), 60u);
  EXPECT_EQ(g.stride(2), 1u);
  EXPECT_EQ(g.stride(1), 5u);
  EXPECT_EQ(g.stride(0), 20u);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const MultiIndex m = g.unflatten(k);
    EXPECT_EQ(g.flat_index(std::span<const std::size_t>(m.data(), 3)), k);
  }
  const std::vector<std::size_t> bad{0, 4, 0};
  EXPECT_THROW(g.flat_index(bad), UsageError);
}

TEST(GridSpec, WrapPeriodic) {
  const GridSpec g({{-std::numbers::pi, std::numbers::pi, 24, true}});
  EXPECT_NEAR(g.wrap(0, std::numbers::pi + 0.1), -std::numbers::pi + 0.1, 1e-12);
  EXPECT_NEAR(g.wrap(0, -std::numbers::pi - 0.1), std::numbers::pi - 0.1, 1e-12);
}

TEST(ScalarField, ValidatesSamples) {
  const GridSpec g({{0, 1, 3, false}});
  EXPECT_THROW(ScalarField(g, {1.0, 2.0}), UsageError);
  EXPECT_THROW(ScalarField(g, {1.0, NAN, 2.0}), UsageError);
  const ScalarField f(g, {3.0, -1.0, 2.0});
  EXPECT_EQ(f.min(), -1.0);
  EXPECT_EQ(f.max(), 3.0);
}

TEST(Interpolate, ExactAtNodes) {
  const GridSpec g({{0, 2, 5, false}, {-1, 1, 7, false}});
  const ScalarField f = sample_field(g, [](std::span<const double> x) { return std::sin(3 * x[0]) * x[1]; });
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto x = g.node_state(k);
    EXPECT_EQ(interpolate(f, x), f[k]);
  }
}

TEST(Interpolate, ReproducesMultilinearFunctions) {
  const GridSpec g({{0, 2, 5, false}, {-1, 1, 7, false}, {0, 1, 3, false}});
  auto fn = [](std::span<const double> x) { return 1 + 2 * x[0] - x[1] + 0.5 * x[0] * x[1] * x[2]; };
  const ScalarField f = sample_field(g, fn);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> x{2 * u(rng), -1 + 2 * u(rng), u(rng)};
    EXPECT_NEAR(interpolate(f, x), fn(x), 1e-12);
  }
}

TEST(Interpolate, PeriodicSeam) {
  const double pi = std::numbers::pi;
  const GridSpec g({{-pi, pi, 4, true}});
  const ScalarField f(g, {0.0, 1.0, 2.0, 3.0});
  // Between the last node (pi/2) and the wrapped first node (-pi == pi).
  EXPECT_NEAR(interpolate(f, std::vector<double>{0.75 * pi}), 1.5, 1e-12);
  EXPECT_NEAR(interpolate(f, std::vector<double>{-pi + 2 * pi}), 0.0, 1e-12);
}

TEST(Interpolate, FlagsOutOfBounds) {
  const GridSpec g({{0, 1, 3, false}});
  const ScalarField f(g, {0.0, 1.0, 2.0});
  bool oob = false;
  EXPECT_EQ(interpolate(f, std::vector<double>{2.0}, &oob), 2.0);
  EXPECT_TRUE(oob);
  interpolate(f, std::vector<double>{0.5}, &oob);
  EXPECT_FALSE(oob);
  EXPECT_THROW(interpolate(f, std::vector<double>{0.5, 0.5}), UsageError);
  EXPECT_THROW(interpolate(f, std::vector<double>{NAN}), UsageError);
}

TEST(OneSided, BoundaryGhostMatchesInterior) {
  const GridSpec g({{0, 1, 5, false}});
  const ScalarField f = sample_field(g, [](std::span<const double> x) { return x[0] * x[0]; });
  const auto d = one_sided_gradients(f);
  EXPECT_EQ(d.left[0][0], d.right[0][0]);
  EXPECT_EQ(d.left[0][4], d.right[0][4]);
  EXPECT_NEAR(d.right[0][0], (0.0625 - 0.0) / 0.25, 1e-12);
  EXPECT_NEAR(d.left[0][2], (0.25 - 0.0625) / 0.25, 1e-12);
}

TEST(OneSided, LinearFieldExactEverywhere) {
  const GridSpec g({{0, 1, 6, false}, {0, 2, 4, false}});
  const ScalarField f = sample_field(g, [](std::span<const double> x) { return 3 * x[0] - 2 * x[1]; });
  const auto d = one_sided_gradients(f);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(d.left[0][k], 3.0, 1e-12);
    EXPECT_NEAR(d.right[0][k], 3.0, 1e-12);
    EXPECT_NEAR(d.left[1][k], -2.0, 1e-12);
    EXPECT_NEAR(d.right[1][k], -2.0, 1e-12);
  }
}

TEST(OneSided, PeriodicWraps) {
  const GridSpec g({{0, 4, 4, true}});
  const ScalarField f(g, {0.0, 1.0, 4.0, 9.0});
  const auto d = one_sided_gradients(f);
  EXPECT_EQ(d.left[0][0], 0.0 - 9.0);
  EXPECT_EQ(d.right[0][3], 0.0 - 9.0);
}

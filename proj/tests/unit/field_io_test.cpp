#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>

#include "hjreach/error.hpp"
#include "hjreach/field_io.hpp"

using namespace hjreach;

namespace {

ScalarField noisy(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::vector<double> v(g.size());
  for (double& x : v) x = u(rng) / 7.0;
  v[0] = 5e-324;
  v[1] = -0.0;
  return ScalarField(g, std::move(v));
}

bool bit_equal(const ScalarField& a, const ScalarField& b) {
  return a.grid() == b.grid() && a.size() == b.size() &&
         std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(double)) == 0;
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("hjreach_io_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST(FieldIo, StreamRoundTripIsBitExact) {
  const GridSpec g({{-1.5, 2.25, 7, false}, {0, 6.283185307179586, 5, true}, {0.1, 0.3, 3, false}});
  const ScalarField f = noisy(g, 7);
  std::stringstream ss;
  write_field(ss, f);
  EXPECT_TRUE(bit_equal(read_field(ss), f));
}

TEST(FieldIo, HeaderDescribesGrid) {
  const GridSpec g({{-1, 1, 3, false}, {0, 4, 4, true}});
  std::stringstream ss;
  write_field(ss, ScalarField::constant(g, 2.0));
  std::string line;
  std::getline(ss, line);
  const auto h = nlohmann::json::parse(line);
  EXPECT_EQ(h.at("dims"), 2);
  EXPECT_EQ(h.at("counts"), nlohmann::json({3, 4}));
  EXPECT_EQ(h.at("periodic"), nlohmann::json({false, true}));
  EXPECT_EQ(h.at("bounds")[1], nlohmann::json({0.0, 4.0}));
  EXPECT_EQ(h.at("value_count"), 12);
  EXPECT_EQ(h.at("element_type"), "f64le");
  std::string rest((std::istreambuf_iterator<char>(ss)), std::istreambuf_iterator<char>());
  EXPECT_EQ(rest.size(), 12u * 8u);
}

TEST(FieldIo, RejectsDamagedDumps) {
  const GridSpec g({{-1, 1, 3, false}});
  std::stringstream ss;
  write_field(ss, ScalarField::constant(g, 2.0));
  std::string s = ss.str();
  std::stringstream truncated(s.substr(0, s.size() - 3));
  EXPECT_THROW(read_field(truncated), UsageError);
  std::stringstream garbage("not json\n");
  EXPECT_THROW(read_field(garbage), UsageError);
  std::stringstream empty;
  EXPECT_THROW(read_field(empty), UsageError);
}

TEST(FieldIo, ValueFunctionDirectoryRoundTrip) {
  const GridSpec g({{-1, 1, 5, false}, {0, 1, 4, false}});
  ValueFunction vf;
  vf.grid = g;
  vf.times = {-0.30000000000000004, -0.1, 0.0};
  for (unsigned s = 0; s < 3; ++s) vf.fields.push_back(noisy(g, s));
  vf.converged = true;
  const auto dir = scratch("vf");
  write_value_function(dir, vf);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "V_00002.f64"));
  const ValueFunction back = read_value_function(dir);
  EXPECT_EQ(back.grid, vf.grid);
  EXPECT_EQ(back.times, vf.times);
  EXPECT_TRUE(back.converged);
  ASSERT_EQ(back.fields.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_TRUE(bit_equal(back.fields[k], vf.fields[k]));
  EXPECT_THROW(read_value_function(dir / "missing"), UsageError);
  std::filesystem::remove_all(dir);
}

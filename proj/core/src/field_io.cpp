#include "hjreach/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "hjreach/error.hpp"

namespace hjreach {
namespace {

using nlohmann::json;

json grid_json(const GridSpec& grid) {
  json bounds = json::array();
  json counts = json::array();
  json periodic = json::array();
  for (const Axis& a : grid.axes()) {
    bounds.push_back({a.lower, a.upper});
    counts.push_back(a.count);
    periodic.push_back(a.periodic);
  }
  return json{{"dims", grid.ndim()}, {"bounds", bounds}, {"counts", counts}, {"periodic", periodic}};
}

GridSpec grid_from_json(const json& j) {
  try {
    const std::size_t n = j.at("dims").get<std::size_t>();
    const auto& bounds = j.at("bounds");
    const auto& counts = j.at("counts");
    const auto& periodic = j.at("periodic");
    if (bounds.size() != n || counts.size() != n || periodic.size() != n) {
      throw UsageError("grid header arrays disagree with dims");
    }
    std::vector<Axis> axes(n);
    for (std::size_t d = 0; d < n; ++d) {
      axes[d] = Axis{bounds[d].at(0).get<double>(), bounds[d].at(1).get<double>(),
                     counts[d].get<std::size_t>(), periodic[d].get<bool>()};
    }
    return GridSpec(std::move(axes));
  } catch (const json::exception& e) {
    throw UsageError(std::string("malformed grid header: ") + e.what());
  }
}

void put_f64le(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

}  // namespace

std::string grid_header_json(const GridSpec& grid) { return grid_json(grid).dump(); }

void write_field(std::ostream& out, const ScalarField& field) {
  json header = grid_json(field.grid());
  header["value_count"] = field.size();
  header["element_type"] = "f64le";
  out << header.dump() << '\n';
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(field.values().data()),
              static_cast<std::streamsize>(field.size() * sizeof(double)));
  } else {
    for (double v : field.values()) put_f64le(out, v);
  }
  if (!out) throw UsageError("failed writing field dump");
}

ScalarField read_field(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw UsageError("field dump has no header line");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw UsageError(std::string("field dump header is not JSON: ") + e.what());
  }
  if (header.value("element_type", std::string{}) != "f64le") {
    throw UsageError("field dump element_type must be f64le");
  }
  GridSpec grid = grid_from_json(header);
  const std::size_t count = header.at("value_count").get<std::size_t>();
  if (count != grid.size()) throw UsageError("field dump value_count disagrees with grid");
  std::vector<double> values(count);
  std::vector<unsigned char> raw(count * 8);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw UsageError("field dump is truncated");
  }
  for (std::size_t k = 0; k < count; ++k) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{raw[8 * k + i]} << (8 * i);
    values[k] = std::bit_cast<double>(bits);
  }
  return ScalarField(std::move(grid), std::move(values));
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot open " + path.string() + " for writing");
  write_field(out, field);
}

ScalarField read_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  return read_field(in);
}

void write_value_function(const std::filesystem::path& dir, const ValueFunction& vf) {
  std::filesystem::create_directories(dir);
  json files = json::array();
  for (std::size_t k = 0; k < vf.fields.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "V_%05zu.f64", k);
    write_field(dir / name, vf.fields[k]);
    files.push_back(name);
  }
  json manifest{{"grid", grid_json(vf.grid)},
                {"times", vf.times},
                {"files", files},
                {"converged", vf.converged}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  out << manifest.dump(2) << '\n';
  if (!out) throw UsageError("failed writing manifest in " + dir.string());
}

ValueFunction read_value_function(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw UsageError("no manifest.json in " + dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(std::string("manifest is not JSON: ") + e.what());
  }
  ValueFunction vf;
  vf.grid = grid_from_json(manifest.at("grid"));
  vf.times = manifest.at("times").get<std::vector<double>>();
  vf.converged = manifest.value("converged", false);
  const auto files = manifest.at("files").get<std::vector<std::string>>();
  if (files.size() != vf.times.size() || files.empty()) {
    throw UsageError("manifest times/files mismatch");
  }
  for (const auto& f : files) {
    ScalarField field = read_field(dir / f);
    if (!(field.grid() == vf.grid)) throw UsageError(f + ": grid differs from manifest");
    vf.fields.push_back(std::move(field));
  }
  return vf;
}

}  // namespace hjreach

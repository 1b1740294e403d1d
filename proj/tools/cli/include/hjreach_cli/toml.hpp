#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hjreach::cli::toml {

// Subset of TOML: [section] / [dotted.section] headers, key = value pairs,
// strings, integers, floats, booleans, and single-line arrays of scalars.
using Scalar = std::variant<bool, long long, double, std::string>;

struct Value {
  std::variant<bool, long long, double, std::string, std::vector<Scalar>> data;
  std::size_t line = 0;

  bool is_number() const noexcept;
  double as_number() const;  // accepts integers
  long long as_integer() const;
  bool as_bool() const;
  const std::string& as_string() const;
  std::vector<double> as_number_array() const;
};

struct Entry {
  std::string key;
  Value value;
};

struct Table {
  std::string name;  // "" for the root table
  std::size_t line = 0;
  std::vector<Entry> entries;

  const Entry* find(std::string_view key) const noexcept;
};

struct Document {
  std::vector<Table> tables;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Throws ParseError on malformed input or duplicate keys/tables.
Document parse(std::string_view text);

// Shortest text that parses back to the same value.
std::string format_number(double x);
std::string quote(std::string_view s);

}  // namespace hjreach::cli::toml

#include "hjreach_cli/toml.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace hjreach::cli::toml {
namespace {

bool bare_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-';
}

class LineParser {
 public:
  LineParser(std::string_view s, std::size_t line) : s_(s), line_(line) {}

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }
  bool at_end_or_comment() {
    skip_ws();
    return pos_ >= s_.size() || s_[pos_] == '#';
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, msg); }

  std::string key() {
    skip_ws();
    if (peek() == '"') return string();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && bare_key_char(s_[pos_])) ++pos_;
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string dotted_key() {
    std::string out = key();
    for (;;) {
      skip_ws();
      if (peek() != '.') return out;
      ++pos_;
      out += '.';
      out += key();
    }
  }

  std::string string() {
    if (peek() != '"') fail("expected '\"'");
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) fail("unterminated escape");
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
      }
      out += c;
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  Scalar scalar() {
    skip_ws();
    const char c = peek();
    if (c == '"') return string();
    std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '#' &&
           s_[pos_] != ' ' && s_[pos_] != '\t') {
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string digits;
    for (char ch : tok) {
      if (ch != '_') digits += ch;
    }
    if (tok.front() == '+') digits.erase(0, 1);
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                          digits == "-inf" || digits == "nan";
    const char* b = digits.data();
    const char* e = digits.data() + digits.size();
    if (!is_float) {
      long long v = 0;
      auto [p, ec] = std::from_chars(b, e, v);
      if (ec == std::errc() && p == e) return v;
      fail("invalid value '" + tok + "'");
    }
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) fail("invalid value '" + tok + "'");
    return v;
  }

  Value value() {
    skip_ws();
    Value v;
    v.line = line_;
    if (peek() == '[') {
      ++pos_;
      std::vector<Scalar> items;
      skip_ws();
      if (peek() == ']') {
        ++pos_;
      } else {
        for (;;) {
          items.push_back(scalar());
          skip_ws();
          if (peek() == ',') {
            ++pos_;
            skip_ws();
            if (peek() == ']') {
              ++pos_;
              break;
            }
            continue;
          }
          if (peek() == ']') {
            ++pos_;
            break;
          }
          fail("expected ',' or ']' in array");
        }
      }
      v.data = std::move(items);
      return v;
    }
    std::visit([&](auto&& s) { v.data = s; }, scalar());
    return v;
  }

 private:
  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Value::is_number() const noexcept {
  return std::holds_alternative<long long>(data) || std::holds_alternative<double>(data);
}

double Value::as_number() const {
  if (const auto* i = std::get_if<long long>(&data)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&data)) return *d;
  throw ParseError(line, "expected a number");
}

long long Value::as_integer() const {
  if (const auto* i = std::get_if<long long>(&data)) return *i;
  throw ParseError(line, "expected an integer");
}

bool Value::as_bool() const {
  if (const auto* b = std::get_if<bool>(&data)) return *b;
  throw ParseError(line, "expected true or false");
}

const std::string& Value::as_string() const {
  if (const auto* s = std::get_if<std::string>(&data)) return *s;
  throw ParseError(line, "expected a string");
}

std::vector<double> Value::as_number_array() const {
  const auto* arr = std::get_if<std::vector<Scalar>>(&data);
  if (!arr) throw ParseError(line, "expected an array of numbers");
  std::vector<double> out;
  for (const Scalar& s : *arr) {
    if (const auto* i = std::get_if<long long>(&s)) {
      out.push_back(static_cast<double>(*i));
    } else if (const auto* d = std::get_if<double>(&s)) {
      out.push_back(*d);
    } else {
      throw ParseError(line, "expected an array of numbers");
    }
  }
  return out;
}

const Entry* Table::find(std::string_view key) const noexcept {
  for (const Entry& e : entries) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

Document parse(std::string_view text) {
  Document doc;
  doc.tables.push_back({"", 1, {}});
  std::set<std::string> seen_tables;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    LineParser p(line, line_no);
    if (p.at_end_or_comment()) continue;
    if (p.peek() == '[') {
      p.expect('[');
      std::string name = p.dotted_key();
      p.expect(']');
      if (!p.at_end_or_comment()) p.fail("unexpected text after table header");
      if (!seen_tables.insert(name).second) p.fail("duplicate table [" + name + "]");
      doc.tables.push_back({std::move(name), line_no, {}});
      continue;
    }
    std::string key = p.dotted_key();
    p.expect('=');
    Value v = p.value();
    if (!p.at_end_or_comment()) p.fail("unexpected text after value");
    Table& t = doc.tables.back();
    if (t.find(key)) p.fail("duplicate key '" + key + "'");
    t.entries.push_back({std::move(key), std::move(v)});
  }
  return doc;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, p);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

}  // namespace hjreach::cli::toml

#include "spg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spg/error.hpp"

namespace spg {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

class ValueParser {
 public:
  ValueParser(std::string_view s, std::size_t line) : s_(s), line_(line) {}

  ConfigValue parse_all() {
    ConfigValue v = parse_value(true);
    skip_space();
    if (pos_ != s_.size()) fail("trailing characters");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " in value '" + std::string(s_) + "'", line_);
  }

  void skip_space() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  ConfigValue parse_value(bool allow_array) {
    skip_space();
    if (pos_ >= s_.size()) fail("missing value");
    const char c = s_[pos_];
    if (c == '[') {
      if (!allow_array) fail("nested arrays are not supported");
      return parse_array();
    }
    if (c == '"') return parse_string();
    return parse_scalar();
  }

  ConfigValue parse_array() {
    ConfigValue v;
    v.kind = ConfigValue::Kind::Array;
    ++pos_;
    skip_space();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      v.items.push_back(parse_value(false));
      skip_space();
      if (pos_ >= s_.size()) fail("unterminated array");
      if (s_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      fail("expected ',' or ']'");
    }
  }

  ConfigValue parse_string() {
    ConfigValue v;
    v.kind = ConfigValue::Kind::String;
    ++pos_;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      char c = s_[pos_++];
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      v.text.push_back(c);
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return v;
  }

  ConfigValue parse_scalar() {
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ',' && s_[end] != ']' && s_[end] != ' ' &&
           s_[end] != '\t')
      ++end;
    const std::string_view tok = s_.substr(pos_, end - pos_);
    pos_ = end;
    ConfigValue v;
    if (tok == "true" || tok == "false") {
      v.kind = ConfigValue::Kind::Bool;
      v.boolean = tok == "true";
      return v;
    }
    std::string cleaned;
    for (char c : tok)
      if (c != '_') cleaned.push_back(c);
    const char* b = cleaned.data();
    const char* e = b + cleaned.size();
    if (!cleaned.empty() && cleaned[0] == '+') ++b;
    const bool looks_real = cleaned.find_first_of(".eE") != std::string::npos ||
                            cleaned == "inf" || cleaned == "nan";
    if (!looks_real) {
      std::int64_t i = 0;
      auto [p, ec] = std::from_chars(b, e, i);
      if (ec == std::errc() && p == e) {
        v.kind = ConfigValue::Kind::Integer;
        v.integer = i;
        v.real = static_cast<double>(i);
        return v;
      }
    }
    double d = 0.0;
    auto [p, ec] = std::from_chars(b, e, d);
    if (ec != std::errc() || p != e || cleaned.empty()) {
      fail("cannot parse '" + std::string(tok) + "'");
    }
    v.kind = ConfigValue::Kind::Real;
    v.real = d;
    return v;
  }

  std::string_view s_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && in_string) {
      ++i;
      continue;
    }
    if (c == '"') in_string = !in_string;
    if (c == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string format_real(double d) {
  if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
  if (std::isnan(d)) return "nan";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
  std::string s(buf, p);
  if (s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out + "\"";
}

const char* kind_name(ConfigValue::Kind k) {
  switch (k) {
    case ConfigValue::Kind::Bool: return "boolean";
    case ConfigValue::Kind::Integer: return "integer";
    case ConfigValue::Kind::Real: return "number";
    case ConfigValue::Kind::String: return "string";
    default: return "array";
  }
}

[[noreturn]] void type_error(const std::string& key, const char* want,
                             const ConfigValue& v) {
  throw ConfigError("config key '" + key + "': expected " + want + ", got " +
                    kind_name(v.kind));
}

double as_number(const std::string& key, const ConfigValue& v) {
  if (v.kind == ConfigValue::Kind::Integer) return static_cast<double>(v.integer);
  if (v.kind == ConfigValue::Kind::Real) return v.real;
  type_error(key, "number", v);
}

}  // namespace

std::string ConfigValue::describe() const {
  switch (kind) {
    case Kind::Bool: return boolean ? "true" : "false";
    case Kind::Integer: return std::to_string(integer);
    case Kind::Real: return format_real(real);
    case Kind::String: return quote(text);
    default: {
      std::string s = "[";
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) s += ", ";
        s += items[i].describe();
      }
      return s + "]";
    }
  }
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section header", line_no);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_key(section)) throw ParseError("bad section name '" + section + "'", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected 'key = value', got '" + line + "'", line_no);
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    if (!valid_key(key)) throw ParseError("bad key '" + key + "'", line_no);
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.has(full)) throw ParseError("duplicate key '" + full + "'", line_no);
    cfg.values_[full] =
        ValueParser(std::string_view(line).substr(eq + 1), line_no).parse_all();
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const ConfigValue& Config::at(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> k;
  for (const auto& [key, _] : values_) k.push_back(key);
  return k;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (v.kind != ConfigValue::Kind::String) type_error(key, "string", v);
  return v.text;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (v.kind != ConfigValue::Kind::Integer) type_error(key, "integer", v);
  return v.integer;
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::int64_t i = get_int(key, 0);
  if (i < 0) throw ConfigError("config key '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(i);
}

double Config::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  return as_number(key, at(key));
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (v.kind != ConfigValue::Kind::Bool) type_error(key, "boolean", v);
  return v.boolean;
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (v.kind != ConfigValue::Kind::Array) type_error(key, "array", v);
  std::vector<double> out;
  for (const auto& item : v.items) out.push_back(as_number(key, item));
  return out;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             std::vector<std::string> fallback) const {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (v.kind == ConfigValue::Kind::String) return {v.text};
  if (v.kind != ConfigValue::Kind::Array) type_error(key, "array", v);
  std::vector<std::string> out;
  for (const auto& item : v.items) {
    if (item.kind != ConfigValue::Kind::String) type_error(key, "array of strings", item);
    out.push_back(item.text);
  }
  return out;
}

void Config::set(const std::string& key, ConfigValue value) {
  if (!valid_key(key)) throw ConfigError("bad config key '" + key + "'");
  values_[key] = std::move(value);
}

void Config::require_known(const std::vector<std::string>& known) const {
  for (const auto& [key, _] : values_) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

std::string Config::to_string() const {
  // Top-level keys first so that section headers cannot capture them.
  std::string out;
  std::string section;
  for (const auto& [key, v] : values_)
    if (key.find('.') == std::string::npos) out += key + " = " + v.describe() + "\n";
  for (const auto& [key, v] : values_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) continue;
    const std::string s = key.substr(0, dot);
    if (s != section) {
      out += "\n[" + s + "]\n";
      section = s;
    }
    out += key.substr(dot + 1) + " = " + v.describe() + "\n";
  }
  return out;
}

}  // namespace spg

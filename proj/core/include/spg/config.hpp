#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace spg {

/// One value of a key-value config file.
struct ConfigValue {
  enum class Kind { Bool, Integer, Real, String, Array };
  Kind kind = Kind::String;
  bool boolean = false;
  std::int64_t integer = 0;
  double real = 0.0;
  std::string text;
  std::vector<ConfigValue> items;

  std::string describe() const;
};

/// Flat TOML-style configuration:
///
///   # comment
///   schema_version = 1
///   kind = "corruption-sweep"
///   [corruption]
///   mechanisms = ["none", "snowball"]
///   target_error = 0.2
///
/// Keys under a [section] header are stored as "section.key". Supported
/// values: booleans, integers, reals, double-quoted strings and one-level
/// arrays of those. Parse errors throw ParseError; type errors and unknown
/// keys throw ConfigError.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const ConfigValue& at(const std::string& key) const;
  std::vector<std::string> keys() const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key,
                                  std::vector<double> fallback) const;
  std::vector<std::string> get_strings(const std::string& key,
                                       std::vector<std::string> fallback) const;

  void set(const std::string& key, ConfigValue value);

  /// Throws ConfigError naming the first key not in `known`.
  void require_known(const std::vector<std::string>& known) const;

  /// Canonical text form, keys sorted; parse(to_string()) round-trips.
  std::string to_string() const;

 private:
  std::map<std::string, ConfigValue> values_;
};

}  // namespace spg

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "spg/config.hpp"
#include "spg/error.hpp"

using namespace spg;

namespace {

const char* kExample = R"(# comment
schema_version = 1
kind = "corruption-sweep"   # trailing comment
seed = 1_000
[corruption]
mechanisms = ["none", "snowball"]
target_error = 0.2
quiet = false
[rmat]
probs = [0.5, 0.125, 0.125, 0.25]
scale = +10
tag = "a # not a comment \"quoted\""
)";

}  // namespace

TEST(Config, ParsesExample) {
  Config c = Config::parse(kExample);
  EXPECT_EQ(c.get_int("schema_version", 0), 1);
  EXPECT_EQ(c.get_string("kind", ""), "corruption-sweep");
  EXPECT_EQ(c.get_uint("seed", 0), 1000u);
  EXPECT_EQ(c.get_strings("corruption.mechanisms", {}), (std::vector<std::string>{"none", "snowball"}));
  EXPECT_DOUBLE_EQ(c.get_double("corruption.target_error", 0), 0.2);
  EXPECT_FALSE(c.get_bool("corruption.quiet", true));
  EXPECT_EQ(c.get_doubles("rmat.probs", {}), (std::vector<double>{0.5, 0.125, 0.125, 0.25}));
  EXPECT_EQ(c.get_int("rmat.scale", 0), 10);
  EXPECT_DOUBLE_EQ(c.get_double("rmat.scale", 0), 10.0);
  EXPECT_EQ(c.get_string("rmat.tag", ""), "a # not a comment \"quoted\"");
  EXPECT_EQ(c.keys().size(), 9u);
}

TEST(Config, Fallbacks) {
  Config c = Config::parse("");
  EXPECT_EQ(c.get_int("x", 7), 7);
  EXPECT_EQ(c.get_string("x", "d"), "d");
  EXPECT_EQ(c.get_strings("x", {"a"}), std::vector<std::string>{"a"});
  EXPECT_THROW(c.at("x"), ConfigError);
}

TEST(Config, RoundTrip) {
  Config c = Config::parse(kExample);
  c.set("big", [] {
    ConfigValue v;
    v.kind = ConfigValue::Kind::Real;
    v.real = 1e-300;
    return v;
  }());
  const std::string text = c.to_string();
  Config back = Config::parse(text);
  EXPECT_EQ(back.to_string(), text);
  EXPECT_EQ(back.keys(), c.keys());
  EXPECT_EQ(back.get_double("big", 0), 1e-300);
  EXPECT_EQ(back.get_string("rmat.tag", ""), c.get_string("rmat.tag", ""));
}

TEST(Config, RealsRoundTripExactly) {
  for (double d : {0.1, 1.0 / 3.0, 2.5e-17, 123456789.0, -0.0}) {
    Config c;
    ConfigValue v;
    v.kind = ConfigValue::Kind::Real;
    v.real = d;
    c.set("x", v);
    const Config back = Config::parse(c.to_string());
    EXPECT_EQ(back.at("x").kind, ConfigValue::Kind::Real);
    EXPECT_EQ(back.get_double("x", 1), d);
  }
}

TEST(Config, ParseErrorsCarryLine) {
  const std::pair<const char*, std::size_t> bad[] = {
      {"a = 1\nb 2\n", 2},
      {"a = \"open\n", 1},
      {"\n\n[sec\n", 3},
      {"a = [1, [2]]\n", 1},
      {"a = 1\na = 2\n", 2},
      {"a = 1x\n", 1},
      {"a = \n", 1},
      {"b@d = 1\n", 1},
      {"a = [1, 2\n", 1},
      {"a = \"\\q\"\n", 1},
  };
  for (const auto& [text, line] : bad) {
    try {
      Config::parse(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line(), line) << text;
    }
  }
}

TEST(Config, TypeErrors) {
  Config c = Config::parse("a = \"s\"\nb = 1.5\nc = -3\nd = [1, \"x\"]\n");
  EXPECT_THROW(c.get_int("a", 0), ConfigError);
  EXPECT_THROW(c.get_int("b", 0), ConfigError);
  EXPECT_THROW(c.get_uint("c", 0), ConfigError);
  EXPECT_THROW(c.get_bool("b", false), ConfigError);
  EXPECT_THROW(c.get_doubles("d", {}), ConfigError);
  EXPECT_THROW(c.get_strings("d", {}), ConfigError);
  EXPECT_THROW(c.get_string("b", ""), ConfigError);
  EXPECT_EQ(c.get_strings("a", {}), std::vector<std::string>{"s"});
}

TEST(Config, UnknownKeys) {
  Config c = Config::parse("seed = 1\n[rmat]\nscael = 3\n");
  EXPECT_NO_THROW(c.require_known({"seed", "rmat.scael"}));
  try {
    c.require_known({"seed", "rmat.scale"});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rmat.scael"), std::string::npos);
  }
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "spg_config_test.toml";
  {
    std::ofstream out(path);
    out << kExample;
  }
  EXPECT_EQ(Config::load(path).to_string(), Config::parse(kExample).to_string());
  std::filesystem::remove(path);
  EXPECT_THROW(Config::load(path), ConfigError);
}

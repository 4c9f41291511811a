#include <qconc/config.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace qconc;

namespace {

const char* kMinimal = R"({
  "name": "tiny",
  "kind": "training",
  "training": {
    "method": "gd",
    "system_sizes": [4],
    "shots": [10, "infinite"],
    "steps": 5
  }
})";

ConfigError expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for:\n" << text;
  return ConfigError("", "none");
}

}  // namespace

TEST(Config, MinimalTrainingConfigFillsDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.kind, ExperimentKind::training);
  EXPECT_EQ(c.training.ensemble, 20u);
  ASSERT_EQ(c.training.shots.size(), 2u);
  EXPECT_EQ(c.training.shots[0], ShotToken::fixed(10));
  EXPECT_EQ(c.training.shots[1], ShotToken::infinite());
  EXPECT_EQ(c.resolved_output_dir(), "runs/tiny");
  EXPECT_TRUE(c.training.optimizer(4, c.training.shots[1]).shots.is_infinite());
}

TEST(Config, NegativeLearningRateReportsPathAndLine) {
  const std::string text = "{\n  \"kind\": \"training\",\n  \"training\": {\n    \"method\": \"gd\",\n"
                           "    \"learning_rate\": -0.1\n  }\n}\n";
  const auto e = expect_config_error(text);
  EXPECT_EQ(e.path(), "/training/learning_rate");
  EXPECT_EQ(e.line(), 5u);
  EXPECT_EQ(e.column(), 5u);
  EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos);
}

TEST(Config, UnknownKeysRejected) {
  const auto e = expect_config_error(R"({"kind": "training", "training": {"method": "gd", "stpes": 3}})");
  EXPECT_EQ(e.path(), "/training/stpes");
  EXPECT_EQ(expect_config_error(R"({"kind": "hypotest", "bogus": 1})").path(), "/bogus");
}

TEST(Config, StructuralErrors) {
  expect_config_error("{\"kind\": \"training\",");
  expect_config_error(R"({"kind": "training"})");
  expect_config_error(R"({"kind": "quantum"})");
  expect_config_error(R"({"kind": "hypotest", "training": {"method": "gd"}})");
  expect_config_error(R"({"kind": "training", "training": {"method": "adam"}})");
  expect_config_error(R"({"kind": "training", "training": {"method": "gd", "shots": ["lots"]}})");
  expect_config_error(R"({"kind": "training", "training": {"method": "gd", "shots": [0]}})");
  expect_config_error(R"({"kind": "training", "training": {"method": "gd", "steps": 0}})");
  expect_config_error(R"({"kind": "training", "training": {"method": "cvar_gd", "system_sizes": [3]}})");
  expect_config_error(R"({"kind": "concentration", "concentration": {"povms": ["unknown"]}})");
  expect_config_error(R"({"schema_version": 2, "kind": "hypotest", "hypotest": {}})");
  expect_config_error(R"({"kind": "hypotest", "hypotest": {"certificates": [{"beta": 2.0, "cardinality": 2, "shots": 1}]}})");
}

TEST(Config, SyntaxErrorsCarryLocation) {
  const auto e = expect_config_error("{\n  \"kind\": \"training\"\n  \"x\": 1\n}");
  EXPECT_EQ(e.line(), 3u);
}

TEST(Config, ShotTokens) {
  EXPECT_EQ(ShotToken::parse("infinite"), ShotToken::infinite());
  EXPECT_EQ(ShotToken::parse("2^n"), ShotToken::exponential());
  EXPECT_EQ(ShotToken::parse("10n"), ShotToken::linear(10));
  EXPECT_FALSE(ShotToken::parse("0n"));
  EXPECT_FALSE(ShotToken::parse("n"));
  EXPECT_FALSE(ShotToken::parse("inf"));
  EXPECT_EQ(ShotToken::exponential().resolve(15).shots(), 32768u);
  EXPECT_EQ(ShotToken::linear(10).resolve(15).shots(), 150u);
  EXPECT_TRUE(ShotToken::infinite().resolve(15).is_infinite());
  EXPECT_EQ(ShotToken::linear(10).label(), "10n");
  EXPECT_EQ(ShotToken::exponential().label(), "2pown");
}

TEST(Config, NormalizedTextRoundTripsByteForByte) {
  for (const auto& name : preset_names()) {
    const auto text = normalized_config_text(preset(name));
    EXPECT_EQ(normalized_config_text(parse_config(text)), text) << name;
  }
  const auto once = normalized_config_text(parse_config(kMinimal));
  EXPECT_EQ(normalized_config_text(parse_config(once)), once);
}

TEST(Config, PresetsValidate) {
  ASSERT_EQ(preset_names().size(), 7u);
  for (const auto& name : preset_names()) {
    const auto c = preset(name);
    EXPECT_EQ(c.name, name);
    if (c.kind == ExperimentKind::training) {
      for (auto n : c.training.system_sizes) {
        for (const auto& s : c.training.shots) EXPECT_NO_THROW(c.training.optimizer(n, s).validate()) << name;
      }
    }
  }
  EXPECT_THROW(preset("fig5"), ConfigError);
}

TEST(Config, Fig3PresetMatchesExperiment) {
  const auto c = preset("fig3");
  EXPECT_EQ(c.training.system_sizes, std::vector<std::size_t>{15});
  EXPECT_EQ(c.training.ensemble, 100u);
  EXPECT_EQ(c.training.learning_rate, 0.1);
  EXPECT_EQ(c.training.shots[0].resolve(15).shots(), 150u);
  EXPECT_TRUE(c.training.diagnostics.random_walk);
}

TEST(Config, LoadConfigFromFile) {
  const auto dir = std::filesystem::temp_directory_path() / "qconc_config_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "c.json";
  std::ofstream(path) << kMinimal;
  EXPECT_EQ(load_config(path.string()).name, "tiny");
  EXPECT_THROW(load_config((dir / "missing.json").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Config, NormalizedPresetsValidateAgainstSchema) {
  if (std::system("python3 -c 'import jsonschema' >/dev/null 2>&1") != 0) GTEST_SKIP() << "jsonschema unavailable";
  const auto dir = std::filesystem::temp_directory_path() / "qconc_schema_test";
  std::filesystem::create_directories(dir);
  std::string args;
  for (const auto& name : preset_names()) {
    const auto p = dir / (name + ".json");
    std::ofstream(p) << normalized_config_text(preset(name));
    args += " '" + p.string() + "'";
  }
  std::ofstream(dir / "minimal.json") << kMinimal;
  args += " '" + (dir / "minimal.json").string() + "'";
  const auto script = dir / "check.py";
  std::ofstream(script) << "import json, sys, jsonschema\n"
                           "schema = json.load(open(sys.argv[1]))\n"
                           "for p in sys.argv[2:]:\n"
                           "    jsonschema.validate(json.load(open(p)), schema)\n"
                           "bad = {'kind': 'training', 'training': {'method': 'gd', 'learning_rate': -1}}\n"
                           "try:\n"
                           "    jsonschema.validate(bad, schema)\n"
                           "    sys.exit(3)\n"
                           "except jsonschema.ValidationError:\n"
                           "    pass\n";
  const std::string cmd = "python3 '" + script.string() + "' '" + QCONC_SCHEMA_PATH + "'" + args;
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  std::filesystem::remove_all(dir);
}

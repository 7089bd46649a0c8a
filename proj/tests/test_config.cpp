#include <algorithm>

#include <gtest/gtest.h>

#include "skg/config.hpp"

using namespace skg;

namespace {

std::vector<std::string> violations_of(const std::string& text,
                                       const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides);
  } catch (const ConfigError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

}  // namespace

TEST(Config, DefaultsApply) {
  const RunConfig c = parse_config(R"({"kind": "flow"})");
  EXPECT_EQ(c.kind, ExperimentKind::Flow);
  EXPECT_EQ(c.model.grid_size, 256);
  EXPECT_DOUBLE_EQ(c.flow.dt, 1e-3);
  EXPECT_EQ(c.output, "runs/flow");
  // the resolved document parses back to the same configuration
  const RunConfig again = parse_config(c.resolved_json);
  EXPECT_EQ(again.resolved_json, c.resolved_json);
}

TEST(Config, CommentsAndOverrides) {
  const RunConfig c = parse_config(
      "// comment\n{\"kind\": \"hartree\", /* inline */ \"hartree\": {\"delta\": 0.3}}",
      {"hartree.method=pg", "model.potential.nu=2", "seed=9"});
  EXPECT_EQ(c.hartree.options.method, HartreeMethod::ProjectedGradient);
  EXPECT_DOUBLE_EQ(c.hartree.delta, 0.3);
  EXPECT_DOUBLE_EQ(c.model.nu, 2.0);
  EXPECT_EQ(c.seed, 9u);
}

TEST(Config, EveryViolationIsListed) {
  const auto v = violations_of(R"({"kind": "flow", "modle": {}, "flow": {"dt": "x", "horizon": -1}})");
  EXPECT_EQ(v.size(), 3u);
  EXPECT_TRUE(mentions(v, "modle"));
  EXPECT_TRUE(mentions(v, "flow.dt"));
  EXPECT_TRUE(mentions(v, "horizon"));
}

TEST(Config, RejectsBlocksOfOtherKinds) {
  const auto v = violations_of(R"({"kind": "hartree", "flow": {"dt": 0.1}})");
  ASSERT_FALSE(v.empty());
  EXPECT_TRUE(mentions(v, "flow"));
}

TEST(Config, RejectsUnknownKindAndBadModel) {
  EXPECT_FALSE(violations_of(R"({"kind": "quantum"})").empty());
  EXPECT_FALSE(violations_of("{}").empty());
  const auto v = violations_of(R"({"kind": "flow", "model": {"grid_size": 100, "mass": 0}})");
  EXPECT_TRUE(mentions(v, "grid_size"));
  EXPECT_TRUE(mentions(v, "mass"));
  EXPECT_FALSE(violations_of("{not json").empty());
}

TEST(Config, SweepChecks) {
  EXPECT_FALSE(
      violations_of(R"({"kind": "ground-sweep", "sweep": {"hslash_list": [0.5], "sectors": [1, 2]}})")
          .empty());
  EXPECT_FALSE(violations_of(R"({"kind": "quantum-sweep", "sweep": {"observable": "spin"}})").empty());
  const RunConfig c = parse_config(R"({"kind": "quantum-sweep"})", {"sweep.observable=field"});
  EXPECT_EQ(c.sweep.observable, Observable::Field);
}

TEST(Config, DefaultDocumentsValidate) {
  for (auto k : {ExperimentKind::Flow, ExperimentKind::Scatter, ExperimentKind::Hartree,
                 ExperimentKind::QuantumSweep, ExperimentKind::GroundSweep})
    EXPECT_NO_THROW(parse_config(default_config_json(k))) << to_string(k);
}

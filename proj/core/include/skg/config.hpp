#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "skg/hartree.hpp"
#include "skg/model.hpp"
#include "skg/qyukawa.hpp"
#include "skg/scatter.hpp"
#include "skg/skg.hpp"

namespace skg {

enum class ExperimentKind { Flow, Scatter, Hartree, QuantumSweep, GroundSweep };
const char* to_string(ExperimentKind k);

/// Initial classical state for flow and scatter runs.
///
/// gaussian: u = c exp(-(x - center)^2 / (2 width^2) + i momentum x) with |u| = norm, z = 0.
/// random: the same family with center, width and momentum drawn from the run seed.
/// hartree: the Hartree minimizer (u0, z0) at delta = norm.
struct InitialSpec {
  std::string type = "gaussian";
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
  double norm = 0.5;
};

struct ScatterSpec {
  double r_in = 0.4;
  double r_out = 1.95;
  int count = 8;
  double width = 0.0;
  std::string directions = "both";  // forward | backward | both
  PairingOptions pairing;
  /// <= 0 selects 1e-6 (|u|^2 + |z|).
  double threshold = 0.0;
  bool profiles = true;
  double nu = 1.0;
};

struct HartreeSpec {
  double delta = 0.5;
  MinimizeOptions options;
  int starts = 1;
};

struct RunConfig {
  ExperimentKind kind = ExperimentKind::Flow;
  std::uint64_t seed = 1;
  std::string output;
  ModelParams model;
  InitialSpec initial;
  FlowConfig flow;
  ScatterSpec scatter;
  HartreeSpec hartree;
  SweepConfig sweep;
  /// The resolved document: input merged over the kind's defaults.
  std::string resolved_json;
};

/// Parse, apply "a.b.c=value" overrides, check against the schema of the kind and
/// validate. Throws ConfigError listing every violation: unknown keys, wrong types,
/// blocks the kind does not use, and out-of-range values.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path,
                      const std::vector<std::string>& overrides = {});

/// Defaults of a kind as a JSON document, the schema every input is checked against.
std::string default_config_json(ExperimentKind kind);

}  // namespace skg

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skg/harness.hpp"

namespace {

using skg::ConfigError;

int print_violations(const ConfigError& e) {
  std::cerr << "invalid configuration:\n";
  for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
  return skg::kExitValidation;
}

int execute(const skg::RunConfig& config) {
  const skg::RunManifest m = skg::run_experiment(config);
  std::cout << skg::report_run(config.output).text;
  if (m.failure) std::cerr << "run failed: " << *m.failure << "\n";
  return m.exit_code;
}

std::string join_doubles(const std::vector<double>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << skg::format_double(v[i]);
  return os.str() + ']';
}

std::string base_document(const std::optional<std::string>& path, skg::ExperimentKind kind) {
  if (!path) return std::string("{\"kind\": \"") + skg::to_string(kind) + "\"}";
  std::ifstream in(*path);
  if (!in) throw ConfigError({"cannot read config " + *path});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schrodinger-Klein-Gordon experiment harness"};
  app.set_version_flag("--version", skg::software_version());
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--override", overrides, "key.path=value, repeatable");

  auto* validate = app.add_subcommand("validate", "Check a config and print it fully resolved");
  validate->add_option("config", config_path, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  validate->add_option("--override", overrides, "key.path=value, repeatable");

  std::string run_dir;
  auto* report = app.add_subcommand("report", "Summarize a run directory and verify its hashes");
  report->add_option("run-dir", run_dir, "Directory holding manifest.json")->required();

  std::string kind_name;
  auto* defaults = app.add_subcommand("defaults", "Print the default config of a kind");
  defaults->add_option("kind", kind_name, "flow | scatter | hartree | quantum-sweep | ground-sweep")
      ->required();

  std::optional<std::string> base;
  std::optional<std::string> output;
  double delta = 0.5, tol = 1e-10;
  std::string method = "scf";
  int starts = 1;
  std::uint64_t seed = 1;
  auto* hartree = app.add_subcommand("hartree", "Minimize the Hartree functional");
  hartree->add_option("--config", base, "Base config supplying the model block");
  hartree->add_option("--delta", delta, "Nucleon norm");
  hartree->add_option("--method", method, "scf | pg")->check(CLI::IsMember({"scf", "pg"}));
  hartree->add_option("--tol", tol, "Euler-Lagrange residual tolerance");
  hartree->add_option("--starts", starts, "Random starts for the uniqueness check");
  hartree->add_option("--seed", seed, "Seed of the random starts");
  hartree->add_option("--output", output, "Run directory");

  std::vector<double> hbars{0.5, 0.25, 0.125};
  int du = 3, meson_modes = 3;
  std::optional<int> cap;
  std::string observable = "weyl";
  double horizon = 4.0;
  auto* sweep = app.add_subcommand("sweep", "Semiclassical hbar sweep");
  sweep->add_option("--config", base, "Base config supplying the model block");
  auto* hbar_opt =
      sweep->add_option("--hslash-list", hbars, "hbar values, largest first")->delimiter(',');
  sweep->add_option("--du", du, "Retained nucleon modes");
  sweep->add_option("--meson-modes", meson_modes, "Retained meson modes");
  sweep->add_option("--cap", cap, "Occupation cap for nucleons and mesons (0 = adequacy rule)");
  sweep->add_option("--observable", observable, "weyl | field | corr | ground")
      ->check(CLI::IsMember({"weyl", "field", "corr", "ground"}));
  sweep->add_option("--horizon", horizon, "Finite-T horizon of the asymptotic proxies");
  sweep->add_option("--output", output, "Run directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return execute(skg::load_config(config_path, overrides));
    if (*validate) {
      const skg::RunConfig c = skg::load_config(config_path, overrides);
      std::cout << c.resolved_json << "\n";
      return skg::kExitOk;
    }
    if (*report) {
      const skg::RunReport r = skg::report_run(run_dir);
      std::cout << r.text;
      if (!r.check.intact()) return skg::kExitValidation;
      return r.manifest.exit_code;
    }
    if (*defaults) {
      for (auto k : {skg::ExperimentKind::Flow, skg::ExperimentKind::Scatter,
                     skg::ExperimentKind::Hartree, skg::ExperimentKind::QuantumSweep,
                     skg::ExperimentKind::GroundSweep})
        if (kind_name == skg::to_string(k)) {
          std::cout << skg::default_config_json(k);
          return skg::kExitOk;
        }
      throw ConfigError({"unknown kind '" + kind_name + "'"});
    }
    if (*hartree) {
      std::vector<std::string> o{"kind=\"hartree\"",
                                 "hartree.delta=" + skg::format_double(delta),
                                 "hartree.method=\"" + method + "\"",
                                 "hartree.tol=" + skg::format_double(tol),
                                 "hartree.starts=" + std::to_string(starts),
                                 "seed=" + std::to_string(seed)};
      if (output) o.push_back("output=\"" + *output + "\"");
      return execute(skg::parse_config(base_document(base, skg::ExperimentKind::Hartree), o));
    }
    if (*sweep) {
      const bool ground = observable == "ground";
      const auto kind = ground ? skg::ExperimentKind::GroundSweep : skg::ExperimentKind::QuantumSweep;
      std::vector<std::string> o{std::string("kind=\"") + skg::to_string(kind) + "\"",
                                 "sweep.du=" + std::to_string(du),
                                 "sweep.meson_modes=" + std::to_string(meson_modes)};
      if (!ground || hbar_opt->count() > 0) o.push_back("sweep.hslash_list=" + join_doubles(hbars));
      if (ground && hbar_opt->count() > 0) {
        // sector n with n hbar = delta^2 at the default delta
        std::string sectors = "[";
        for (std::size_t i = 0; i < hbars.size(); ++i)
          sectors += (i ? "," : "") + std::to_string(std::max(1L, std::lround(0.25 / hbars[i])));
        o.push_back("sweep.sectors=" + sectors + "]");
      }
      if (!ground) {
        o.push_back("sweep.observable=\"" + observable + "\"");
        o.push_back("sweep.horizon=" + skg::format_double(horizon));
      }
      if (cap) {
        o.push_back("sweep.meson_cap=" + std::to_string(*cap));
        if (!ground) o.push_back("sweep.nucleon_cap=" + std::to_string(*cap));
      }
      if (output) o.push_back("output=\"" + *output + "\"");
      return execute(skg::parse_config(base_document(base, kind), o));
    }
  } catch (const ConfigError& e) {
    return print_violations(e);
  } catch (const skg::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return skg::kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return skg::kExitOk;
}

#include "skg/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace skg {

using ojson = nlohmann::ordered_json;

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Flow: return "flow";
    case ExperimentKind::Scatter: return "scatter";
    case ExperimentKind::Hartree: return "hartree";
    case ExperimentKind::QuantumSweep: return "quantum-sweep";
    case ExperimentKind::GroundSweep: return "ground-sweep";
  }
  return "?";
}

namespace {

const std::vector<ExperimentKind> kKinds{ExperimentKind::Flow, ExperimentKind::Scatter,
                                         ExperimentKind::Hartree, ExperimentKind::QuantumSweep,
                                         ExperimentKind::GroundSweep};

ojson model_defaults() {
  const ModelParams p;
  return {{"dimension", p.dimension},
          {"box_half_length", p.box_half_length},
          {"grid_size", p.grid_size},
          {"mass", p.mass},
          {"potential", {{"c0", p.c0}, {"nu", p.nu}}},
          {"cutoff", {{"radius", p.cutoff.radius}, {"amplitude", p.cutoff.amplitude}}}};
}

ojson initial_defaults() {
  const InitialSpec s;
  return {{"type", s.type},
          {"center", s.center},
          {"width", s.width},
          {"momentum", s.momentum},
          {"norm", s.norm}};
}

ojson defaults(ExperimentKind kind) {
  ojson j;
  j["kind"] = to_string(kind);
  j["seed"] = 1;
  j["output"] = std::string("runs/") + to_string(kind);
  j["model"] = model_defaults();
  switch (kind) {
    case ExperimentKind::Flow: {
      const FlowConfig f;
      j["initial"] = initial_defaults();
      j["flow"] = {{"dt", f.dt},
                   {"horizon", f.horizon},
                   {"stride", f.stride},
                   {"backward", f.backward},
                   {"snapshots", f.keep_snapshots}};
      break;
    }
    case ExperimentKind::Scatter: {
      const ScatterSpec s;
      j["initial"] = initial_defaults();
      j["scatter"] = {{"r_in", s.r_in},
                      {"r_out", s.r_out},
                      {"count", s.count},
                      {"width", s.width},
                      {"directions", s.directions},
                      {"tol", s.pairing.tol},
                      {"dt", s.pairing.dt},
                      {"initial_horizon", s.pairing.initial_horizon},
                      {"max_horizon", s.pairing.max_horizon},
                      {"fit_fraction", s.pairing.fit_fraction},
                      {"check_decay", s.pairing.check_decay},
                      {"threshold", s.threshold},
                      {"profiles", s.profiles},
                      {"nu", s.nu}};
      break;
    }
    case ExperimentKind::Hartree: {
      const HartreeSpec h;
      j["hartree"] = {{"delta", h.delta},
                      {"method", to_string(h.options.method)},
                      {"tol", h.options.tol},
                      {"max_iterations", h.options.max_iterations},
                      {"damping", h.options.damping},
                      {"starts", h.starts}};
      break;
    }
    case ExperimentKind::QuantumSweep:
    case ExperimentKind::GroundSweep: {
      const SweepConfig s;
      const bool ground = kind == ExperimentKind::GroundSweep;
      ojson b;
      if (!ground) b["observable"] = to_string(s.observable);
      b["hslash_list"] = ground ? std::vector<double>{0.25, 0.125, 0.0625} : s.hbars;
      if (ground) b["sectors"] = s.sectors;
      b["delta"] = s.delta;
      b["du"] = s.nucleon_modes;
      b["meson_modes"] = s.meson_modes;
      b["r_in"] = s.r_in;
      b["r_out"] = s.r_out;
      if (!ground) {
        b["nucleon_cap"] = s.nucleon_cap;
        b["horizon"] = s.asymptotic.horizon;
        b["checkpoint"] = s.asymptotic.checkpoint;
        b["direction"] = to_string(s.asymptotic.direction);
        b["krylov_tol"] = s.asymptotic.krylov_tol;
        b["classical_dt"] = s.classical_dt;
      } else {
        b["annihilator_horizon"] = s.annihilator_horizon;
      }
      b["meson_cap"] = s.meson_cap;
      j["sweep"] = b;
      break;
    }
  }
  return j;
}

std::string type_name(const ojson& v) {
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_boolean()) return "boolean";
  if (v.is_string()) return "string";
  if (v.is_array()) return "array";
  if (v.is_object()) return "object";
  return "null";
}

bool compatible(const ojson& def, const ojson& v) {
  if (def.is_number_integer()) return v.is_number_integer();
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  return false;
}

/// Overlay input on the defaults, collecting every schema violation.
void overlay(ojson& target, const ojson& input, const std::string& path,
             std::vector<std::string>& bad) {
  for (const auto& [key, value] : input.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    if (!target.contains(key)) {
      bad.push_back("unknown key '" + where + "'");
      continue;
    }
    ojson& def = target[key];
    if (def.is_object()) {
      if (!value.is_object()) {
        bad.push_back("'" + where + "' must be an object, got " + type_name(value));
        continue;
      }
      overlay(def, value, where, bad);
    } else if (def.is_array()) {
      if (!value.is_array() || value.empty()) {
        bad.push_back("'" + where + "' must be a non-empty array");
        continue;
      }
      const ojson& elem = def.front();
      bool ok = true;
      for (const auto& v : value) ok = ok && compatible(elem, v);
      if (!ok) {
        bad.push_back("'" + where + "' entries must be of type " + type_name(elem));
        continue;
      }
      def = value;
    } else {
      if (!compatible(def, value)) {
        bad.push_back("'" + where + "' must be of type " + type_name(def) + ", got " +
                      type_name(value));
        continue;
      }
      def = value;
    }
  }
}

void apply_override(ojson& doc, const std::string& item, std::vector<std::string>& bad) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    bad.push_back("override '" + item + "' is not key=value");
    return;
  }
  const std::string key = item.substr(0, eq);
  const std::string text = item.substr(eq + 1);
  ojson value;
  try {
    value = ojson::parse(text);
  } catch (const ojson::exception&) {
    value = text;
  }
  ojson* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) {
      bad.push_back("override key '" + key + "' has an empty component");
      return;
    }
    if (!node->is_object()) {
      bad.push_back("override '" + key + "' descends into a non-object");
      return;
    }
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = ojson::object();
    start = dot + 1;
  }
}

void prefixed(std::vector<std::string>& bad, const std::string& block,
              const std::vector<std::string>& v) {
  for (const auto& s : v) bad.push_back(block + ": " + s);
}

}  // namespace

std::string default_config_json(ExperimentKind kind) { return defaults(kind).dump(2) + "\n"; }

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  ojson input;
  try {
    input = ojson::parse(text, nullptr, true, true);
  } catch (const ojson::exception& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  if (!input.is_object()) throw ConfigError({"config must be a JSON object"});
  std::vector<std::string> bad;
  for (const auto& o : overrides) apply_override(input, o, bad);
  if (!bad.empty()) throw ConfigError(bad);

  if (!input.contains("kind") || !input["kind"].is_string())
    throw ConfigError({"missing string key 'kind' (flow | scatter | hartree | quantum-sweep | "
                       "ground-sweep)"});
  const std::string kind_name = input["kind"].get<std::string>();
  const auto it = std::find_if(kKinds.begin(), kKinds.end(),
                               [&](ExperimentKind k) { return kind_name == to_string(k); });
  if (it == kKinds.end())
    throw ConfigError({"unknown kind '" + kind_name +
                       "' (flow | scatter | hartree | quantum-sweep | ground-sweep)"});

  RunConfig c;
  c.kind = *it;
  ojson r = defaults(c.kind);
  for (const auto& block : {"initial", "flow", "scatter", "hartree", "sweep"})
    if (input.contains(block) && !r.contains(block))
      bad.push_back("block '" + std::string(block) + "' is not used by kind '" + kind_name + "'");
  ojson filtered = input;
  for (const auto& block : {"initial", "flow", "scatter", "hartree", "sweep"})
    if (!r.contains(block)) filtered.erase(block);
  // keys failing the schema keep their defaults
  overlay(r, filtered, "", bad);

  if (r["seed"].get<long long>() < 0) bad.push_back("seed must be >= 0");
  c.seed = r["seed"].get<std::uint64_t>();
  c.output = r["output"].get<std::string>();
  if (c.output.empty()) bad.push_back("output must not be empty");

  const ojson& m = r["model"];
  c.model.dimension = m["dimension"].get<int>();
  c.model.box_half_length = m["box_half_length"].get<double>();
  c.model.grid_size = m["grid_size"].get<int>();
  c.model.mass = m["mass"].get<double>();
  c.model.c0 = m["potential"]["c0"].get<double>();
  c.model.nu = m["potential"]["nu"].get<double>();
  c.model.cutoff.radius = m["cutoff"]["radius"].get<double>();
  c.model.cutoff.amplitude = m["cutoff"]["amplitude"].get<double>();
  prefixed(bad, "model", c.model.violations());

  if (r.contains("initial")) {
    const ojson& s = r["initial"];
    c.initial.type = s["type"].get<std::string>();
    c.initial.center = s["center"].get<double>();
    c.initial.width = s["width"].get<double>();
    c.initial.momentum = s["momentum"].get<double>();
    c.initial.norm = s["norm"].get<double>();
    if (c.initial.type != "gaussian" && c.initial.type != "random" && c.initial.type != "hartree")
      bad.push_back("initial: type must be gaussian | random | hartree");
    if (!(c.initial.width > 0.0)) bad.push_back("initial: width must be > 0");
    if (!(c.initial.norm > 0.0)) bad.push_back("initial: norm must be > 0");
  }
  if (r.contains("flow")) {
    const ojson& f = r["flow"];
    c.flow.dt = f["dt"].get<double>();
    c.flow.horizon = f["horizon"].get<double>();
    c.flow.stride = f["stride"].get<int>();
    c.flow.backward = f["backward"].get<bool>();
    c.flow.keep_snapshots = f["snapshots"].get<bool>();
    for (const auto& v : c.flow.violations()) bad.push_back(v);
  }
  if (r.contains("scatter")) {
    const ojson& s = r["scatter"];
    ScatterSpec& p = c.scatter;
    p.r_in = s["r_in"].get<double>();
    p.r_out = s["r_out"].get<double>();
    p.count = s["count"].get<int>();
    p.width = s["width"].get<double>();
    p.directions = s["directions"].get<std::string>();
    p.pairing.tol = s["tol"].get<double>();
    p.pairing.dt = s["dt"].get<double>();
    p.pairing.initial_horizon = s["initial_horizon"].get<double>();
    p.pairing.max_horizon = s["max_horizon"].get<double>();
    p.pairing.fit_fraction = s["fit_fraction"].get<double>();
    p.pairing.check_decay = s["check_decay"].get<bool>();
    p.threshold = s["threshold"].get<double>();
    p.profiles = s["profiles"].get<bool>();
    p.nu = s["nu"].get<double>();
    if (!(p.r_in > 0.0 && p.r_out > p.r_in)) bad.push_back("scatter: need 0 < r_in < r_out");
    if (p.count < 1) bad.push_back("scatter: count must be >= 1");
    if (p.width < 0.0) bad.push_back("scatter: width must be >= 0");
    if (p.directions != "forward" && p.directions != "backward" && p.directions != "both")
      bad.push_back("scatter: directions must be forward | backward | both");
    if (!(p.pairing.tol > 0.0)) bad.push_back("scatter: tol must be > 0");
    if (!(p.pairing.dt > 0.0)) bad.push_back("scatter: dt must be > 0");
    if (!(p.pairing.initial_horizon > 0.0)) bad.push_back("scatter: initial_horizon must be > 0");
    if (p.pairing.max_horizon < 0.0) bad.push_back("scatter: max_horizon must be >= 0");
    if (!(p.pairing.fit_fraction > 0.0 && p.pairing.fit_fraction < 1.0))
      bad.push_back("scatter: fit_fraction must lie in (0, 1)");
    if (!(p.nu > 0.0)) bad.push_back("scatter: nu must be > 0");
  }
  if (r.contains("hartree")) {
    const ojson& h = r["hartree"];
    HartreeSpec& p = c.hartree;
    p.delta = h["delta"].get<double>();
    const std::string method = h["method"].get<std::string>();
    if (method == "scf") {
      p.options.method = HartreeMethod::Scf;
    } else if (method == "pg" || method == "projected-gradient") {
      p.options.method = HartreeMethod::ProjectedGradient;
    } else {
      bad.push_back("hartree: method must be scf | pg");
    }
    p.options.tol = h["tol"].get<double>();
    p.options.max_iterations = h["max_iterations"].get<int>();
    p.options.damping = h["damping"].get<double>();
    p.starts = h["starts"].get<int>();
    if (!(p.delta > 0.0)) bad.push_back("hartree: delta must be > 0");
    if (!(p.options.tol > 0.0)) bad.push_back("hartree: tol must be > 0");
    if (p.options.max_iterations < 1) bad.push_back("hartree: max_iterations must be >= 1");
    if (!(p.options.damping > 0.0 && p.options.damping <= 1.0))
      bad.push_back("hartree: damping must lie in (0, 1]");
    if (p.starts < 1) bad.push_back("hartree: starts must be >= 1");
  }
  if (r.contains("sweep")) {
    const ojson& s = r["sweep"];
    SweepConfig& p = c.sweep;
    if (c.kind == ExperimentKind::GroundSweep) {
      p.observable = Observable::Ground;
      p.sectors = s["sectors"].get<std::vector<int>>();
      p.annihilator_horizon = s["annihilator_horizon"].get<double>();
      if (!(p.annihilator_horizon > 0.0)) bad.push_back("sweep: annihilator_horizon must be > 0");
    } else {
      try {
        p.observable = observable_from_string(s["observable"].get<std::string>());
        if (p.observable == Observable::Ground)
          bad.push_back("sweep: the ground observable belongs to kind ground-sweep");
      } catch (const ConfigError& e) {
        prefixed(bad, "sweep", e.violations());
      }
      p.nucleon_cap = s["nucleon_cap"].get<int>();
      p.asymptotic.horizon = s["horizon"].get<double>();
      p.asymptotic.checkpoint = s["checkpoint"].get<double>();
      const std::string dir = s["direction"].get<std::string>();
      if (dir == "forward") {
        p.asymptotic.direction = Direction::Forward;
      } else if (dir == "backward") {
        p.asymptotic.direction = Direction::Backward;
      } else {
        bad.push_back("sweep: direction must be forward | backward");
      }
      p.asymptotic.krylov_tol = s["krylov_tol"].get<double>();
      p.classical_dt = s["classical_dt"].get<double>();
      if (!(p.asymptotic.horizon > 0.0)) bad.push_back("sweep: horizon must be > 0");
      if (!(p.asymptotic.checkpoint > 0.0 && p.asymptotic.checkpoint <= p.asymptotic.horizon))
        bad.push_back("sweep: checkpoint must lie in (0, horizon]");
      if (!(p.asymptotic.krylov_tol > 0.0)) bad.push_back("sweep: krylov_tol must be > 0");
    }
    p.hbars = s["hslash_list"].get<std::vector<double>>();
    p.delta = s["delta"].get<double>();
    p.nucleon_modes = s["du"].get<int>();
    p.meson_modes = s["meson_modes"].get<int>();
    p.r_in = s["r_in"].get<double>();
    p.r_out = s["r_out"].get<double>();
    p.meson_cap = s["meson_cap"].get<int>();
    prefixed(bad, "sweep", p.violations());
  }
  if (!bad.empty()) throw ConfigError(bad);
  c.resolved_json = r.dump();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot read config " + path.string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace skg

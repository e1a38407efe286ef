#pragma once

// YAML scenario configuration: parsing with positions, defaults, validation
// against the model assumptions, and the fully defaulted write-back.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "bresse/carleman.hpp"
#include "bresse/discretize.hpp"
#include "bresse/errors.hpp"
#include "bresse/evolve.hpp"
#include "bresse/model.hpp"

namespace bresse {

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> k = {"simulate", "decay", "stationary", "carleman", "ucp", "quasi-stability"};
  return k;
}

struct DampingEntry {
  Interval interval{0.0, 1.0};
  double amplitude = 1.0;
  std::string law = "linear";
  ParamMap params;
};

struct InitialSpec {
  std::string kind = "modes";  // modes | random
  double amplitude = 1.0;
  int modes = 3;  // sine modes per field for `random`
};

struct ScenarioConfig {
  std::string scenario = "simulate";
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  BeamParameters beam;
  bool damping_enabled = true;
  std::array<DampingEntry, 3> damping;  // phi, psi, w
  std::string source = "zero";
  ParamMap source_params;
  SamplingOptions sampling;

  int n = 100;
  std::optional<double> dt;  // default 0.5 h
  double t_end = 10.0;
  int stride = 10;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;

  InitialSpec initial;

  // scenario blocks
  double decay_skip = 0.25;
  int stationary_guesses = 10;
  double stationary_amplitude = 1.0;
  int quasi_pairs = 10;
  double quasi_perturbation = 0.1;
  SetupOptions carleman;
  int ucp_samples = 50;
  int ucp_modes = 5;

  std::string source_text;  // raw config text, hashed into the manifest

  Model model() const {
    Model m;
    m.beam = beam;
    if (damping_enabled) {
      for (int c = 0; c < 3; ++c) {
        const auto& d = damping[c];
        m.damping.components[c] = {Localizer{d.interval, d.amplitude}, DampingLaw::from_catalog(d.law, d.params)};
      }
    } else {
      m.damping = DampingSpec::undamped(beam.length);
    }
    m.source = Source::from_catalog(source, source_params);
    return m;
  }

  Grid grid() const { return build_grid(beam.length, n); }

  IntegratorConfig integrator() const {
    const Grid g = grid();
    IntegratorConfig c = IntegratorConfig::defaults(g, t_end);
    if (dt) c.dt = *dt;
    c.stride = stride;
    c.newton_tol = newton_tol;
    c.newton_max_iter = newton_max_iter;
    return c;
  }
};

namespace detail {

[[noreturn]] inline void parse_fail(const YAML::Mark& mark, const std::string& msg) {
  std::ostringstream os;
  if (mark.is_null())
    os << msg;
  else
    os << "line " << mark.line + 1 << ", column " << mark.column + 1 << ": " << msg;
  fail(ErrorKind::ParseError, os.str());
}

inline void check_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node) return;
  if (!node.IsMap()) parse_fail(node.Mark(), where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) parse_fail(kv.first.Mark(), "unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  const YAML::Node v = node[key];
  if (!v) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    parse_fail(v.Mark(), std::string("bad value for '") + key + "'");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, std::optional<T>& out) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return;
  T t{};
  read(node, key, t);
  out = t;
}

inline void read_params(const YAML::Node& node, ParamMap& out) {
  if (!node) return;
  if (!node.IsMap()) parse_fail(node.Mark(), "params must be a mapping");
  for (const auto& kv : node) {
    try {
      out[kv.first.as<std::string>()] = kv.second.as<double>();
    } catch (const YAML::Exception&) {
      parse_fail(kv.second.Mark(), "parameter '" + kv.first.as<std::string>() + "' must be a number");
    }
  }
}

inline void read_damping_entry(const YAML::Node& node, DampingEntry& e, const std::string& where) {
  check_keys(node, {"interval", "amplitude", "law", "params"}, where);
  if (!node) return;
  if (const auto iv = node["interval"]) {
    if (!iv.IsSequence() || iv.size() != 2) parse_fail(iv.Mark(), "interval must be [lo, hi]");
    try {
      e.interval = {iv[0].as<double>(), iv[1].as<double>()};
    } catch (const YAML::Exception&) {
      parse_fail(iv.Mark(), "interval entries must be numbers");
    }
  }
  read(node, "amplitude", e.amplitude);
  read(node, "law", e.law);
  if (node["params"]) {
    e.params.clear();
    read_params(node["params"], e.params);
  }
}

}  // namespace detail

/// Parses and validates. `origin` names the source in messages.
namespace detail {
[[noreturn]] inline void invalid(const std::string& msg) { fail(ErrorKind::ValidationError, msg); }
}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<config>") {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    detail::parse_fail(e.mark, origin + ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  using detail::read;
  ScenarioConfig c;
  c.source_text = text;
  detail::check_keys(root, {"scenario", "seed", "output_dir", "model", "grid", "solver", "initial", "decay",
                            "stationary", "quasi", "carleman", "ucp"},
                     "top level");
  read(root, "scenario", c.scenario);
  read(root, "seed", c.seed);
  read(root, "output_dir", c.output_dir);

  const auto model = root["model"];
  detail::check_keys(model, {"beam", "damping", "source", "sampling"}, "model");
  if (model) {
    const auto beam = model["beam"];
    detail::check_keys(beam, {"rho1", "rho2", "k", "k0", "b", "ell", "length"}, "model.beam");
    if (beam) {
      read(beam, "rho1", c.beam.rho1);
      read(beam, "rho2", c.beam.rho2);
      read(beam, "k", c.beam.k);
      read(beam, "k0", c.beam.k0);
      read(beam, "b", c.beam.b);
      read(beam, "ell", c.beam.ell);
      read(beam, "length", c.beam.length);
    }
    for (auto& d : c.damping) d.interval = {0.0, c.beam.length};
    const auto damp = model["damping"];
    if (damp) {
      detail::check_keys(damp, {"enabled", "interval", "amplitude", "law", "params", "phi", "psi", "w"},
                         "model.damping");
      read(damp, "enabled", c.damping_enabled);
      DampingEntry common = c.damping[0];
      YAML::Node shared(YAML::NodeType::Map);
      for (const char* k : {"interval", "amplitude", "law", "params"})
        if (damp[k]) shared[k] = damp[k];
      detail::read_damping_entry(shared, common, "model.damping");
      const char* names[3] = {"phi", "psi", "w"};
      for (int i = 0; i < 3; ++i) {
        c.damping[i] = common;
        detail::read_damping_entry(damp[names[i]], c.damping[i], std::string("model.damping.") + names[i]);
      }
    }
    const auto src = model["source"];
    detail::check_keys(src, {"name", "params"}, "model.source");
    if (src) {
      read(src, "name", c.source);
      detail::read_params(src["params"], c.source_params);
    }
    const auto smp = model["sampling"];
    detail::check_keys(smp, {"points", "range", "x_points"}, "model.sampling");
    if (smp) {
      read(smp, "points", c.sampling.points);
      read(smp, "range", c.sampling.range);
      read(smp, "x_points", c.sampling.x_points);
    }
  } else {
    for (auto& d : c.damping) d.interval = {0.0, c.beam.length};
  }

  const auto grid = root["grid"];
  detail::check_keys(grid, {"n", "dt", "t_end", "stride"}, "grid");
  if (grid) {
    read(grid, "n", c.n);
    read(grid, "dt", c.dt);
    read(grid, "t_end", c.t_end);
    read(grid, "stride", c.stride);
  }
  const auto solver = root["solver"];
  detail::check_keys(solver, {"newton_tol", "newton_max_iter"}, "solver");
  if (solver) {
    read(solver, "newton_tol", c.newton_tol);
    read(solver, "newton_max_iter", c.newton_max_iter);
  }
  const auto init = root["initial"];
  detail::check_keys(init, {"kind", "amplitude", "modes"}, "initial");
  if (init) {
    read(init, "kind", c.initial.kind);
    read(init, "amplitude", c.initial.amplitude);
    read(init, "modes", c.initial.modes);
  }
  const auto decay = root["decay"];
  detail::check_keys(decay, {"skip_fraction"}, "decay");
  if (decay) read(decay, "skip_fraction", c.decay_skip);
  const auto st = root["stationary"];
  detail::check_keys(st, {"guesses", "amplitude"}, "stationary");
  if (st) {
    read(st, "guesses", c.stationary_guesses);
    read(st, "amplitude", c.stationary_amplitude);
  }
  const auto qs = root["quasi"];
  detail::check_keys(qs, {"pairs", "perturbation"}, "quasi");
  if (qs) {
    read(qs, "pairs", c.quasi_pairs);
    read(qs, "perturbation", c.quasi_perturbation);
  }
  c.carleman.L = c.beam.length;
  c.carleman.L0 = 0.5 * c.beam.length;
  const auto cm = root["carleman"];
  detail::check_keys(cm, {"L0", "epsilon", "T", "c", "delta", "delta_frac", "sigma", "sigma_frac", "taus"},
                     "carleman");
  if (cm) {
    read(cm, "L0", c.carleman.L0);
    read(cm, "epsilon", c.carleman.epsilon);
    read(cm, "T", c.carleman.T);
    read(cm, "c", c.carleman.c);
    read(cm, "delta", c.carleman.delta);
    read(cm, "delta_frac", c.carleman.delta_frac);
    read(cm, "sigma", c.carleman.sigma);
    read(cm, "sigma_frac", c.carleman.sigma_frac);
    read(cm, "taus", c.carleman.taus);
  }
  const auto ucp = root["ucp"];
  detail::check_keys(ucp, {"samples", "modes"}, "ucp");
  if (ucp) {
    read(ucp, "samples", c.ucp_samples);
    read(ucp, "modes", c.ucp_modes);
  }

  // Validation.
  if (std::find(scenario_kinds().begin(), scenario_kinds().end(), c.scenario) == scenario_kinds().end())
    detail::invalid("unknown scenario '" + c.scenario + "'");
  if (c.initial.kind != "modes" && c.initial.kind != "random") detail::invalid("unknown initial kind '" + c.initial.kind + "'");
  try {
    c.beam.check();
    const Model m = c.model();  // catalog lookups
    const Grid g = c.grid();
    c.integrator().check();
    (void)g;
    if (c.damping_enabled) {
      const auto rep = validate(m, c.sampling);
      for (const auto& chk : rep.checks)
        if (!chk.passed) detail::invalid("assumption " + chk.name + " fails: " + chk.detail);
    } else {
      // Undamped runs: only the source assumptions apply.
      Model probe = m;
      probe.damping = DampingSpec::uniform({0.0, c.beam.length}, 1.0, DampingLaw::linear());
      const auto rep = validate(probe, c.sampling);
      for (const auto& chk : rep.checks)
        if (!chk.passed && chk.name.rfind("(f", 0) == 0) detail::invalid("assumption " + chk.name + " fails: " + chk.detail);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ValidationError) throw;
    switch (e.kind()) {
      case ErrorKind::EmptyDampingIntersection: detail::invalid(std::string("assumption (a.1): ") + e.what());
      case ErrorKind::NonmonotoneDamping: detail::invalid(std::string("assumption (g.1): ") + e.what());
      default: detail::invalid(e.what());
    }
  }
  require(c.stationary_guesses >= 1 && c.quasi_pairs >= 1 && c.ucp_samples >= 1, "counts must be positive");
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Fully defaulted configuration, in a fixed key order.
inline std::string effective_config_yaml(const ScenarioConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto params = [&](const ParamMap& p) {
    e << YAML::BeginMap;
    for (const auto& [k, v] : p) e << YAML::Key << k << YAML::Value << v;
    e << YAML::EndMap;
  };
  const auto integ = c.integrator();
  e << YAML::BeginMap;
  e << YAML::Key << "scenario" << YAML::Value << c.scenario;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "beam" << YAML::Value << YAML::BeginMap << YAML::Key << "rho1" << YAML::Value << c.beam.rho1
    << YAML::Key << "rho2" << YAML::Value << c.beam.rho2 << YAML::Key << "k" << YAML::Value << c.beam.k
    << YAML::Key << "k0" << YAML::Value << c.beam.k0 << YAML::Key << "b" << YAML::Value << c.beam.b << YAML::Key
    << "ell" << YAML::Value << c.beam.ell << YAML::Key << "length" << YAML::Value << c.beam.length << YAML::EndMap;
  e << YAML::Key << "damping" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "enabled" << YAML::Value << c.damping_enabled;
  const char* names[3] = {"phi", "psi", "w"};
  for (int i = 0; i < 3; ++i) {
    const auto& d = c.damping[i];
    e << YAML::Key << names[i] << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "interval" << YAML::Value << YAML::Flow << YAML::BeginSeq << d.interval.lo << d.interval.hi
      << YAML::EndSeq;
    e << YAML::Key << "amplitude" << YAML::Value << d.amplitude;
    e << YAML::Key << "law" << YAML::Value << d.law;
    e << YAML::Key << "params" << YAML::Value;
    params(DampingLaw::from_catalog(d.law, d.params).params());
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  e << YAML::Key << "source" << YAML::Value << YAML::BeginMap << YAML::Key << "name" << YAML::Value << c.source
    << YAML::Key << "params" << YAML::Value;
  params(Source::from_catalog(c.source, c.source_params).params());
  e << YAML::EndMap;
  e << YAML::Key << "sampling" << YAML::Value << YAML::BeginMap << YAML::Key << "points" << YAML::Value
    << c.sampling.points << YAML::Key << "range" << YAML::Value << c.sampling.range << YAML::Key << "x_points"
    << YAML::Value << c.sampling.x_points << YAML::EndMap;
  e << YAML::EndMap;  // model
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "n" << YAML::Value << c.n << YAML::Key
    << "dt" << YAML::Value << integ.dt << YAML::Key << "t_end" << YAML::Value << c.t_end << YAML::Key << "stride"
    << YAML::Value << c.stride << YAML::EndMap;
  e << YAML::Key << "solver" << YAML::Value << YAML::BeginMap << YAML::Key << "newton_tol" << YAML::Value
    << c.newton_tol << YAML::Key << "newton_max_iter" << YAML::Value << c.newton_max_iter << YAML::EndMap;
  e << YAML::Key << "initial" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
    << c.initial.kind << YAML::Key << "amplitude" << YAML::Value << c.initial.amplitude << YAML::Key << "modes"
    << YAML::Value << c.initial.modes << YAML::EndMap;
  e << YAML::Key << "decay" << YAML::Value << YAML::BeginMap << YAML::Key << "skip_fraction" << YAML::Value
    << c.decay_skip << YAML::EndMap;
  e << YAML::Key << "stationary" << YAML::Value << YAML::BeginMap << YAML::Key << "guesses" << YAML::Value
    << c.stationary_guesses << YAML::Key << "amplitude" << YAML::Value << c.stationary_amplitude << YAML::EndMap;
  e << YAML::Key << "quasi" << YAML::Value << YAML::BeginMap << YAML::Key << "pairs" << YAML::Value << c.quasi_pairs
    << YAML::Key << "perturbation" << YAML::Value << c.quasi_perturbation << YAML::EndMap;
  e << YAML::Key << "carleman" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "L0" << YAML::Value << c.carleman.L0 << YAML::Key << "epsilon" << YAML::Value
    << c.carleman.epsilon;
  if (c.carleman.T) e << YAML::Key << "T" << YAML::Value << *c.carleman.T;
  if (c.carleman.c) e << YAML::Key << "c" << YAML::Value << *c.carleman.c;
  if (c.carleman.delta) e << YAML::Key << "delta" << YAML::Value << *c.carleman.delta;
  e << YAML::Key << "delta_frac" << YAML::Value << c.carleman.delta_frac;
  if (c.carleman.sigma) e << YAML::Key << "sigma" << YAML::Value << *c.carleman.sigma;
  e << YAML::Key << "sigma_frac" << YAML::Value << c.carleman.sigma_frac;
  e << YAML::Key << "taus" << YAML::Value << YAML::Flow << c.carleman.taus;
  e << YAML::EndMap;
  e << YAML::Key << "ucp" << YAML::Value << YAML::BeginMap << YAML::Key << "samples" << YAML::Value << c.ucp_samples
    << YAML::Key << "modes" << YAML::Value << c.ucp_modes << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace bresse

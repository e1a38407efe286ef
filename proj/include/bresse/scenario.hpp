#pragma once

// Scenario orchestration: runs one configured experiment and writes CSV
// series, the effective config and a manifest into the output directory.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bresse/carleman.hpp"
#include "bresse/config.hpp"
#include "bresse/diagnostics.hpp"
#include "bresse/evolve.hpp"
#include "bresse/stationary.hpp"

namespace bresse {

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// CSV table with a header row and 17-significant-digit numbers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void row(const std::vector<double>& values) {
    require(values.size() == header_.size(), "row width mismatch");
    rows_.push_back(values);
  }

  std::string str() const {
    std::string out;
    for (size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + quote(header_[i]);
    out += "\n";
    char buf[64];
    for (const auto& r : rows_) {
      for (size_t i = 0; i < r.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", r[i]);
        if (i) out += ",";
        out += buf;
      }
      out += "\n";
    }
    return out;
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

/// Smooth initial state for the beam scenarios.
inline StateZ initial_state(const InitialSpec& spec, const Grid& g, std::mt19937_64& rng) {
  const double L = g.length, A = spec.amplitude, pi = std::numbers::pi;
  StateZ z = StateZ::zeros(g.n);
  if (spec.kind == "modes") {
    z.phi = sample(g, [&](double x) { return A * std::sin(pi * x / L); });
    z.psi = sample(g, [&](double x) { return 0.5 * A * std::sin(2 * pi * x / L); });
    z.w = sample(g, [&](double x) { return A / 3.0 * std::sin(3 * pi * x / L); });
    z.w_t = sample(g, [&](double x) { return 0.5 * A * std::sin(2 * pi * x / L); });
    return z;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Vector* f : z.fields())
    for (int k = 1; k <= spec.modes; ++k) {
      const double a = A * normal(rng) / k;
      for (int j = 0; j < g.n; ++j) (*f)[j] += a * std::sin(k * pi * g.x(j) / L);
    }
  return z;
}

/// Wave data vanishing on omega: one random sine bump per side per field.
inline WaveData omega_vanishing_data(int components, const Grid& g, const CarlemanSetup& s, std::mt19937_64& rng,
                                     double amplitude = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Interval om = s.omega();
  WaveData d{std::vector<Vector>(components, Vector::Zero(g.n)), std::vector<Vector>(components, Vector::Zero(g.n))};
  auto bump = [](double x, double a, double b, int k) {
    if (x <= a || x >= b) return 0.0;
    return std::sin(k * std::numbers::pi * (x - a) / (b - a));
  };
  for (int i = 0; i < components; ++i)
    for (auto* f : {&d.u0[i], &d.u1[i]}) {
      const double cl = amplitude * normal(rng), cr = amplitude * normal(rng);
      const int kl = 1 + static_cast<int>(rng() % 2), kr = 1 + static_cast<int>(rng() % 2);
      for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        (*f)[j] = cl * bump(x, 0.0, om.lo, kl) + cr * bump(x, om.hi, s.L, kr);
      }
    }
  return d;
}

struct RunResult {
  int exit_code = 0;
  std::vector<std::string> files;
  nlohmann::ordered_json summary;
};

namespace detail {

class OutputSink {
 public:
  explicit OutputSink(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + (dir_ / name).string());
    out << content;
    files_.push_back(nlohmann::ordered_json{
        {"name", name}, {"bytes", content.size()}, {"fnv1a64", hex64(fnv1a64(content))}});
    names_.push_back(name);
  }

  const nlohmann::ordered_json& files() const { return files_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  nlohmann::ordered_json files_ = nlohmann::ordered_json::array();
  std::vector<std::string> names_;
};

inline std::string energy_csv(const EnergyReport& rep) {
  CsvTable t({"t", "E_Z = ||Z||_H^2", "int_F = int_0^L F(phi,psi,w) dx", "energy = E_Z + 2 int_F",
              "dissipation = 2 int_0^t int_0^L sum a_i g_i(v_i) v_i", "identity_residual"});
  for (size_t k = 0; k < rep.size(); ++k)
    t.row({rep.times[k], rep.E_Z[k], rep.F_integral[k], rep.energy[k], rep.dissipation[k], rep.residual[k]});
  return t.str();
}

inline void simulate_like(const ScenarioConfig& cfg, OutputSink& sink, nlohmann::ordered_json& summary, bool fit) {
  const Model m = cfg.model();
  const Grid g = cfg.grid();
  std::mt19937_64 rng(cfg.seed);
  const StateZ z0 = initial_state(cfg.initial, g, rng);
  const auto traj = simulate(z0, m, g, cfg.integrator());
  const auto rep = energy_report(traj, m, cfg.newton_tol);
  sink.write("energy.csv", energy_csv(rep));
  const auto bounds = energy_bounds(rep, m);
  summary["samples"] = rep.size();
  summary["steps"] = traj.step_dissipation.size();
  summary["dt"] = traj.dt;
  summary["max_identity_residual"] = rep.max_abs_residual();
  summary["identity_holds"] = rep.identity_holds();
  summary["energy_monotone"] = rep.monotone();
  summary["E_Z_initial"] = rep.E_Z.front();
  summary["E_Z_final"] = rep.E_Z.back();
  summary["C_E"] = bounds.C_E;
  summary["c_E"] = bounds.c_E;
  if (fit) {
    const auto f = fit_decay_rate(rep, cfg.decay_skip);
    CsvTable t({"omega = fitted rate of E_Z ~ A exp(-omega t)", "c1 = A / E_Z(0)",
                "c1_envelope = max E_Z(t) exp(omega t) / E_Z(0)", "log_fit_rms", "window_start", "window_end",
                "samples"});
    t.row({f.omega, f.c1, f.c1_envelope, f.residual, f.window_start, f.window_end, double(f.samples)});
    sink.write("decay_fit.csv", t.str());
    summary["omega"] = f.omega;
    summary["c1"] = f.c1;
    summary["log_fit_rms"] = f.residual;
  }
}

inline void stationary_scenario(const ScenarioConfig& cfg, OutputSink& sink, nlohmann::ordered_json& summary) {
  const Model m = cfg.model();
  const Grid g = cfg.grid();
  MultistartOptions o;
  o.guesses = cfg.stationary_guesses;
  o.amplitude = cfg.stationary_amplitude;
  o.seed = static_cast<unsigned>(cfg.seed);
  const auto sols = enumerate_stationary(m, g, o);
  const double R2 = stationary_bound(m, g);
  CsvTable t({"index", "residual = max|K u + grad F(u)|", "newton_iterations",
              "grad_norm_sq = ||phi_x||^2+||psi_x||^2+||w_x||^2", "bound R^2", "within_bound"});
  std::vector<std::string> fh = {"x"};
  for (size_t k = 0; k < sols.size(); ++k)
    for (const char* f : {"phi", "psi", "w"}) fh.push_back(std::string(f) + "_" + std::to_string(k));
  CsvTable fields(fh);
  bool all_within = true;
  for (size_t k = 0; k < sols.size(); ++k) {
    const auto& s = sols[k];
    const double gn = gradient_norm_sq(s.phi, s.psi, s.w, g);
    const bool ok = gn <= R2 * (1 + 1e-12) + 1e-12;
    all_within = all_within && ok;
    t.row({double(k), s.residual, double(s.iterations), gn, R2, ok ? 1.0 : 0.0});
  }
  for (int j = 0; j < g.n; ++j) {
    std::vector<double> r = {g.x(j)};
    for (const auto& s : sols) {
      r.push_back(s.phi[j]);
      r.push_back(s.psi[j]);
      r.push_back(s.w[j]);
    }
    fields.row(r);
  }
  sink.write("stationary.csv", t.str());
  sink.write("stationary_fields.csv", fields.str());
  summary["solutions"] = sols.size();
  summary["bound_R2"] = R2;
  summary["all_within_bound"] = all_within;
}

inline CarlemanSetup setup_from(const ScenarioConfig& cfg) {
  SetupOptions o = cfg.carleman;
  o.L = cfg.beam.length;
  return make_setup(o);
}

inline IntegratorConfig wave_integrator(const ScenarioConfig& cfg, const Grid& g, double T) {
  IntegratorConfig c = IntegratorConfig::defaults(g, T);
  if (cfg.dt) c.dt = *cfg.dt;
  c.stride = 1;
  return c;
}

inline void carleman_scenario(const ScenarioConfig& cfg, OutputSink& sink, nlohmann::ordered_json& summary) {
  const Grid g = cfg.grid();
  const auto s = setup_from(cfg);
  const auto sys = LinearCoupledSystem::bresse_linearized(cfg.beam, g);
  const auto rep = verify_setup(s, sys.gamma);
  CsvTable ct({"check", "passed", "value"});
  nlohmann::ordered_json names = nlohmann::ordered_json::array();
  for (size_t k = 0; k < rep.checks.size(); ++k) {
    ct.row({double(k), rep.checks[k].passed ? 1.0 : 0.0, rep.checks[k].value});
    names.push_back(rep.checks[k].name);
  }
  sink.write("carleman_setup.csv", ct.str());
  std::mt19937_64 rng(cfg.seed);
  const auto data = omega_vanishing_data(sys.components(), g, s, rng, cfg.initial.amplitude);
  const auto runs = solve_subdomains(sys, g, data.u0, data.u1, s, wave_integrator(cfg, g, s.T));
  const auto cr = carleman_inequality_check(runs, sys, s);
  CsvTable bt({"tau", "i (component, 0-based)", "j (subdomain)", "BT_tau v_ij"});
  CsvTable sm({"tau", "lhs = sum_ij BT_tau v_ij", "energy = sum_i int V_i(x,0)+V_i(x,T) dx",
               "k_T_max = lhs / energy"});
  bool nonpositive = true;
  for (const auto& row : cr.rows) {
    for (size_t q = 0; q < row.bt.size(); ++q) bt.row({row.tau, double(q / 2), double(q % 2 + 1), row.bt[q]});
    sm.row({row.tau, row.lhs, row.energy, row.k_T_max});
    nonpositive = nonpositive && row.lhs <= 0.0;
  }
  sink.write("carleman_report.csv", bt.str());
  sink.write("carleman_summary.csv", sm.str());
  summary["setup_checks"] = names;
  summary["setup_all_passed"] = rep.all_passed();
  summary["T"] = s.T;
  summary["c"] = s.c;
  summary["delta"] = s.delta;
  summary["sigma"] = s.sigma;
  summary["t0"] = s.t0;
  summary["t1"] = s.t1;
  summary["k_rescale"] = rep.rescaling.scale;
  summary["k1"] = cr.k1;
  summary["k2"] = cr.k2;
  summary["boundary_terms_nonpositive"] = nonpositive;
}

inline void ucp_scenario(const ScenarioConfig& cfg, OutputSink& sink, nlohmann::ordered_json& summary) {
  const Grid g = cfg.grid();
  const auto s = setup_from(cfg);
  const auto sys = LinearCoupledSystem::bresse_linearized(cfg.beam, g);
  const auto sweep = ucp_sweep(sys, g, s.omega(), wave_integrator(cfg, g, s.T), cfg.ucp_samples,
                               static_cast<unsigned>(cfg.seed), cfg.ucp_modes);
  CsvTable t({"sample", "observability_ratio = sup_t ||u||_L2(omega) / sqrt(F_u(0))"});
  for (size_t k = 0; k < sweep.ratios.size(); ++k) t.row({double(k), sweep.ratios[k]});
  sink.write("ucp_report.csv", t.str());
  summary["T"] = s.T;
  summary["omega"] = {s.omega().lo, s.omega().hi};
  summary["samples"] = sweep.ratios.size();
  summary["min_observability_ratio"] = sweep.min_ratio;
  summary["argmin"] = sweep.argmin;
}

inline void quasi_scenario(const ScenarioConfig& cfg, OutputSink& sink, nlohmann::ordered_json& summary) {
  const Model m = cfg.model();
  const Grid g = cfg.grid();
  const auto ic = cfg.integrator();
  std::mt19937_64 rng(cfg.seed);
  const StateZ base = initial_state(cfg.initial, g, rng);
  const auto ref = simulate(base, m, g, ic);
  InitialSpec pert{"random", cfg.quasi_perturbation, cfg.initial.modes};
  CsvTable t({"pair", "t", "dist_sq = ||Z1-Z2||_H^2", "seminorm_sup = sup_s sum ||u1-u2||_{2p}^2",
              "bound = c1 exp(-omega t) dist_sq(0) + c1 seminorm_sup"});
  double worst = 0.0;
  for (int k = 0; k < cfg.quasi_pairs; ++k) {
    const StateZ z = base + initial_state(pert, g, rng);
    const auto tr = simulate(z, m, g, ic);
    const auto q = quasi_stability_terms(tr, ref, m.beam, m.source.exponent());
    const auto f = fit_decay_rate(q.times, q.h_distance_sq, cfg.decay_skip);
    const auto chk = si_check(q, f);
    worst = std::max(worst, chk.max_violation);
    for (size_t i = 0; i < q.times.size(); ++i)
      t.row({double(k), q.times[i], q.h_distance_sq[i], q.seminorm_sup[i], chk.bound[i]});
  }
  sink.write("quasi.csv", t.str());
  summary["pairs"] = cfg.quasi_pairs;
  summary["max_relative_violation"] = worst;
}

}  // namespace detail

/// Runs the configured scenario into `out_dir`. Errors become error.json and
/// a nonzero exit code.
inline RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir) {
  detail::OutputSink sink(out_dir);
  RunResult res;
  nlohmann::ordered_json summary;
  try {
    sink.write("effective_config.yaml", effective_config_yaml(cfg));
    if (cfg.scenario == "simulate") detail::simulate_like(cfg, sink, summary, false);
    else if (cfg.scenario == "decay") detail::simulate_like(cfg, sink, summary, true);
    else if (cfg.scenario == "stationary") detail::stationary_scenario(cfg, sink, summary);
    else if (cfg.scenario == "carleman") detail::carleman_scenario(cfg, sink, summary);
    else if (cfg.scenario == "ucp") detail::ucp_scenario(cfg, sink, summary);
    else if (cfg.scenario == "quasi-stability") detail::quasi_scenario(cfg, sink, summary);
    else fail(ErrorKind::ValidationError, "unknown scenario '" + cfg.scenario + "'");
  } catch (const Error& e) {
    nlohmann::ordered_json err{{"kind", to_string(e.kind())}, {"message", e.what()}};
    std::ofstream(sink.dir() / "error.json", std::ios::binary) << err.dump(2) << "\n";
    res.exit_code = 2;
    res.files = sink.names();
    res.files.push_back("error.json");
    return res;
  }
  nlohmann::ordered_json manifest{
      {"scenario", cfg.scenario},
      {"label", cfg.beam.label()},
      {"seed", cfg.seed},
      {"config_fnv1a64", hex64(fnv1a64(cfg.source_text))},
      {"effective_config_fnv1a64", hex64(fnv1a64(effective_config_yaml(cfg)))},
      {"files", sink.files()},
      {"summary", summary},
  };
  std::ofstream(sink.dir() / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
  res.files = sink.names();
  res.files.push_back("manifest.json");
  res.summary = summary;
  return res;
}

}  // namespace bresse

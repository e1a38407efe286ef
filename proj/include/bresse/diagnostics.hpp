#pragma once

// Energy bookkeeping, decay fits, distance to the stationary set and the
// quasi-stability terms, all computed from recorded trajectories.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bresse/discretize.hpp"
#include "bresse/errors.hpp"
#include "bresse/evolve.hpp"
#include "bresse/model.hpp"
#include "bresse/stationary.hpp"

namespace bresse {

// The identity closes with the normalization
//   energy = E_Z + 2 int F,   dissipation = 2 int int sum a_i g_i(v_i) v_i,
// the factor 2 coming from E_Z = ||Z||_H^2 (no 1/2 in front of the kinetic term).
struct EnergyReport {
  std::vector<double> times;
  std::vector<double> E_Z;          // ||Z||_H^2
  std::vector<double> F_integral;   // int F(phi, psi, w) dx
  std::vector<double> energy;       // E_Z + 2 int F
  std::vector<double> dissipation;  // cumulative
  std::vector<double> residual;     // energy(t) - energy(0) + dissipation(t)
  std::vector<double> tolerance;    // 10 newton_tol * steps so far
  std::vector<size_t> monotonicity_violations;  // sample k where energy rose beyond tolerance

  size_t size() const { return times.size(); }
  bool monotone() const { return monotonicity_violations.empty(); }
  double max_abs_residual() const {
    double m = 0.0;
    for (double r : residual) m = std::max(m, std::abs(r));
    return m;
  }
  bool identity_holds() const {
    for (size_t k = 0; k < size(); ++k)
      if (std::abs(residual[k]) > tolerance[k]) return false;
    return true;
  }
};

inline EnergyReport energy_report(const Trajectory& traj, const Model& m, double newton_tol = 1e-10) {
  const Grid& g = traj.grid;
  EnergyReport rep;
  const size_t N = traj.size();
  for (size_t k = 0; k < N; ++k) {
    const StateZ& z = traj.states[k];
    const double ez = h_norm_squared(z, m.beam, g);
    const double fi = discrete_F_energy(z.phi, z.psi, z.w, m.source, g);
    rep.times.push_back(traj.times[k]);
    rep.E_Z.push_back(ez);
    rep.F_integral.push_back(fi);
    rep.energy.push_back(ez + 2.0 * fi);
    rep.dissipation.push_back(traj.dissipation[k]);
    rep.residual.push_back(rep.energy[k] - rep.energy[0] + traj.dissipation[k]);
    const double steps = std::round(traj.times[k] / traj.dt);
    rep.tolerance.push_back(10.0 * newton_tol * std::max(1.0, steps));
  }
  for (size_t k = 1; k < N; ++k) {
    const double steps = std::round((traj.times[k] - traj.times[k - 1]) / traj.dt);
    const double slack = 10.0 * newton_tol * std::max(1.0, steps) + 1e-14 * std::abs(rep.energy[k - 1]);
    if (rep.energy[k] > rep.energy[k - 1] + slack) rep.monotonicity_violations.push_back(k);
  }
  return rep;
}

/// Constants of C_E ||Z||^2 - 2 L c_F <= energy <= ||Z||^2 + c_E (1 + ||Z||^{p+1}),
/// estimated over the samples (smallest admissible c_E, largest admissible C_E).
struct EnergyBounds {
  double C_E = 0.0;
  double c_E = 0.0;
  double offset = 0.0;  // 2 L c_F
  double exponent = 1.0;
  bool holds = false;
};

inline EnergyBounds energy_bounds(const EnergyReport& rep, const Model& m) {
  EnergyBounds b;
  b.offset = 2.0 * m.beam.length * m.source.c_F();
  b.exponent = m.source.exponent();
  double CE = std::numeric_limits<double>::infinity(), cE = 0.0;
  for (size_t k = 0; k < rep.size(); ++k) {
    const double n2 = rep.E_Z[k];
    if (n2 > 0) CE = std::min(CE, (rep.energy[k] + b.offset) / n2);
    const double up = (rep.energy[k] - n2) / (1.0 + std::pow(std::sqrt(n2), b.exponent + 1.0));
    cE = std::max(cE, up);
  }
  if (!std::isfinite(CE)) CE = 1.0;
  b.C_E = std::min(CE, 1.0);
  b.c_E = cE;
  b.holds = b.C_E > 0 && std::isfinite(b.c_E);
  return b;
}

struct DecayFit {
  double omega = 0.0;        // rate in E ~ A exp(-omega t)
  double amplitude = 0.0;    // A
  double c1 = 0.0;           // A / E(0)
  double c1_envelope = 0.0;  // max_t E(t) exp(omega t) / E(0) over all samples
  double residual = 0.0;     // RMS of the log-fit residual over the window
  double window_start = 0.0, window_end = 0.0;
  int samples = 0;
};

/// Least squares of log values on t over the window that drops the first
/// `skip_fraction` of the horizon.
inline DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& values,
                               double skip_fraction = 0.25) {
  require(t.size() == values.size() && !t.empty(), "times and values must match");
  require(skip_fraction >= 0 && skip_fraction < 1, "skip fraction must lie in [0, 1)");
  const double t0 = t.front() + skip_fraction * (t.back() - t.front());
  std::vector<double> ts, ys;
  for (size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t0 - 1e-12) continue;
    if (!(values[k] > 0)) fail(ErrorKind::NonpositiveEnergy, "nonpositive value at t = " + std::to_string(t[k]));
    ts.push_back(t[k]);
    ys.push_back(std::log(values[k]));
  }
  if (ts.size() < 20) fail(ErrorKind::InvalidArgument, "fewer than 20 samples in the fit window");
  const double n = static_cast<double>(ts.size());
  double mt = 0, my = 0;
  for (size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    my += ys[k];
  }
  mt /= n;
  my /= n;
  double stt = 0, sty = 0;
  for (size_t k = 0; k < ts.size(); ++k) {
    stt += (ts[k] - mt) * (ts[k] - mt);
    sty += (ts[k] - mt) * (ys[k] - my);
  }
  const double slope = sty / stt;
  const double icpt = my - slope * mt;
  DecayFit fit;
  fit.omega = -slope;
  fit.amplitude = std::exp(icpt);
  double ss = 0;
  for (size_t k = 0; k < ts.size(); ++k) {
    const double r = ys[k] - (icpt + slope * ts[k]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  fit.window_start = ts.front();
  fit.window_end = ts.back();
  fit.samples = static_cast<int>(ts.size());
  const double e0 = values.front();
  if (e0 > 0) {
    fit.c1 = fit.amplitude / e0;
    double env = 0;
    for (size_t k = 0; k < t.size(); ++k) env = std::max(env, values[k] * std::exp(fit.omega * (t[k] - t.front())));
    fit.c1_envelope = env / e0;
  }
  return fit;
}

inline DecayFit fit_decay_rate(const EnergyReport& rep, double skip_fraction = 0.25) {
  return fit_decay_rate(rep.times, rep.E_Z, skip_fraction);
}

/// min over the set of ||Z(t) - Z*||_H at every sample.
inline std::vector<double> distance_to_stationary(const Trajectory& traj,
                                                  const std::vector<StationarySolution>& set,
                                                  const BeamParameters& p) {
  if (set.empty()) fail(ErrorKind::EmptyStationarySet, "stationary set is empty");
  std::vector<StateZ> targets;
  for (const auto& s : set) {
    if (s.phi.size() != traj.grid.n) fail(ErrorKind::GridMismatch, "stationary solution on another grid");
    targets.push_back(s.to_state());
  }
  std::vector<double> d;
  d.reserve(traj.size());
  for (const auto& z : traj.states) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : targets) best = std::min(best, h_distance(z, s, p, traj.grid));
    d.push_back(best);
  }
  return d;
}

/// Least-squares slope of the last `fraction` of a series.
inline double trend_slope(const std::vector<double>& t, const std::vector<double>& y, double fraction = 0.25) {
  require(t.size() == y.size() && t.size() >= 2, "series too short");
  const size_t first = static_cast<size_t>(std::floor((1.0 - fraction) * (t.size() - 1)));
  double mt = 0, my = 0, n = 0;
  for (size_t k = first; k < t.size(); ++k, ++n) {
    mt += t[k];
    my += y[k];
  }
  mt /= n;
  my /= n;
  double stt = 0, sty = 0;
  for (size_t k = first; k < t.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    sty += (t[k] - mt) * (y[k] - my);
  }
  return stt > 0 ? sty / stt : 0.0;
}

struct QuasiStabilityTerms {
  std::vector<double> times;
  std::vector<double> h_distance_sq;  // ||Z1 - Z2||_H^2
  std::vector<double> seminorm_sup;   // sup_{s <= t} sum_c ||u1_c - u2_c||_{2p}^2
};

inline QuasiStabilityTerms quasi_stability_terms(const Trajectory& a, const Trajectory& b, const BeamParameters& p,
                                                 double exponent) {
  if (!(a.grid == b.grid) || a.size() != b.size()) fail(ErrorKind::GridMismatch, "trajectories differ in grid or length");
  for (size_t k = 0; k < a.size(); ++k)
    if (std::abs(a.times[k] - b.times[k]) > 1e-12 * (1.0 + std::abs(a.times[k])))
      fail(ErrorKind::GridMismatch, "sample times differ");
  QuasiStabilityTerms q;
  double sup = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const StateZ d = a.states[k] - b.states[k];
    q.times.push_back(a.times[k]);
    q.h_distance_sq.push_back(h_norm_squared(d, p, a.grid));
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double nrm = lp_norm(d.displacement(c), 2.0 * exponent, a.grid);
      s += nrm * nrm;
    }
    sup = std::max(sup, s);
    q.seminorm_sup.push_back(sup);
  }
  return q;
}

/// Pointwise test of dist(t) <= c1 exp(-omega t) dist(0) + c1 seminorm_sup(t).
struct SiCheck {
  double c1 = 0.0, omega = 0.0;
  std::vector<double> bound;
  double max_violation = 0.0;  // max over samples of (lhs - bound)_+ / bound
  bool holds() const { return max_violation <= 0.0; }
};

inline SiCheck si_check(const QuasiStabilityTerms& q, double c1, double omega) {
  SiCheck s;
  s.c1 = c1;
  s.omega = omega;
  const double d0 = q.h_distance_sq.empty() ? 0.0 : q.h_distance_sq.front();
  const double t0 = q.times.empty() ? 0.0 : q.times.front();
  for (size_t k = 0; k < q.times.size(); ++k) {
    const double b = c1 * std::exp(-omega * (q.times[k] - t0)) * d0 + c1 * q.seminorm_sup[k];
    s.bound.push_back(b);
    const double lhs = q.h_distance_sq[k];
    if (lhs > b) s.max_violation = std::max(s.max_violation, b > 0 ? (lhs - b) / b : 1.0);
  }
  return s;
}

/// Uses the fitted rate and the envelope constant of the fit.
inline SiCheck si_check(const QuasiStabilityTerms& q, const DecayFit& f) {
  return si_check(q, std::max(1.0, f.c1_envelope), f.omega);
}

/// Numerical shadow of the gradient-structure argument: total dissipation and
/// the largest velocity L^2 norm on the damping core (L1, L2).
struct DissipationShadow {
  double total_dissipation = 0.0;
  double max_core_velocity = 0.0;
};

inline DissipationShadow dissipation_shadow(const Trajectory& traj, const DampingSpec& damping) {
  DissipationShadow s;
  s.total_dissipation = traj.dissipation.empty() ? 0.0 : traj.dissipation.back();
  const Interval core = damping.intersection();
  const Grid& g = traj.grid;
  for (const auto& z : traj.states) {
    double v = 0.0;
    for (int j = 0; j < g.n; ++j) {
      if (!core.contains(g.x(j))) continue;
      for (int c = 0; c < 3; ++c) v += z.velocity(c)[j] * z.velocity(c)[j];
    }
    s.max_core_velocity = std::max(s.max_core_velocity, std::sqrt(g.h * v));
  }
  return s;
}

}  // namespace bresse

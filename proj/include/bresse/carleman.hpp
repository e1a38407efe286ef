#pragma once

// Pseudo-convex weights, admissible parameter selection, the region Q(sigma),
// boundary terms of the Carleman estimate and the unique-continuation
// (observability) experiments for linear coupled wave systems on (0, L).

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bresse/discretize.hpp"
#include "bresse/errors.hpp"
#include "bresse/evolve.hpp"
#include "bresse/model.hpp"

namespace bresse {

// ---------------------------------------------------------------------------
// Weights d_1 = (x + L)^2 / 2, d_2 = (x - 2L)^2 / 2
// ---------------------------------------------------------------------------

inline double weight_d(int j, double x, double L) {
  require(j == 1 || j == 2, "weight index must be 1 or 2");
  const double s = j == 1 ? x + L : x - 2.0 * L;
  return 0.5 * s * s;
}

inline double weight_d_prime(int j, double x, double L) {
  require(j == 1 || j == 2, "weight index must be 1 or 2");
  return j == 1 ? x + L : x - 2.0 * L;
}

/// Largest value of d_j on the closed subdomain; d_1 increases and d_2
/// decreases on [0, L], so both maxima sit at L0.
inline double max_weight(int j, double L, double L0) { return weight_d(j, L0, L); }

struct TimeParameters {
  double T0_1 = 0.0, T0_2 = 0.0;
  double T = 0.0, c = 0.0, delta = 0.0;
  double T0() const { return std::max(T0_1, T0_2); }
};

/// T0_j^2 = 4 max d_j; T defaults to 1.05 max T0_j; c is the midpoint of the
/// admissible interval (T0^2 / T^2, 1) and delta a fraction of the slack.
inline TimeParameters select_time_parameters(double L, double L0, double delta_frac = 0.5,
                                             std::optional<double> T = std::nullopt, double T_factor = 1.05) {
  require(L > 0 && L0 > 0 && L0 < L, "need 0 < L0 < L");
  require(delta_frac > 0 && delta_frac < 1, "delta_frac must lie in (0, 1)");
  TimeParameters tp;
  const double m1 = max_weight(1, L, L0), m2 = max_weight(2, L, L0);
  const double mx = std::max(m1, m2);
  tp.T0_1 = std::sqrt(4.0 * m1);
  tp.T0_2 = std::sqrt(4.0 * m2);
  tp.T = T ? *T : T_factor * tp.T0();
  const double T2 = tp.T * tp.T;
  if (!(T2 > 4.0 * mx * (1.0 + 8.0 * std::numeric_limits<double>::epsilon())))
    fail(ErrorKind::Infeasible, "T = " + std::to_string(tp.T) + " does not exceed T0 = " + std::to_string(tp.T0()));
  tp.c = 0.5 * (1.0 + 4.0 * mx / T2);
  tp.delta = delta_frac * (tp.c * T2 - 4.0 * mx) / 4.0;
  if (!(tp.c < 1.0 && tp.delta > 0 && tp.c * T2 > 4.0 * mx + 4.0 * tp.delta))
    fail(ErrorKind::Infeasible, "no admissible (c, delta) for T = " + std::to_string(tp.T));
  return tp;
}

struct CarlemanSetup {
  double L = 1.0, L0 = 0.5, epsilon = 0.2;
  double T = 0.0, c = 0.0, delta = 0.0;
  double sigma = 0.0, sigma_star = 0.0, t0 = 0.0, t1 = 0.0;
  std::vector<double> taus = {1, 2, 4, 8, 16};

  Interval omega() const { return intersect({L0 - 0.5 * epsilon, L0 + 0.5 * epsilon}, {0.0, L}); }
  Interval subdomain(int j) const { return j == 1 ? Interval{0.0, L0} : Interval{L0, L}; }
  Interval V(int j) const {
    return j == 1 ? intersect({0.0, L0 - 0.25 * epsilon}, {0.0, L}) : intersect({L0 + 0.25 * epsilon, L}, {0.0, L});
  }
  double max_d() const { return std::max(max_weight(1, L, L0), max_weight(2, L, L0)); }
  double phi(int j, double x, double t) const {
    const double s = t - 0.5 * T;
    return weight_d(j, x, L) - c * s * s;
  }
};

struct SigmaWindow {
  double t0 = 0.0, t1 = 0.0, sigma = 0.0, sigma_star = 0.0;
};

/// Widest window |t - T/2| <= r with min_j min_x phi_j >= sigma. The minimum
/// of d_j over its closed subdomain is L^2 / 2, so r^2 = (L^2/2 - sigma) / c,
/// shrunk by ulps until the inequality holds in floating point.
inline SigmaWindow sigma_window(double L, double T, double c, double sigma) {
  require(c > 0 && c < 1 && T > 0, "need 0 < c < 1, T > 0");
  require(sigma > 0, "sigma must be positive");
  const double dmin = 0.5 * L * L;
  if (!(sigma < dmin)) fail(ErrorKind::EmptyWindow, "sigma >= min d_j = L^2/2");
  double r = std::sqrt((dmin - sigma) / c);
  r = std::min(r, std::nextafter(0.5 * T, 0.0));
  while (r > 0 && !(dmin - c * r * r >= sigma)) r = std::nextafter(r, 0.0);
  SigmaWindow w;
  w.sigma = sigma;
  w.sigma_star = 0.9 * sigma;
  w.t0 = 0.5 * T - r;
  w.t1 = 0.5 * T + r;
  // t0, t1 are rounded; pull them inward until the endpoint values pass.
  auto ok = [&](double t) {
    const double s = t - 0.5 * T;
    return dmin - c * s * s >= sigma;
  };
  while (!ok(w.t0)) w.t0 = std::nextafter(w.t0, T);
  while (!ok(w.t1)) w.t1 = std::nextafter(w.t1, 0.0);
  return w;
}

struct SetupOptions {
  double L = 1.0, L0 = 0.5, epsilon = 0.2;
  std::optional<double> T, c, delta;
  double delta_frac = 0.5;
  std::optional<double> sigma;
  double sigma_frac = 0.5;  // sigma = sigma_frac * L^2 / 2 unless given
  std::vector<double> taus = {1, 2, 4, 8, 16};
};

inline CarlemanSetup make_setup(const SetupOptions& o) {
  require(o.epsilon > 0, "epsilon must be positive");
  CarlemanSetup s;
  s.L = o.L;
  s.L0 = o.L0;
  s.epsilon = o.epsilon;
  s.taus = o.taus;
  if (o.c) {
    require(o.T.has_value(), "explicit c needs explicit T");
    s.T = *o.T;
    s.c = *o.c;
    require(s.c > 0 && s.c < 1, "c must lie in (0, 1)");
    const double slack = s.c * s.T * s.T - 4.0 * s.max_d();
    if (!(slack > 0)) fail(ErrorKind::Infeasible, "c T^2 <= 4 max d_j");
    s.delta = o.delta ? *o.delta : o.delta_frac * slack / 4.0;
    if (!(s.delta > 0 && s.c * s.T * s.T > 4.0 * s.max_d() + 4.0 * s.delta))
      fail(ErrorKind::Infeasible, "c T^2 <= 4 max d_j + 4 delta");
  } else {
    const auto tp = select_time_parameters(o.L, o.L0, o.delta_frac, o.T);
    s.T = tp.T;
    s.c = tp.c;
    s.delta = o.delta ? *o.delta : tp.delta;
    if (!(s.c * s.T * s.T > 4.0 * s.max_d() + 4.0 * s.delta))
      fail(ErrorKind::Infeasible, "c T^2 <= 4 max d_j + 4 delta");
  }
  const double sigma = o.sigma ? *o.sigma : o.sigma_frac * 0.5 * o.L * o.L;
  const auto w = sigma_window(o.L, s.T, s.c, sigma);
  s.sigma = w.sigma;
  s.sigma_star = w.sigma_star;
  s.t0 = w.t0;
  s.t1 = w.t1;
  return s;
}

struct WeightValue {
  double d = 0.0;
  double phi = 0.0;
  double phi_t = 0.0;
  double grad = 0.0;          // coefficient of d_x in the metric gradient: gamma d_j'
  double grad_norm_sq = 0.0;  // |grad_g phi_j|_g^2 = gamma (d_j')^2
};

inline WeightValue weight_eval(int j, double x, double t, const CarlemanSetup& s, double gamma = 1.0) {
  const Interval om = s.subdomain(j);
  if (x < om.lo || x > om.hi || t < 0 || t > s.T)
    fail(ErrorKind::OutOfDomain, "(x, t) outside the closed subdomain times [0, T]");
  WeightValue v;
  v.d = weight_d(j, x, s.L);
  v.phi = s.phi(j, x, t);
  v.phi_t = -2.0 * s.c * (t - 0.5 * s.T);
  const double dp = weight_d_prime(j, x, s.L);
  v.grad = gamma * dp;
  v.grad_norm_sq = gamma * dp * dp;
  return v;
}

inline bool q_sigma_membership(double x, double t, const CarlemanSetup& s) {
  return std::min(s.phi(1, x, t), s.phi(2, x, t)) >= s.sigma;
}

/// k_ij = inf |grad_g d_j|^2 / d_j = 2 gamma_i for both weights. The scale
/// factor s makes s k_ij > 4 for all i when d_j is replaced by s d_j.
struct Rescaling {
  std::vector<double> k;  // unscaled k_i (same for j = 1, 2)
  double scale = 1.0;
};

inline Rescaling rescale_for_k(const std::vector<double>& gammas) {
  require(!gammas.empty(), "need at least one speed");
  Rescaling r;
  for (double g : gammas) r.k.push_back(2.0 * g);
  const double kmin = *std::min_element(r.k.begin(), r.k.end());
  r.scale = kmin > 4.0 ? 1.0 : 1.25 * 4.0 / kmin;
  return r;
}

// ---------------------------------------------------------------------------
// Closed-form verification sweep
// ---------------------------------------------------------------------------

struct SetupCheck {
  std::string name;
  bool passed = true;
  double value = 0.0;
  std::string detail;
};

struct SetupReport {
  std::vector<SetupCheck> checks;
  double es_lhs = 0.0, es_rhs = 0.0;
  Rescaling rescaling;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const SetupCheck& get(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    fail(ErrorKind::InvalidArgument, "no check named " + name);
  }
};

inline SetupReport verify_setup(const CarlemanSetup& s, const std::vector<double>& gammas, int nx = 1025, int nt = 1025) {
  require(nx >= 3 && nt >= 3, "sweep too coarse");
  SetupReport rep;
  const double L = s.L;
  auto xs = [&](int j) {
    const Interval om = s.subdomain(j);
    std::vector<double> v;
    for (int k = 0; k < nx; ++k) v.push_back(om.lo + (om.hi - om.lo) * k / (nx - 1));
    return v;
  };

  {  // 1: d_j is a quadratic polynomial; third differences vanish.
    SetupCheck c{"lemma.1", true, 0.0, {}};
    const double hh = 1.0 / 1024;
    for (int j = 1; j <= 2; ++j)
      for (double x : xs(j)) {
        const double t3 = weight_d(j, x + 2 * hh, L) - 3 * weight_d(j, x + hh, L) + 3 * weight_d(j, x, L) -
                          weight_d(j, x - hh, L);
        c.value = std::max(c.value, std::abs(t3) / (hh * hh * hh));
      }
    c.passed = c.value <= 1e-3;
    c.detail = "max scaled third difference";
    rep.checks.push_back(c);
  }
  {  // 2: metric Hessian D^2 d_j(X, X) = a^2 d_j'' with d_j'' = 1.
    SetupCheck c{"lemma.2", true, 0.0, {}};
    const double hh = 1.0 / 1024;
    for (int j = 1; j <= 2; ++j)
      for (double x : xs(j)) {
        const double d2 = (weight_d(j, x + hh, L) - 2 * weight_d(j, x, L) + weight_d(j, x - hh, L)) / (hh * hh);
        c.value = std::max(c.value, std::abs(d2 - 1.0));
      }
    c.passed = c.value <= 1e-8;
    c.detail = "max |d_j'' - 1|";
    rep.checks.push_back(c);
  }
  {  // 3: inf |grad_g d_j|_g > 0.
    SetupCheck c{"lemma.3", true, 0.0, {}};
    c.value = std::numeric_limits<double>::infinity();
    for (double g : gammas)
      for (int j = 1; j <= 2; ++j)
        for (double x : xs(j)) c.value = std::min(c.value, std::sqrt(g) * std::abs(weight_d_prime(j, x, L)));
    c.passed = c.value > 0;
    c.detail = "inf sqrt(gamma) |d_j'|";
    rep.checks.push_back(c);
  }
  {  // 4: min over the closed subdomain equals L^2 / 2.
    SetupCheck c{"lemma.4", true, 0.0, {}};
    double worst = 0.0;
    for (int j = 1; j <= 2; ++j) {
      double mn = std::numeric_limits<double>::infinity();
      for (double x : xs(j)) mn = std::min(mn, weight_d(j, x, L));
      worst = std::max(worst, std::abs(mn - 0.5 * L * L));
      c.value = mn;
    }
    c.passed = worst <= 1e-14 * L * L;
    c.detail = "min d_j on closed subdomain";
    rep.checks.push_back(c);
  }
  {  // 5: <grad_g d_j, nu>_g < 0 on {0, L} in the closure of V_j.
    SetupCheck c{"lemma.5", true, 0.0, {}};
    c.value = -std::numeric_limits<double>::infinity();
    for (double g : gammas) {
      if (s.V(1).lo <= 0.0 && !s.V(1).empty()) c.value = std::max(c.value, -std::sqrt(g) * weight_d_prime(1, 0.0, L));
      if (s.V(2).hi >= L && !s.V(2).empty()) c.value = std::max(c.value, std::sqrt(g) * weight_d_prime(2, L, L));
    }
    c.passed = c.value < 0;
    c.detail = "largest boundary normal component";
    rep.checks.push_back(c);
  }
  {  // (c): c T^2 > 4 max d_j + 4 delta, with 0 < c < 1.
    SetupCheck c{"(c)", true, 0.0, {}};
    c.value = s.c * s.T * s.T - 4.0 * s.max_d() - 4.0 * s.delta;
    c.passed = c.value > 0 && s.c > 0 && s.c < 1 && s.delta > 0;
    c.detail = "c T^2 - 4 max d - 4 delta";
    rep.checks.push_back(c);
  }
  {  // (phi.1)
    SetupCheck c{"(phi.1)", true, 0.0, {}};
    c.value = -std::numeric_limits<double>::infinity();
    bool symmetric = true;
    for (int j = 1; j <= 2; ++j)
      for (double x : xs(j)) {
        const double a = s.phi(j, x, 0.0), b = s.phi(j, x, s.T);
        symmetric = symmetric && a == b;
        c.value = std::max(c.value, a);
      }
    c.passed = symmetric && c.value <= -s.delta;
    c.detail = "max phi_j(x, 0), must be <= -delta";
    rep.checks.push_back(c);
  }
  {  // (phi.2) and Omega_j x [t0, t1] inside Q(sigma).
    SetupCheck c2{"(phi.2)", true, 0.0, {}}, cq{"Q(sigma) inclusion", true, 0.0, {}};
    c2.value = std::numeric_limits<double>::infinity();
    bool inside = true;
    for (int j = 1; j <= 2; ++j)
      for (double x : xs(j))
        for (int k = 0; k < nt; ++k) {
          const double t = s.t0 + (s.t1 - s.t0) * k / (nt - 1);
          c2.value = std::min(c2.value, s.phi(j, x, t));
          inside = inside && q_sigma_membership(x, t, s);
        }
    c2.passed = c2.value >= s.sigma && s.t0 > 0 && s.t0 < 0.5 * s.T && s.t1 > 0.5 * s.T && s.t1 < s.T;
    c2.detail = "min phi_j on closed subdomain times [t0, t1]";
    cq.passed = inside;
    cq.value = inside ? 1.0 : 0.0;
    rep.checks.push_back(c2);
    rep.checks.push_back(cq);
  }
  {  // (es): |phi_t|^2 + |grad_g phi|^2 <= 4 (1 + 7c) sigma* / (eps (1 - c)).
    SetupCheck c{"(es)", true, 0.0, {}};
    double lhs = 0.0;
    for (double g : gammas)
      for (int j = 1; j <= 2; ++j)
        for (double x : xs(j))
          for (int k = 0; k < nt; ++k) {
            const auto v = weight_eval(j, x, s.T * k / (nt - 1), s, g);
            lhs = std::max(lhs, v.phi_t * v.phi_t + v.grad_norm_sq);
          }
    rep.es_lhs = lhs;
    rep.es_rhs = 4.0 * (1.0 + 7.0 * s.c) * s.sigma_star / (s.epsilon * (1.0 - s.c));
    c.value = lhs;
    c.passed = lhs <= rep.es_rhs;
    c.detail = "max |phi_t|^2 + |grad phi|^2 against bound " + std::to_string(rep.es_rhs);
    rep.checks.push_back(c);
  }
  rep.rescaling = rescale_for_k(gammas);
  {
    SetupCheck c{"k_ij rescaled", true, 0.0, {}};
    const double kmin = *std::min_element(rep.rescaling.k.begin(), rep.rescaling.k.end());
    c.value = rep.rescaling.scale * kmin;
    c.passed = c.value > 4.0;
    c.detail = "scale " + std::to_string(rep.rescaling.scale);
    rep.checks.push_back(c);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Cutoffs and subdomain problems
// ---------------------------------------------------------------------------

inline double smoothstep5(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return std::min(1.0, s * s * s * (10.0 + s * (-15.0 + 6.0 * s)));
}

/// chi_1 = 1 on [0, L0 - eps/4], 0 on [L0, L]; chi_2 mirrored.
inline double cutoff(int j, double x, const CarlemanSetup& s) {
  const double w = 0.25 * s.epsilon;
  if (j == 1) return smoothstep5((s.L0 - x) / w);
  return smoothstep5((x - s.L0) / w);
}

/// max |chi_1 u + chi_2 u - u| over the grid nodes.
inline double cutoff_decomposition_residual(const Vector& u, const Grid& g, const CarlemanSetup& s) {
  double r = 0.0;
  for (int k = 0; k < g.n; ++k) {
    const double x = g.x(k);
    r = std::max(r, std::abs(cutoff(1, x, s) * u[k] + cutoff(2, x, s) * u[k] - u[k]));
  }
  return r;
}

struct SubdomainRuns {
  WaveTrajectory left, right;  // Omega_1, Omega_2
  const WaveTrajectory& on(int j) const { return j == 1 ? left : right; }
};

/// Solves the cut-off problems on Omega_1 and Omega_2 with the solution held
/// at zero on omega_j = closure(Omega_j) intersected with omega.
inline SubdomainRuns solve_subdomains(const LinearCoupledSystem& sys, const Grid& g, const std::vector<Vector>& u0,
                                      const std::vector<Vector>& u1, const CarlemanSetup& s,
                                      const IntegratorConfig& cfg, bool constrained = true) {
  require(std::abs(g.length - s.L) <= 1e-12 * s.L, "grid length differs from setup L");
  const double idx = s.L0 / g.h;
  const int i0 = static_cast<int>(std::lround(idx));
  require(std::abs(idx - i0) <= 1e-9 && i0 >= 4 && g.n + 1 - i0 >= 4, "L0 must be a grid node away from the ends");
  const int m = sys.components();
  const int n1 = i0 - 1, n2 = g.n - i0;
  const Grid g1{n1, s.L0, g.h}, g2{n2, s.L - s.L0, g.h};
  std::vector<Vector> a0(m), a1(m), b0(m), b1(m);
  for (int i = 0; i < m; ++i) {
    check_length(u0[i], g);
    check_length(u1[i], g);
    a0[i] = Vector(n1);
    a1[i] = Vector(n1);
    b0[i] = Vector(n2);
    b1[i] = Vector(n2);
    for (int k = 0; k < n1; ++k) {
      const double chi = cutoff(1, g.x(k), s);
      a0[i][k] = chi * u0[i][k];
      a1[i][k] = chi * u1[i][k];
    }
    for (int k = 0; k < n2; ++k) {
      const int gk = i0 + k;
      const double chi = cutoff(2, g.x(gk), s);
      b0[i][k] = chi * u0[i][gk];
      b1[i][k] = chi * u1[i][gk];
    }
  }
  IntegratorConfig c = cfg;
  c.t_end = s.T;
  SubdomainRuns runs;
  if (constrained) {
    const auto m1 = OmegaConstraint::around(s.L0, s.epsilon, g1, 0.0);
    const auto m2 = OmegaConstraint::around(s.L0, s.epsilon, g2, s.L0);
    runs.left = simulate_linear_coupled(a0, a1, sys.restrict_to(0, n1), g1, c, &m1, 0.0);
    runs.right = simulate_linear_coupled(b0, b1, sys.restrict_to(i0, n2), g2, c, &m2, s.L0);
  } else {
    runs.left = simulate_linear_coupled(a0, a1, sys.restrict_to(0, n1), g1, c, nullptr, 0.0);
    runs.right = simulate_linear_coupled(b0, b1, sys.restrict_to(i0, n2), g2, c, nullptr, s.L0);
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Boundary terms
// ---------------------------------------------------------------------------

namespace detail {

/// Second-order one-sided derivative at the left (side = -1) or right (+1)
/// Dirichlet boundary of a grid.
inline double boundary_derivative(const Vector& u, double h, int side) {
  const int n = static_cast<int>(u.size());
  if (side < 0) return (4.0 * u[0] - (n > 1 ? u[1] : 0.0)) / (2.0 * h);
  return (-4.0 * u[n - 1] + (n > 1 ? u[n - 2] : 0.0)) / (2.0 * h);
}

/// sum_k w_k exp(e_k) evaluated with the largest exponent factored out.
class LogSum {
 public:
  void add(double exponent, double weight) {
    if (weight == 0.0) return;
    terms_.emplace_back(exponent, weight);
    mx_ = std::max(mx_, exponent);
  }
  double value() const {
    if (terms_.empty()) return 0.0;
    double s = 0.0;
    for (const auto& [e, w] : terms_) s += w * std::exp(e - mx_);
    return s * std::exp(mx_);
  }

 private:
  std::vector<std::pair<double, double>> terms_;
  double mx_ = -std::numeric_limits<double>::infinity();
};

}  // namespace detail

struct BoundaryTerm {
  double total = 0.0;
  double left = 0.0;   // contribution of the left end of Omega_j
  double right = 0.0;  // contribution of the right end
};

/// BT_tau of component i of a subdomain trajectory on Omega_j: trapezoid in
/// time of 2 tau e^{2 tau phi_j} <grad v, nu>^2 <grad d_j, nu> at both ends.
inline BoundaryTerm boundary_term(const WaveTrajectory& tr, int i, int j, const CarlemanSetup& s, double tau,
                                  double gamma) {
  require(tau > 0, "tau must be positive");
  require(tr.size() >= 2, "trajectory needs at least two samples");
  const double xl = tr.offset, xr = tr.offset + tr.grid.length;
  const double sg = std::sqrt(gamma);
  const double nl = -sg * weight_d_prime(j, xl, s.L);  // <grad d_j, nu> at the left end
  const double nr = sg * weight_d_prime(j, xr, s.L);
  detail::LogSum left, right;
  for (size_t k = 0; k < tr.size(); ++k) {
    const double t = tr.times[k];
    const double wq = (k == 0 || k + 1 == tr.size()) ? 0.5 * (tr.times[1] - tr.times[0]) : 0.5 * (tr.times[k + 1] - tr.times[k - 1]);
    const Vector& u = tr.u[k][i];
    const double dl = sg * detail::boundary_derivative(u, tr.grid.h, -1);
    const double dr = sg * detail::boundary_derivative(u, tr.grid.h, +1);
    left.add(2.0 * tau * s.phi(j, xl, t), 2.0 * tau * wq * dl * dl * nl);
    right.add(2.0 * tau * s.phi(j, xr, t), 2.0 * tau * wq * dr * dr * nr);
  }
  BoundaryTerm bt;
  bt.left = left.value();
  bt.right = right.value();
  bt.total = bt.left + bt.right;
  return bt;
}

struct CarlemanRow {
  double tau = 0.0;
  double lhs = 0.0;          // sum_{i,j} BT_tau v_{i,j}
  double energy = 0.0;       // sum_i int V_i(x, 0) + V_i(x, T) dx
  double k_T_max = 0.0;      // largest k_T with lhs >= k_T energy (lhs / energy)
  std::vector<double> bt;    // per (i, j), index 2 i + (j - 1)
};

struct CarlemanReport {
  std::vector<CarlemanRow> rows;
  double k1 = 0.0, k2 = 0.0;  // empirical equivalence constants of the gradient+velocity part
};

inline CarlemanReport carleman_inequality_check(const SubdomainRuns& runs, const LinearCoupledSystem& sys,
                                                const CarlemanSetup& s) {
  const int m = sys.components();
  const auto& A = runs.left;
  const auto& B = runs.right;
  require(A.size() == B.size() && A.size() >= 2, "subdomain runs must share sample times");
  CarlemanReport rep;
  const double energy = A.energy.front() + B.energy.front() + A.energy.back() + B.energy.back();
  for (double tau : s.taus) {
    CarlemanRow row;
    row.tau = tau;
    for (int i = 0; i < m; ++i)
      for (int j = 1; j <= 2; ++j) {
        const double v = boundary_term(runs.on(j), i, j, s, tau, sys.gamma[i]).total;
        row.bt.push_back(v);
        row.lhs += v;
      }
    row.energy = energy;
    row.k_T_max = energy > 0 ? row.lhs / energy : 0.0;
    rep.rows.push_back(row);
  }
  double k1 = std::numeric_limits<double>::infinity(), k2 = 0.0;
  for (size_t k = 0; k < A.size(); ++k) {
    double full = A.energy[k] + B.energy[k], part = 0.0;
    for (const WaveTrajectory* tr : {&A, &B})
      for (int i = 0; i < m; ++i)
        part += sys.gamma[i] * edge_norm_sq(edge_difference(tr->u[k][i], tr->grid), tr->grid) +
                l2_norm_sq(tr->ut[k][i], tr->grid);
    if (full > 0) {
      k1 = std::min(k1, part / full);
      k2 = std::max(k2, part / full);
    }
  }
  rep.k1 = std::isfinite(k1) ? k1 : 0.0;
  rep.k2 = k2;
  return rep;
}

// ---------------------------------------------------------------------------
// Observability experiments
// ---------------------------------------------------------------------------

/// sum_i ||u_i||^2_{L^2(omega)}.
inline double omega_mass(const std::vector<Vector>& u, const Grid& g, const Interval& omega, double offset = 0.0) {
  double s = 0.0;
  for (const auto& f : u)
    for (int k = 0; k < g.n; ++k)
      if (omega.contains(offset + g.x(k))) s += f[k] * f[k];
  return g.h * s;
}

struct UcpReport {
  std::vector<double> times;
  std::vector<double> omega_trace;  // ||u(t)||_{L^2(omega)}
  double trace_sup = 0.0;
  double energy0 = 0.0;             // F_u(0)
  double ratio = 0.0;               // trace_sup / sqrt(F_u(0)), 0 for zero data
  double terminal_energy = 0.0;
  double max_projection_residual = 0.0;  // constrained runs
};

inline UcpReport ucp_experiment(const LinearCoupledSystem& sys, const Grid& g, const std::vector<Vector>& u0,
                                const std::vector<Vector>& u1, const Interval& omega, const IntegratorConfig& cfg,
                                const OmegaConstraint* constraint = nullptr) {
  const auto tr = simulate_linear_coupled(u0, u1, sys, g, cfg, constraint);
  UcpReport rep;
  rep.times = tr.times;
  for (size_t k = 0; k < tr.size(); ++k) {
    const double v = std::sqrt(omega_mass(tr.u[k], g, omega));
    rep.omega_trace.push_back(v);
    rep.trace_sup = std::max(rep.trace_sup, v);
  }
  rep.energy0 = tr.energy.front();
  rep.terminal_energy = tr.energy.back();
  rep.ratio = rep.energy0 > 0 ? rep.trace_sup / std::sqrt(rep.energy0) : 0.0;
  for (double r : tr.projection_residual) rep.max_projection_residual = std::max(rep.max_projection_residual, r);
  return rep;
}

struct WaveData {
  std::vector<Vector> u0, u1;
};

/// Random sine-series data (`modes` modes per field), scaled to F_u(0) = 1.
inline WaveData random_wave_data(const LinearCoupledSystem& sys, const Grid& g, std::mt19937_64& rng,
                                 int modes = 5) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int m = sys.components();
  WaveData d{std::vector<Vector>(m, Vector::Zero(g.n)), std::vector<Vector>(m, Vector::Zero(g.n))};
  for (int i = 0; i < m; ++i)
    for (auto* f : {&d.u0[i], &d.u1[i]})
      for (int k = 1; k <= modes; ++k) {
        const double a = normal(rng) / k;
        for (int j = 0; j < g.n; ++j) (*f)[j] += a * std::sin(k * std::numbers::pi * g.x(j) / g.length);
      }
  const double e = coupled_energy(d.u0, d.u1, sys.gamma, g);
  require(e > 0, "degenerate random data");
  const double sc = 1.0 / std::sqrt(e);
  for (int i = 0; i < m; ++i) {
    d.u0[i] *= sc;
    d.u1[i] *= sc;
  }
  return d;
}

struct UcpSweep {
  std::vector<double> ratios;
  double min_ratio = 0.0;
  int argmin = -1;
};

inline UcpSweep ucp_sweep(const LinearCoupledSystem& sys, const Grid& g, const Interval& omega,
                          const IntegratorConfig& cfg, int samples, unsigned seed, int modes = 5) {
  require(samples >= 1, "need at least one sample");
  std::mt19937_64 rng(seed);
  std::vector<WaveData> data;
  for (int k = 0; k < samples; ++k) data.push_back(random_wave_data(sys, g, rng, modes));
  UcpSweep out;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (size_t k = 0; k < data.size(); ++k) {
    out.ratios.push_back(ucp_experiment(sys, g, data[k].u0, data[k].u1, omega, cfg).ratio);
    if (out.ratios.back() < out.min_ratio) {
      out.min_ratio = out.ratios.back();
      out.argmin = static_cast<int>(k);
    }
  }
  return out;
}

}  // namespace bresse

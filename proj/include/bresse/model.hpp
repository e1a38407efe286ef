#pragma once

// Physical and structural data of the damped semilinear Bresse beam:
// beam constants, localized damping, and the potential source term.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bresse/errors.hpp"

namespace bresse {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using ParamMap = std::map<std::string, double>;

// ---------------------------------------------------------------------------
// Beam constants
// ---------------------------------------------------------------------------

struct BeamParameters {
  double rho1 = 1.0;    // mass density times area
  double rho2 = 1.0;    // rotational inertia
  double k = 1.0;       // shear stiffness
  double k0 = 1.0;      // axial stiffness
  double b = 1.0;       // bending stiffness
  double ell = 0.0;     // curvature (1/length)
  double length = 1.0;  // L

  void check() const {
    require(rho1 > 0 && rho2 > 0, "densities rho1, rho2 must be positive");
    require(k > 0 && k0 > 0 && b > 0, "stiffnesses k, k0, b must be positive");
    require(ell >= 0, "curvature ell must be nonnegative");
    require(length > 0, "length must be positive");
  }

  /// ell == 0 reduces the arched beam to the Timoshenko beam.
  bool timoshenko_degenerate() const { return ell == 0.0; }
  std::string label() const { return timoshenko_degenerate() ? "timoshenko-degenerate" : "bresse"; }
};

/// Squared propagation speeds, always derived from BeamParameters.
struct WaveSpeeds {
  double gamma1, gamma2, gamma3;

  static WaveSpeeds of(const BeamParameters& p) { return {p.k / p.rho1, p.b / p.rho2, p.k0 / p.rho1}; }
  std::array<double, 3> as_array() const { return {gamma1, gamma2, gamma3}; }
  double max() const { return std::max({gamma1, gamma2, gamma3}); }
  double min() const { return std::min({gamma1, gamma2, gamma3}); }
};

struct EqualSpeedResult {
  bool equal;
  double ratio_residual;      // |rho1/k - rho2/b|
  double stiffness_residual;  // |k - k0|
};

inline EqualSpeedResult equal_speed_check(const BeamParameters& p, double rel_tol = 1e-12) {
  const double r1 = p.rho1 / p.k;
  const double ratio_res = std::abs(r1 - p.rho2 / p.b);
  const double stiff_res = std::abs(p.k - p.k0);
  return {ratio_res <= rel_tol * r1 && stiff_res <= rel_tol * p.k, ratio_res, stiff_res};
}

/// Constant C in ||u|| <= C ||u_x|| on H^1_0(0, L).
inline double poincare_constant(double length) {
  require(length > 0, "length must be positive");
  return length / std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Damping
// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool empty() const { return !(hi > lo); }
  double width() const { return empty() ? 0.0 : hi - lo; }
  bool contains(double x) const { return x > lo && x < hi; }  // open
};

inline Interval intersect(const Interval& a, const Interval& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

/// Indicator-type localizer: a(x) = amplitude on the open interval, 0 elsewhere.
struct Localizer {
  Interval support;
  double amplitude = 0.0;

  double operator()(double x) const { return support.contains(x) ? amplitude : 0.0; }
};

/// Scalar damping nonlinearity g from the built-in catalog.
class DampingLaw {
 public:
  static std::vector<std::string> catalog() { return {"linear", "linear_tanh"}; }

  static DampingLaw from_catalog(const std::string& name, const ParamMap& params = {}) {
    auto get = [&](const char* key, double dflt) {
      auto it = params.find(key);
      return it == params.end() ? dflt : it->second;
    };
    DampingLaw law;
    law.name_ = name;
    if (name == "linear") {
      law.slope_ = get("slope", 1.0);
      law.tanh_weight_ = 0.0;
    } else if (name == "linear_tanh") {
      law.slope_ = get("slope", 1.0);
      law.tanh_weight_ = get("tanh_weight", 0.5);
    } else {
      fail(ErrorKind::ValidationError, "unknown damping law '" + name + "'");
    }
    law.params_ = {{"slope", law.slope_}, {"tanh_weight", law.tanh_weight_}};
    if (name == "linear") law.params_.erase("tanh_weight");
    return law;
  }

  static DampingLaw linear(double slope = 1.0) { return from_catalog("linear", {{"slope", slope}}); }

  double operator()(double s) const { return slope_ * s + tanh_weight_ * std::tanh(s); }
  double derivative(double s) const {
    const double th = std::tanh(s);
    return slope_ + tanh_weight_ * (1.0 - th * th);
  }

  /// Reported slope bounds m <= g' <= M.
  double slope_lower() const { return slope_ + std::min(0.0, tanh_weight_); }
  double slope_upper() const { return slope_ + std::max(0.0, tanh_weight_); }
  bool is_linear() const { return tanh_weight_ == 0.0; }

  const std::string& name() const { return name_; }
  const ParamMap& params() const { return params_; }

 private:
  std::string name_ = "linear";
  ParamMap params_;
  double slope_ = 1.0;
  double tanh_weight_ = 0.0;
};

struct DampingComponent {
  Localizer a;
  DampingLaw g;
};

/// Damping for (phi, psi, w), in that order.
struct DampingSpec {
  std::array<DampingComponent, 3> components;

  Interval intersection() const {
    Interval out = components[0].a.support;
    for (int i = 1; i < 3; ++i) out = intersect(out, components[i].a.support);
    return out;
  }

  bool is_linear() const {
    return std::all_of(components.begin(), components.end(), [](const auto& c) { return c.g.is_linear(); });
  }

  static DampingSpec uniform(const Interval& support, double amplitude, const DampingLaw& law) {
    DampingSpec d;
    for (auto& c : d.components) c = {Localizer{support, amplitude}, law};
    return d;
  }
  static DampingSpec undamped(double length) {
    return uniform({0.0, length}, 0.0, DampingLaw::linear());
  }
};

// ---------------------------------------------------------------------------
// Source potential F with gradient (f1, f2, f3)
// ---------------------------------------------------------------------------

/// Potential F from the built-in catalog, together with the constants of the
/// lower bounds F >= -alpha|U|^2 - c_F and grad F . U >= F - alpha|U|^2 - c_F.
class Source {
 public:
  static std::vector<std::string> catalog() { return {"zero", "linear", "quadratic", "power", "double_well"}; }

  static Source from_catalog(const std::string& name, const ParamMap& params = {}) {
    auto get = [&](const char* key, double dflt) {
      auto it = params.find(key);
      return it == params.end() ? dflt : it->second;
    };
    Source s;
    s.name_ = name;
    if (name == "zero") {
      s.kind_ = Kind::Zero;
    } else if (name == "linear") {
      // F = e . U
      s.kind_ = Kind::Linear;
      s.e_ = {get("e1", 0.0), get("e2", 0.0), get("e3", 0.0)};
      s.alpha_ = get("alpha", 1.0);
      if (s.e_.squaredNorm() > 0) {
        require(s.alpha_ > 0, "linear source needs alpha > 0");
        s.c_F_ = s.e_.squaredNorm() / (4.0 * s.alpha_);
      }
      s.params_ = {{"e1", s.e_[0]}, {"e2", s.e_[1]}, {"e3", s.e_[2]}, {"alpha", s.alpha_}};
    } else if (name == "quadratic") {
      // F = c |U|^2
      s.kind_ = Kind::Quadratic;
      s.coef_ = get("coef", 1.0);
      s.alpha_ = std::max(0.0, -s.coef_);
      s.params_ = {{"coef", s.coef_}};
    } else if (name == "power") {
      // F = kappa |U|^(p+1) / (p+1)
      s.kind_ = Kind::Power;
      s.coef_ = get("kappa", 1.0);
      s.p_ = get("p", 3.0);
      require(s.p_ >= 1.0, "power source needs p >= 1");
      require(s.coef_ >= 0.0, "power source needs kappa >= 0");
      s.params_ = {{"kappa", s.coef_}, {"p", s.p_}};
    } else if (name == "double_well") {
      // F = (lambda/4)|U|^4 - (mu/2)|U|^2
      s.kind_ = Kind::DoubleWell;
      s.lambda_ = get("lambda", 1.0);
      s.mu_ = get("mu", 1.0);
      s.alpha_ = get("alpha", 0.0);
      require(s.lambda_ > 0, "double_well needs lambda > 0");
      require(s.alpha_ >= 0, "double_well needs alpha >= 0");
      s.p_ = 3.0;
      const double gap = std::max(0.0, s.mu_ / 2.0 - s.alpha_);
      s.c_F_ = gap * gap / s.lambda_;
      s.params_ = {{"lambda", s.lambda_}, {"mu", s.mu_}, {"alpha", s.alpha_}};
    } else {
      fail(ErrorKind::ValidationError, "unknown source '" + name + "'");
    }
    return s;
  }

  static Source zero() { return from_catalog("zero"); }

  double potential(const Vec3& u) const {
    switch (kind_) {
      case Kind::Zero: return 0.0;
      case Kind::Linear: return e_.dot(u);
      case Kind::Quadratic: return coef_ * u.squaredNorm();
      case Kind::Power: return coef_ * std::pow(u.norm(), p_ + 1.0) / (p_ + 1.0);
      case Kind::DoubleWell: {
        const double s = u.squaredNorm();
        return 0.25 * lambda_ * s * s - 0.5 * mu_ * s;
      }
    }
    return 0.0;
  }

  Vec3 gradient(const Vec3& u) const {
    switch (kind_) {
      case Kind::Zero: return Vec3::Zero();
      case Kind::Linear: return e_;
      case Kind::Quadratic: return 2.0 * coef_ * u;
      case Kind::Power: {
        const double r = u.norm();
        if (r == 0.0) return Vec3::Zero();
        return coef_ * std::pow(r, p_ - 1.0) * u;
      }
      case Kind::DoubleWell: return (lambda_ * u.squaredNorm() - mu_) * u;
    }
    return Vec3::Zero();
  }

  Mat3 hessian(const Vec3& u) const {
    switch (kind_) {
      case Kind::Zero:
      case Kind::Linear: return Mat3::Zero();
      case Kind::Quadratic: return 2.0 * coef_ * Mat3::Identity();
      case Kind::Power: {
        const double r = u.norm();
        if (r == 0.0) return p_ == 1.0 ? Mat3(coef_ * Mat3::Identity()) : Mat3(Mat3::Zero());
        const double rp = std::pow(r, p_ - 1.0);
        return coef_ * (rp * Mat3::Identity() + (p_ - 1.0) * rp / (r * r) * (u * u.transpose()));
      }
      case Kind::DoubleWell:
        return (lambda_ * u.squaredNorm() - mu_) * Mat3::Identity() + 2.0 * lambda_ * (u * u.transpose());
    }
    return Mat3::Zero();
  }

  /// True when the Hessian does not depend on the state.
  bool constant_hessian() const {
    return kind_ == Kind::Zero || kind_ == Kind::Linear || kind_ == Kind::Quadratic ||
           (kind_ == Kind::Power && p_ == 1.0);
  }
  bool is_zero() const { return kind_ == Kind::Zero; }

  double exponent() const { return p_; }
  double alpha() const { return alpha_; }
  double c_F() const { return c_F_; }
  const std::string& name() const { return name_; }
  const ParamMap& params() const { return params_; }

 private:
  enum class Kind { Zero, Linear, Quadratic, Power, DoubleWell };
  Kind kind_ = Kind::Zero;
  std::string name_ = "zero";
  ParamMap params_;
  Vec3 e_ = Vec3::Zero();
  double coef_ = 0.0, lambda_ = 0.0, mu_ = 0.0;
  double p_ = 1.0, alpha_ = 0.0, c_F_ = 0.0;
};

/// Everything that defines the PDE apart from the grid.
struct Model {
  BeamParameters beam;
  DampingSpec damping;
  Source source;
};

// ---------------------------------------------------------------------------
// Assumption checks
// ---------------------------------------------------------------------------

struct AssumptionCheck {
  std::string name;
  bool passed = true;
  double value = 0.0;  // worst sampled quantity (meaning depends on the check)
  std::string detail;
  std::optional<Vec3> witness;  // sample point of the first failure
};

struct ValidationReport {
  std::vector<AssumptionCheck> checks;
  double c_f = 0.0;                     // smallest c_f making (f.3) hold on samples
  double a0 = 0.0;                      // min of a_i over its interval I_i
  Interval core;                        // intersection of the I_i
  double slope_min = 0.0, slope_max = 0.0;  // sampled range of g_i'

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
  const AssumptionCheck& get(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    fail(ErrorKind::InvalidArgument, "no check named " + name);
  }
};

struct SamplingOptions {
  int points = 10000;     // state samples for (f.*) and (g.1)
  double range = 2.0;     // samples drawn from [-R, R]
  int x_points = 10000;   // spatial samples for (a.1)
  std::optional<double> beta;  // if given, also check alpha < pi^2 / (2 beta L^2)
};

namespace detail {

/// Deterministic lattice of about `count` points in [-R, R]^3.
inline std::vector<Vec3> state_samples(int count, double range) {
  const int m = std::max(2, static_cast<int>(std::lround(std::cbrt(static_cast<double>(count)))));
  std::vector<Vec3> pts;
  pts.reserve(static_cast<size_t>(m) * m * m);
  auto coord = [&](int i) { return -range + 2.0 * range * i / (m - 1); };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int l = 0; l < m; ++l) pts.emplace_back(coord(i), coord(j), coord(l));
  return pts;
}

inline std::string fmt_point(const Vec3& u) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << u[0] << ", " << u[1] << ", " << u[2] << ")";
  return os.str();
}

}  // namespace detail

inline ValidationReport validate(const BeamParameters& params, const DampingSpec& damping, const Source& source,
                                 const SamplingOptions& opts = {}) {
  params.check();
  ValidationReport report;
  const double L = params.length;

  // (a.1) first: an empty intersection is a hard error.
  report.core = damping.intersection();
  if (report.core.empty()) {
    std::ostringstream os;
    os << "intersection of damping intervals is empty: [" << report.core.lo << ", " << report.core.hi << "]";
    fail(ErrorKind::EmptyDampingIntersection, os.str());
  }
  {
    AssumptionCheck chk{"(a.1)", true, 0.0, {}, {}};
    double a0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      const auto& a = damping.components[i].a;
      for (int s = 0; s <= opts.x_points; ++s) {
        const double x = L * s / opts.x_points;
        const double v = a(x);
        if (v < 0 && chk.passed) {
          chk.passed = false;
          chk.witness = Vec3(x, i, v);
          chk.detail = "a_" + std::to_string(i + 1) + " negative";
        }
        if (a.support.contains(x)) a0 = std::min(a0, v);
      }
    }
    if (!std::isfinite(a0)) a0 = 0.0;
    report.a0 = a0;
    chk.value = a0;
    if (chk.passed && !(a0 > 0)) {
      chk.passed = false;
      chk.detail = "no positive floor a0 on the damping intervals";
    }
    report.checks.push_back(chk);
  }

  // (g.1) monotone, g(0)=0, m <= g' <= M on samples.
  {
    AssumptionCheck chk{"(g.1)", true, 0.0, {}, {}};
    double smin = std::numeric_limits<double>::infinity(), smax = -smin;
    for (int i = 0; i < 3; ++i) {
      const auto& g = damping.components[i].g;
      if (std::abs(g(0.0)) > 0) {
        chk.passed = false;
        chk.detail = "g_" + std::to_string(i + 1) + "(0) != 0";
      }
      for (int s = 0; s <= opts.points; ++s) {
        const double x = -opts.range + 2.0 * opts.range * s / opts.points;
        const double d = g.derivative(x);
        smin = std::min(smin, d);
        smax = std::max(smax, d);
        if (d < 0) {
          std::ostringstream os;
          os << "g_" << (i + 1) << "'(" << x << ") = " << d << " < 0";
          fail(ErrorKind::NonmonotoneDamping, os.str());
        }
        const double tol = 1e-12 * (1.0 + std::abs(d));
        if (chk.passed && (d < g.slope_lower() - tol || d > g.slope_upper() + tol)) {
          chk.passed = false;
          chk.witness = Vec3(x, i, d);
          chk.detail = "sampled slope outside reported [m, M]";
        }
      }
      if (!(g.slope_lower() > 0)) {
        chk.passed = false;
        chk.detail = "lower slope bound m must be positive";
      }
    }
    report.slope_min = smin;
    report.slope_max = smax;
    chk.value = smin;
    report.checks.push_back(chk);
  }

  const auto samples = detail::state_samples(opts.points, opts.range);
  const double alpha = source.alpha(), cF = source.c_F(), p = source.exponent();

  // (f.1) grad F = (f1, f2, f3); Jacobian of f symmetric (Hessian of F).
  {
    AssumptionCheck chk{"(f.1)", true, 0.0, {}, {}};
    double worst = 0.0;
    for (const auto& u : samples) {
      const Vec3 g = source.gradient(u);
      const Mat3 H = source.hessian(u);
      for (int c = 0; c < 3; ++c) {
        const double step = 1e-5 * std::max(1.0, std::abs(u[c]));
        Vec3 up = u, um = u;
        up[c] += step;
        um[c] -= step;
        const double fd = (source.potential(up) - source.potential(um)) / (2 * step);
        const Vec3 fdj = (source.gradient(up) - source.gradient(um)) / (2 * step);
        const double err_g = std::abs(fd - g[c]) / (1.0 + std::abs(g[c]));
        const double err_h = (fdj - H.col(c)).norm() / (1.0 + H.col(c).norm());
        worst = std::max({worst, err_g, err_h});
      }
      const double asym = (H - H.transpose()).norm();
      worst = std::max(worst, asym);
      if (worst > 1e-5 && chk.passed) {
        chk.passed = false;
        chk.witness = u;
        chk.detail = "finite-difference mismatch at " + detail::fmt_point(u);
      }
    }
    chk.value = worst;
    report.checks.push_back(chk);
  }

  // (f.2) the two lower bounds.
  {
    AssumptionCheck chk{"(f.2)", true, 0.0, {}, {}};
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& u : samples) {
      const double F = source.potential(u);
      const double s = u.squaredNorm();
      const double slack = 1e-12 * (1.0 + std::abs(F) + s);
      const double v1 = -alpha * s - cF - F;                                 // must be <= 0
      const double v2 = F - alpha * s - cF - source.gradient(u).dot(u);       // must be <= 0
      worst = std::max({worst, v1, v2});
      if ((v1 > slack || v2 > slack) && chk.passed) {
        chk.passed = false;
        chk.witness = u;
        chk.detail = "lower bound violated at " + detail::fmt_point(u);
      }
    }
    chk.value = worst;
    report.checks.push_back(chk);
    if (opts.beta) {
      AssumptionCheck ab{"(f.2) alpha bound", true, 0.0, {}, {}};
      const double limit = std::numbers::pi * std::numbers::pi / (2.0 * *opts.beta * L * L);
      ab.value = limit;
      ab.passed = alpha < limit;
      if (!ab.passed) ab.detail = "alpha >= pi^2 / (2 beta L^2)";
      report.checks.push_back(ab);
    }
  }

  // (f.3) reports the smallest c_f that holds on the samples.
  {
    AssumptionCheck chk{"(f.3)", true, 0.0, {}, {}};
    double cf = 0.0;
    for (const auto& u : samples) {
      const Mat3 H = source.hessian(u);
      double denom = 1.0;
      for (int c = 0; c < 3; ++c) denom += std::pow(std::abs(u[c]), p - 1.0);
      for (int r = 0; r < 3; ++r) cf = std::max(cf, H.row(r).norm() / denom);
    }
    chk.passed = std::isfinite(cf);
    chk.value = cf;
    chk.detail = "smallest c_f on samples";
    report.c_f = cf;
    report.checks.push_back(chk);
  }

  return report;
}

inline ValidationReport validate(const Model& m, const SamplingOptions& opts = {}) {
  return validate(m.beam, m.damping, m.source, opts);
}

}  // namespace bresse

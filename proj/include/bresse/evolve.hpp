#pragma once

// Time integration of the damped semilinear Bresse system and of linear
// coupled wave systems.
//
// The nonlinear scheme is implicit midpoint on the elastic and damping terms;
// the source gradient is replaced by its average along the step segment,
//   fbar = int_0^1 grad F(U^n + s (U^{n+1} - U^n)) ds,
// so that fbar . (U^{n+1} - U^n) = F(U^{n+1}) - F(U^n). With this choice the
// discrete energy E_Z + 2 int F decreases by exactly the recorded dissipation
// 2 dt int sum a_i g_i(V_i) V_i per step, V being the midpoint velocity.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "bresse/discretize.hpp"
#include "bresse/errors.hpp"
#include "bresse/model.hpp"

namespace bresse {

struct IntegratorConfig {
  double dt = 0.0;
  double t_end = 1.0;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  int stride = 10;        // record every `stride` steps
  int max_halvings = 30;  // damped-Newton step halvings before giving up

  static IntegratorConfig defaults(const Grid& g, double t_end) {
    IntegratorConfig c;
    c.dt = 0.5 * g.h;
    c.t_end = t_end;
    return c;
  }

  void check() const {
    require(dt > 0, "dt must be positive");
    require(dt <= 0.5, "dt must not exceed 0.5");
    require(newton_tol > 0, "newton_tol must be positive");
    require(t_end >= 0, "t_end must be nonnegative");
    require(stride >= 1, "stride must be >= 1");
    require(newton_max_iter >= 1, "newton_max_iter must be >= 1");
  }

  /// Number of steps and the step actually used (t_end is hit exactly).
  std::pair<int, double> schedule() const {
    if (t_end == 0.0) return {0, dt};
    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));
    return {steps, t_end / steps};
  }
};

struct Trajectory {
  Grid grid;
  double dt = 0.0;
  int stride = 1;
  std::vector<double> times;
  std::vector<StateZ> states;
  std::vector<double> dissipation;          // cumulative dissipation at each sample
  std::vector<double> step_dissipation;     // one entry per time step
  std::vector<int> newton_iterations;       // one entry per time step
  std::vector<double> projection_residual;  // per sample, constrained runs only

  size_t size() const { return times.size(); }
};

/// Region omega = (L0 - eps/2, L0 + eps/2) and the interior nodes it covers.
struct OmegaConstraint {
  Interval omega;
  std::vector<int> masked;  // 0-based interior indices

  static OmegaConstraint around(double L0, double eps, const Grid& g, double offset = 0.0) {
    OmegaConstraint c;
    c.omega = intersect({L0 - 0.5 * eps, L0 + 0.5 * eps}, {offset, offset + g.length});
    for (int j = 0; j < g.n; ++j)
      if (c.omega.contains(offset + g.x(j))) c.masked.push_back(j);
    require(!c.masked.empty(), "omega covers no grid node");
    return c;
  }
};

namespace detail {

// 5-point Gauss-Legendre rule on [0, 1].
inline constexpr std::array<double, 5> kGaussNodes = {0.046910077030668004, 0.23076534494715845, 0.5,
                                                      0.76923465505284155, 0.95308992296933200};
inline constexpr std::array<double, 5> kGaussWeights = {0.11846344252809454, 0.23931433524968324,
                                                        0.28444444444444444, 0.23931433524968324,
                                                        0.11846344252809454};

}  // namespace detail

/// One-step map of the energy-consistent midpoint scheme. Holds the assembled
/// constant part of the Jacobian and, when the Jacobian is state independent,
/// its factorization.
class MidpointStepper {
 public:
  MidpointStepper(const Model& m, const Grid& g, const IntegratorConfig& cfg) : model_(m), grid_(g), cfg_(cfg) {
    cfg_.check();
    m.beam.check();
    dt_ = cfg_.schedule().second;
    const int N = 3 * g.n;
    K_ = stiffness_matrix(m.beam, g);
    rho_.resize(N);
    a_.resize(N);
    for (int j = 0; j < g.n; ++j) {
      const double x = g.x(j);
      const double r[3] = {m.beam.rho1, m.beam.rho2, m.beam.rho1};
      for (int c = 0; c < 3; ++c) {
        rho_[3 * j + c] = r[c];
        a_[3 * j + c] = m.damping.components[c].a(x);
      }
    }
    SparseMatrix M(N, N);
    M.reserve(Eigen::VectorXi::Constant(N, 1));
    for (int i = 0; i < N; ++i) M.insert(i, i) = 2.0 / dt_ * rho_[i];
    base_ = M + 0.5 * dt_ * K_;
    constant_jacobian_ = m.damping.is_linear() && m.source.constant_hessian();
    if (constant_jacobian_) factor(jacobian(Vector::Zero(N), Vector::Zero(N)));
  }

  struct StepInfo {
    double dissipation = 0.0;
    int iterations = 0;
    double residual = 0.0;
  };

  double dt() const { return dt_; }

  StepInfo advance(StateZ& z) {
    const Vector u0 = pack_displacement(z);
    const Vector v0 = pack_velocity(z);
    const Vector Ku0 = K_ * u0;
    Vector V = v0;
    Vector R = residual(V, u0, v0, Ku0);
    double r = R.lpNorm<Eigen::Infinity>();
    StepInfo info;
    const double start = r;
    while (r > cfg_.newton_tol) {
      if (info.iterations >= cfg_.newton_max_iter)
        fail(ErrorKind::NewtonDiverged, "residual " + std::to_string(r) + " after " +
                                            std::to_string(info.iterations) + " iterations");
      if (!constant_jacobian_) factor(jacobian(V, u0));
      const Vector delta = -lu_.solve(R);
      double lambda = 1.0;
      bool accepted = false;
      for (int k = 0; k <= cfg_.max_halvings; ++k, lambda *= 0.5) {
        const Vector Vt = V + lambda * delta;
        Vector Rt = residual(Vt, u0, v0, Ku0);
        const double rt = Rt.lpNorm<Eigen::Infinity>();
        if (std::isfinite(rt) && (rt < r || rt <= cfg_.newton_tol)) {
          V = Vt;
          R = std::move(Rt);
          r = rt;
          accepted = true;
          break;
        }
      }
      ++info.iterations;
      if (!accepted) {
        // stagnation at roundoff counts as converged
        const double floor = 1e3 * std::numeric_limits<double>::epsilon() *
                             std::max({1.0, start, V.lpNorm<Eigen::Infinity>()});
        if (r <= floor) break;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3e", r);
        fail(ErrorKind::NewtonDiverged, "no descent after " + std::to_string(cfg_.max_halvings) +
                                            " halvings, residual " + buf);
      }
    }
    info.residual = r;

    double diss = 0.0;
    for (int i = 0; i < V.size(); ++i) {
      if (a_[i] == 0.0) continue;
      diss += a_[i] * law(i)(V[i]) * V[i];
    }
    info.dissipation = 2.0 * dt_ * grid_.h * diss;
    const Vector u1 = u0 + dt_ * V;
    const Vector v1 = 2.0 * V - v0;
    unpack(u1, v1, z);
    return info;
  }

 private:
  const DampingLaw& law(int i) const { return model_.damping.components[i % 3].g; }

  Vector residual(const Vector& V, const Vector& u0, const Vector& v0, const Vector& Ku0) const {
    Vector R = (2.0 / dt_) * rho_.cwiseProduct(V - v0) + Ku0 + 0.5 * dt_ * (K_ * V);
    for (int i = 0; i < V.size(); ++i)
      if (a_[i] != 0.0) R[i] += a_[i] * law(i)(V[i]);
    if (!model_.source.is_zero()) {
      const auto& src = model_.source;
      for (int j = 0; j < grid_.n; ++j) {
        const Vec3 U = u0.segment<3>(3 * j);
        const Vec3 D = dt_ * V.segment<3>(3 * j);
        Vec3 f = Vec3::Zero();
        if (src.constant_hessian()) {
          f = src.gradient(U + 0.5 * D);
        } else {
          for (size_t q = 0; q < detail::kGaussNodes.size(); ++q)
            f += detail::kGaussWeights[q] * src.gradient(U + detail::kGaussNodes[q] * D);
        }
        R.segment<3>(3 * j) += f;
      }
    }
    return R;
  }

  SparseMatrix jacobian(const Vector& V, const Vector& u0) const {
    const int n = grid_.n;
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(9 * n);
    const auto& src = model_.source;
    for (int j = 0; j < n; ++j) {
      Mat3 B = Mat3::Zero();
      if (!src.is_zero()) {
        const Vec3 U = u0.segment<3>(3 * j);
        const Vec3 D = dt_ * V.segment<3>(3 * j);
        if (src.constant_hessian()) {
          B = 0.5 * dt_ * src.hessian(U);
        } else {
          for (size_t q = 0; q < detail::kGaussNodes.size(); ++q) {
            const double s = detail::kGaussNodes[q];
            B += dt_ * detail::kGaussWeights[q] * s * src.hessian(U + s * D);
          }
        }
      }
      for (int c = 0; c < 3; ++c) {
        const int i = 3 * j + c;
        if (a_[i] != 0.0) B(c, c) += a_[i] * law(i).derivative(V[i]);
      }
      // Full 3x3 node blocks keep the sparsity pattern fixed.
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) t.emplace_back(3 * j + r, 3 * j + c, B(r, c));
    }
    SparseMatrix Bm(3 * n, 3 * n);
    Bm.setFromTriplets(t.begin(), t.end());
    return base_ + Bm;
  }

  void factor(const SparseMatrix& J) {
    if (!analyzed_) {
      lu_.analyzePattern(J);
      analyzed_ = true;
    }
    lu_.factorize(J);
    if (lu_.info() != Eigen::Success) fail(ErrorKind::NewtonDiverged, "singular step Jacobian");
  }

  Model model_;
  Grid grid_;
  IntegratorConfig cfg_;
  double dt_ = 0.0;
  SparseMatrix K_, base_;
  Vector rho_, a_;
  bool constant_jacobian_ = false;
  bool analyzed_ = false;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

inline void check_state(const StateZ& z, const Grid& g) {
  if (!z.consistent() || z.size() != g.n) fail(ErrorKind::LengthMismatch, "state does not match grid");
}

/// Single step with the scheme above.
inline StateZ step(const StateZ& z, const Model& m, const Grid& g, const IntegratorConfig& cfg) {
  check_state(z, g);
  MidpointStepper stepper(m, g, cfg);
  StateZ out = z;
  stepper.advance(out);
  return out;
}

namespace detail {

inline double mask_state(StateZ& z, const OmegaConstraint& c) {
  double removed = 0.0;
  for (Vector* f : z.fields())
    for (int j : c.masked) {
      removed = std::max(removed, std::abs((*f)[j]));
      (*f)[j] = 0.0;
    }
  return removed;
}

inline Trajectory run(const StateZ& z0, const Model& m, const Grid& g, const IntegratorConfig& cfg,
                      const OmegaConstraint* constraint) {
  check_state(z0, g);
  MidpointStepper stepper(m, g, cfg);
  const auto [steps, dt] = cfg.schedule();
  Trajectory traj;
  traj.grid = g;
  traj.dt = dt;
  traj.stride = cfg.stride;
  traj.step_dissipation.reserve(steps);
  traj.newton_iterations.reserve(steps);
  StateZ z = z0;
  double cumulative = 0.0, removed = 0.0;
  auto record = [&](int s) {
    traj.times.push_back(s * dt);
    traj.states.push_back(z);
    traj.dissipation.push_back(cumulative);
    if (constraint) traj.projection_residual.push_back(removed);
    removed = 0.0;
  };
  record(0);
  for (int s = 1; s <= steps; ++s) {
    MidpointStepper::StepInfo info;
    try {
      info = stepper.advance(z);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NewtonDiverged) throw;
      fail(ErrorKind::NewtonDiverged, "step " + std::to_string(s) + ": " + e.what());
    }
    if (constraint) removed = std::max(removed, mask_state(z, *constraint));
    cumulative += info.dissipation;
    traj.step_dissipation.push_back(info.dissipation);
    traj.newton_iterations.push_back(info.iterations);
    if (s % cfg.stride == 0 || s == steps) record(s);
  }
  return traj;
}

}  // namespace detail

inline Trajectory simulate(const StateZ& z0, const Model& m, const Grid& g, const IntegratorConfig& cfg) {
  return detail::run(z0, m, g, cfg, nullptr);
}

/// Evolution projected onto the subspace of states vanishing on omega (all six
/// fields). `projection_residual` holds the largest value removed by the mask
/// since the previous sample.
inline Trajectory simulate_constrained(const StateZ& z0, const Model& m, const Grid& g, const IntegratorConfig& cfg,
                                       const OmegaConstraint& constraint) {
  check_state(z0, g);
  for (const Vector* f : z0.fields())
    for (int j : constraint.masked)
      if ((*f)[j] != 0.0)
        fail(ErrorKind::ConstraintViolation, "initial state nonzero at masked node x = " + std::to_string(g.x(j)));
  return detail::run(z0, m, g, cfg, &constraint);
}

// ---------------------------------------------------------------------------
// Linear coupled wave systems  u_i,tt - gamma_i u_i,xx = sum_j p^i_j d_x u_j + q^i_j u_j
// ---------------------------------------------------------------------------

struct LinearCoupledSystem {
  std::vector<double> gamma;
  // p[i][j], q[i][j]: nodal coefficient fields; empty vector means zero.
  std::vector<std::vector<Vector>> p, q;

  int components() const { return static_cast<int>(gamma.size()); }

  static LinearCoupledSystem uncoupled(std::vector<double> gammas) {
    LinearCoupledSystem s;
    s.gamma = std::move(gammas);
    const auto m = s.gamma.size();
    s.p.assign(m, std::vector<Vector>(m));
    s.q.assign(m, std::vector<Vector>(m));
    return s;
  }

  /// Constant-coefficient couplings that turn the undamped linear Bresse
  /// system (phi, psi, w) into this form.
  static LinearCoupledSystem bresse_linearized(const BeamParameters& bp, const Grid& g) {
    auto s = uncoupled({bp.k / bp.rho1, bp.b / bp.rho2, bp.k0 / bp.rho1});
    const double l = bp.ell;
    auto c = [&](double v) { return v == 0.0 ? Vector() : Vector(Vector::Constant(g.n, v)); };
    s.p[0][1] = c(bp.k / bp.rho1);
    s.p[0][2] = c((bp.k + bp.k0) * l / bp.rho1);
    s.q[0][0] = c(-bp.k0 * l * l / bp.rho1);
    s.p[1][0] = c(-bp.k / bp.rho2);
    s.q[1][1] = c(-bp.k / bp.rho2);
    s.q[1][2] = c(-bp.k * l / bp.rho2);
    s.p[2][0] = c(-(bp.k + bp.k0) * l / bp.rho1);
    s.q[2][1] = c(-bp.k * l / bp.rho1);
    s.q[2][2] = c(-bp.k * l * l / bp.rho1);
    return s;
  }

  /// Coefficients restricted to interior nodes [first, first + count).
  LinearCoupledSystem restrict_to(int first, int count) const {
    LinearCoupledSystem s = *this;
    for (auto* mat : {&s.p, &s.q})
      for (auto& row : *mat)
        for (auto& f : row)
          if (f.size() > 0) f = Vector(f.segment(first, count));
    return s;
  }

  double max_abs(const std::vector<std::vector<Vector>>& m) const {
    double v = 0.0;
    for (const auto& row : m)
      for (const auto& f : row)
        if (f.size() > 0) v = std::max(v, f.cwiseAbs().maxCoeff());
    return v;
  }

  /// C in dF_u/dt <= C F_u, from Cauchy-Schwarz on the coupling terms.
  double gronwall_rate() const {
    const double m = components();
    const double P = max_abs(p), Q = max_abs(q);
    const double gmin = *std::min_element(gamma.begin(), gamma.end());
    return 2.0 + 2.0 * m * m * std::max(P * P / gmin, Q * Q);
  }
};

struct WaveTrajectory {
  double dt = 0.0;
  double offset = 0.0;  // global coordinate of the left boundary of the grid
  Grid grid;
  std::vector<double> times;
  std::vector<std::vector<Vector>> u, ut;   // [sample][component]
  std::vector<double> energy;               // F_u at each sample
  std::vector<double> projection_residual;  // constrained runs only

  size_t size() const { return times.size(); }
};

/// F_u = sum_i ||u_i||^2 + gamma_i ||d_x u_i||^2 + ||d_t u_i||^2.
inline double coupled_energy(const std::vector<Vector>& u, const std::vector<Vector>& ut,
                             const std::vector<double>& gamma, const Grid& g) {
  double e = 0.0;
  for (size_t i = 0; i < u.size(); ++i)
    e += l2_norm_sq(u[i], g) + gamma[i] * edge_norm_sq(edge_difference(u[i], g), g) + l2_norm_sq(ut[i], g);
  return e;
}

/// Implicit midpoint on the first-order form; the system is linear, so each
/// step is one solve with a matrix factored once.
inline WaveTrajectory simulate_linear_coupled(const std::vector<Vector>& u0, const std::vector<Vector>& u1,
                                              const LinearCoupledSystem& sys, const Grid& g,
                                              const IntegratorConfig& cfg,
                                              const OmegaConstraint* constraint = nullptr, double offset = 0.0) {
  cfg.check();
  const int m = sys.components();
  require(m >= 1, "need at least one component");
  require(static_cast<int>(u0.size()) == m && static_cast<int>(u1.size()) == m, "initial data count mismatch");
  for (int i = 0; i < m; ++i) {
    check_length(u0[i], g);
    check_length(u1[i], g);
  }
  const int n = g.n, N = m * n;
  const SparseMatrix D = centered_difference_matrix(g);
  std::vector<Eigen::Triplet<double>> t;
  // G = [[0, I], [C, 0]] with C = Gamma Lap + P D + Q.
  for (int r = 0; r < N; ++r) t.emplace_back(r, N + r, 1.0);
  for (int i = 0; i < m; ++i) {
    const SparseMatrix lap = laplacian_matrix(sys.gamma[i], g);
    for (int k = 0; k < lap.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(lap, k); it; ++it)
        t.emplace_back(N + i * n + it.row(), i * n + it.col(), it.value());
    for (int j = 0; j < m; ++j) {
      if (sys.p[i][j].size() > 0)
        for (int k = 0; k < D.outerSize(); ++k)
          for (SparseMatrix::InnerIterator it(D, k); it; ++it)
            t.emplace_back(N + i * n + it.row(), j * n + it.col(), sys.p[i][j][it.row()] * it.value());
      if (sys.q[i][j].size() > 0)
        for (int r = 0; r < n; ++r) t.emplace_back(N + i * n + r, j * n + r, sys.q[i][j][r]);
    }
  }
  SparseMatrix G(2 * N, 2 * N);
  G.setFromTriplets(t.begin(), t.end());
  const auto [steps, dt] = cfg.schedule();
  SparseMatrix I(2 * N, 2 * N);
  I.setIdentity();
  const SparseMatrix Am = I - 0.5 * dt * G;
  const SparseMatrix Ap = I + 0.5 * dt * G;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(Am);
  if (lu.info() != Eigen::Success) fail(ErrorKind::NewtonDiverged, "singular midpoint matrix");

  Vector y(2 * N);
  for (int i = 0; i < m; ++i) {
    y.segment(i * n, n) = u0[i];
    y.segment(N + i * n, n) = u1[i];
  }
  if (constraint)
    for (int i = 0; i < m; ++i)
      for (int j : constraint->masked)
        if (y[i * n + j] != 0.0 || y[N + i * n + j] != 0.0)
          fail(ErrorKind::ConstraintViolation, "initial data nonzero on omega");

  WaveTrajectory traj;
  traj.dt = dt;
  traj.offset = offset;
  traj.grid = g;
  double removed = 0.0;
  auto record = [&](int s) {
    std::vector<Vector> uu(m), vv(m);
    for (int i = 0; i < m; ++i) {
      uu[i] = y.segment(i * n, n);
      vv[i] = y.segment(N + i * n, n);
    }
    traj.times.push_back(s * dt);
    traj.energy.push_back(coupled_energy(uu, vv, sys.gamma, g));
    traj.u.push_back(std::move(uu));
    traj.ut.push_back(std::move(vv));
    if (constraint) traj.projection_residual.push_back(removed);
    removed = 0.0;
  };
  record(0);
  for (int s = 1; s <= steps; ++s) {
    y = lu.solve(Vector(Ap * y));
    if (constraint)
      for (int i = 0; i < m; ++i)
        for (int j : constraint->masked) {
          removed = std::max({removed, std::abs(y[i * n + j]), std::abs(y[N + i * n + j])});
          y[i * n + j] = 0.0;
          y[N + i * n + j] = 0.0;
        }
    if (s % cfg.stride == 0 || s == steps) record(s);
  }
  return traj;
}

/// Discrete Gronwall envelope of F_u after `steps` midpoint steps of size dt.
inline double gronwall_factor(const LinearCoupledSystem& sys, double dt, int steps) {
  const double x = 0.5 * dt * sys.gronwall_rate();
  require(x < 1.0, "dt too large for the discrete Gronwall envelope");
  return std::pow((1.0 + x) / (1.0 - x), steps);
}

}  // namespace bresse

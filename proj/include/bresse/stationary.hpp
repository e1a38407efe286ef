#pragma once

// Newton solver for the discrete stationary problem K u + grad F(u) = 0 and
// the a priori bound on the stationary set.

#include <cmath>
#include <future>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "bresse/discretize.hpp"
#include "bresse/errors.hpp"
#include "bresse/model.hpp"

namespace bresse {

struct StationarySolution {
  Vector phi, psi, w;
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;  // max-norm residual before each iteration, then final

  StateZ to_state() const {
    StateZ z = StateZ::zeros(static_cast<int>(phi.size()));
    z.phi = phi;
    z.psi = psi;
    z.w = w;
    return z;
  }
};

struct StationaryOptions {
  double tol = 1e-10;
  int max_iter = 60;
  int max_halvings = 30;
};

namespace detail {

inline Vector stationary_residual(const SparseMatrix& K, const Vector& u, const Source& src) {
  Vector r = K * u;
  if (!src.is_zero())
    for (int j = 0; j < u.size() / 3; ++j) r.segment<3>(3 * j) += src.gradient(u.segment<3>(3 * j));
  return r;
}

inline SparseMatrix stationary_jacobian(const SparseMatrix& K, const Vector& u, const Source& src) {
  const int n = static_cast<int>(u.size() / 3);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(9 * n);
  for (int j = 0; j < n; ++j) {
    const Mat3 H = src.hessian(u.segment<3>(3 * j));
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t.emplace_back(3 * j + r, 3 * j + c, H(r, c));
  }
  SparseMatrix B(3 * n, 3 * n);
  B.setFromTriplets(t.begin(), t.end());
  return K + B;
}

[[noreturn]] inline void singular_jacobian(const SparseMatrix& J) {
  const Matrix dense(J);
  Eigen::JacobiSVD<Matrix> svd(dense);
  fail(ErrorKind::SingularJacobian,
       "smallest singular value " + std::to_string(svd.singularValues().minCoeff()));
}

}  // namespace detail

inline StationarySolution solve_stationary(const Model& m, const Grid& g, const StateZ& guess,
                                           const StationaryOptions& opts = {}) {
  m.beam.check();
  require(opts.tol > 0, "tol must be positive");
  if (guess.size() != g.n) fail(ErrorKind::LengthMismatch, "guess does not match grid");
  const SparseMatrix K = stiffness_matrix(m.beam, g);
  Vector u = pack_displacement(guess);
  Vector R = detail::stationary_residual(K, u, m.source);
  double r = R.lpNorm<Eigen::Infinity>();
  StationarySolution sol;
  sol.residual_history.push_back(r);
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  while (r > opts.tol) {
    if (sol.iterations >= opts.max_iter)
      fail(ErrorKind::NewtonDiverged, "residual " + std::to_string(r) + " after " +
                                          std::to_string(sol.iterations) + " iterations");
    const SparseMatrix J = detail::stationary_jacobian(K, u, m.source);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) detail::singular_jacobian(J);
    const Vector delta = -lu.solve(R);
    if (!delta.allFinite()) detail::singular_jacobian(J);
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opts.max_halvings; ++k, lambda *= 0.5) {
      const Vector ut = u + lambda * delta;
      Vector Rt = detail::stationary_residual(K, ut, m.source);
      const double rt = Rt.lpNorm<Eigen::Infinity>();
      if (std::isfinite(rt) && (rt < r || rt <= opts.tol)) {
        u = ut;
        R = std::move(Rt);
        r = rt;
        accepted = true;
        break;
      }
    }
    ++sol.iterations;
    sol.residual_history.push_back(r);
    if (!accepted) fail(ErrorKind::NewtonDiverged, "no descent, residual " + std::to_string(r));
  }
  sol.residual = r;
  StateZ z = StateZ::zeros(g.n);
  unpack(u, Vector::Zero(u.size()), z);
  sol.phi = z.phi;
  sol.psi = z.psi;
  sol.w = z.w;
  return sol;
}

/// R^2 = 2 beta c_F L / (1 - 2 alpha beta P^2): bound on ||phi_x||^2 + ||psi_x||^2 + ||w_x||^2
/// over stationary solutions, P being the Poincare constant (default L / pi).
inline double stationary_bound(double alpha, double beta, double c_F, double length,
                               std::optional<double> poincare = std::nullopt) {
  require(beta > 0 && length > 0 && alpha >= 0 && c_F >= 0, "invalid constants");
  const double P = poincare ? *poincare : poincare_constant(length);
  const double denom = 1.0 - 2.0 * alpha * beta * P * P;
  if (!(denom > 0)) fail(ErrorKind::AssumptionViolated, "alpha >= 1 / (2 beta P^2)");
  return 2.0 * beta * c_F * length / denom;
}

/// Grid version: discrete beta and the discrete Poincare constant 1/sqrt(lambda_1^h),
/// for which the bound holds exactly on the grid.
inline double stationary_bound(const Model& m, const Grid& g) {
  const double beta = beta_constant_discrete(m.beam, g);
  const double P = 1.0 / std::sqrt(discrete_dirichlet_eigenvalue(g, 1));
  return stationary_bound(m.source.alpha(), beta, m.source.c_F(), m.beam.length, P);
}

/// ||phi_x||^2 + ||psi_x||^2 + ||w_x||^2 of a displacement triple.
inline double gradient_norm_sq(const Vector& phi, const Vector& psi, const Vector& w, const Grid& g) {
  return edge_norm_sq(edge_difference(phi, g), g) + edge_norm_sq(edge_difference(psi, g), g) +
         edge_norm_sq(edge_difference(w, g), g);
}

struct MultistartOptions {
  int guesses = 10;
  double amplitude = 1.0;  // scale of eigenmode and random guesses
  unsigned seed = 0;
  StationaryOptions solver;
};

/// Initial guesses in order: zero, +/- the first three elastic modes, then
/// random smooth fields. The first `count` are returned.
inline std::vector<StateZ> stationary_guesses(const Model& m, const Grid& g, int count, double amplitude,
                                              unsigned seed) {
  std::vector<StateZ> out;
  out.push_back(StateZ::zeros(g.n));
  if (static_cast<int>(out.size()) >= count) return out;
  const Matrix K = Matrix(stiffness_matrix(m.beam, g));
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  for (int mode = 0; mode < 3 && static_cast<int>(out.size()) < count; ++mode) {
    Vector v = es.eigenvectors().col(mode);
    v *= amplitude / v.cwiseAbs().maxCoeff();
    for (double sgn : {1.0, -1.0}) {
      if (static_cast<int>(out.size()) >= count) break;
      StateZ z = StateZ::zeros(g.n);
      unpack(sgn * v, Vector::Zero(v.size()), z);
      out.push_back(z);
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    StateZ z = StateZ::zeros(g.n);
    for (int c = 0; c < 3; ++c) {
      Vector& f = z.displacement(c);
      for (int k = 1; k <= 4; ++k) {
        const double a = amplitude * normal(rng) / k;
        for (int j = 0; j < g.n; ++j) f[j] += a * std::sin(k * std::numbers::pi * g.x(j) / g.length);
      }
    }
    out.push_back(z);
  }
  return out;
}

/// Multistart Newton; failed starts are dropped, and solutions closer than
/// 10 tol in H^1 are merged.
inline std::vector<StationarySolution> enumerate_stationary(const Model& m, const Grid& g,
                                                            const MultistartOptions& opts = {}) {
  require(opts.guesses >= 1, "need at least one guess");
  const auto guesses = stationary_guesses(m, g, opts.guesses, opts.amplitude, opts.seed);
  std::vector<std::future<std::optional<StationarySolution>>> jobs;
  for (const auto& z : guesses)
    jobs.push_back(std::async(std::launch::async, [&m, &g, z, &opts]() -> std::optional<StationarySolution> {
      try {
        return solve_stationary(m, g, z, opts.solver);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::NewtonDiverged || e.kind() == ErrorKind::SingularJacobian) return std::nullopt;
        throw;
      }
    }));
  std::vector<StationarySolution> found;
  for (auto& job : jobs) {
    auto s = job.get();
    if (!s) continue;
    const StateZ zs = s->to_state();
    bool dup = false;
    for (const auto& f : found)
      if (h1_distance(zs, f.to_state(), g) <= 10.0 * opts.solver.tol) {
        dup = true;
        break;
      }
    if (!dup) found.push_back(std::move(*s));
  }
  return found;
}

}  // namespace bresse

#pragma once

// Uniform-grid finite differences on (0, L) with homogeneous Dirichlet
// conditions. Displacement derivatives live on the n+1 cell edges (forward
// differences, ghost values zero); the zeroth-order couplings of the shear and
// axial strains are edge averages. With midpoint quadrature over the edges,
// the elastic energy is an exact quadratic form u^T (h K) u whose gradient is
// the discrete elastic force, so discrete integration by parts is exact.

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "bresse/errors.hpp"
#include "bresse/model.hpp"

namespace bresse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Grid {
  int n = 0;          // interior nodes
  double length = 0;  // L
  double h = 0;       // L / (n + 1)

  double node(int j) const { return j * h; }  // j = 0..n+1; interior j = 1..n
  /// Position of interior entry `idx` (0-based storage index).
  double x(int idx) const { return (idx + 1) * h; }
  bool operator==(const Grid& o) const { return n == o.n && length == o.length; }
};

inline Grid build_grid(double length, int n) {
  require(length > 0, "grid length must be positive");
  if (n < 3) fail(ErrorKind::TooCoarse, "need at least 3 interior nodes, got " + std::to_string(n));
  return {n, length, length / (n + 1)};
}

/// Six interior-node fields; boundary values are implicitly zero.
struct StateZ {
  Vector phi, psi, w, phi_t, psi_t, w_t;

  static StateZ zeros(int n) {
    StateZ z;
    for (Vector* v : z.fields()) *v = Vector::Zero(n);
    return z;
  }

  int size() const { return static_cast<int>(phi.size()); }
  bool consistent() const {
    const auto n = phi.size();
    return psi.size() == n && w.size() == n && phi_t.size() == n && psi_t.size() == n && w_t.size() == n;
  }

  std::array<Vector*, 6> fields() { return {&phi, &psi, &w, &phi_t, &psi_t, &w_t}; }
  std::array<const Vector*, 6> fields() const { return {&phi, &psi, &w, &phi_t, &psi_t, &w_t}; }

  Vector& displacement(int c) { return *fields()[c]; }
  const Vector& displacement(int c) const { return *fields()[c]; }
  Vector& velocity(int c) { return *fields()[c + 3]; }
  const Vector& velocity(int c) const { return *fields()[c + 3]; }

  StateZ operator-(const StateZ& o) const {
    StateZ r;
    auto rf = r.fields();
    auto a = fields();
    auto b = o.fields();
    for (int i = 0; i < 6; ++i) *rf[i] = *a[i] - *b[i];
    return r;
  }
  StateZ operator+(const StateZ& o) const {
    StateZ r;
    auto rf = r.fields();
    auto a = fields();
    auto b = o.fields();
    for (int i = 0; i < 6; ++i) *rf[i] = *a[i] + *b[i];
    return r;
  }
  StateZ operator*(double s) const {
    StateZ r = *this;
    for (Vector* v : r.fields()) *v *= s;
    return r;
  }
};

// Interleaved packing (phi_j, psi_j, w_j) per node, used by the solvers.
inline Vector pack_displacement(const StateZ& z) {
  const int n = z.size();
  Vector u(3 * n);
  for (int j = 0; j < n; ++j) {
    u[3 * j] = z.phi[j];
    u[3 * j + 1] = z.psi[j];
    u[3 * j + 2] = z.w[j];
  }
  return u;
}
inline Vector pack_velocity(const StateZ& z) {
  const int n = z.size();
  Vector v(3 * n);
  for (int j = 0; j < n; ++j) {
    v[3 * j] = z.phi_t[j];
    v[3 * j + 1] = z.psi_t[j];
    v[3 * j + 2] = z.w_t[j];
  }
  return v;
}
inline void unpack(const Vector& u, const Vector& v, StateZ& z) {
  const int n = static_cast<int>(u.size() / 3);
  for (int j = 0; j < n; ++j) {
    z.phi[j] = u[3 * j];
    z.psi[j] = u[3 * j + 1];
    z.w[j] = u[3 * j + 2];
    z.phi_t[j] = v[3 * j];
    z.psi_t[j] = v[3 * j + 1];
    z.w_t[j] = v[3 * j + 2];
  }
}

inline void check_length(const Vector& u, const Grid& g) {
  if (u.size() != g.n)
    fail(ErrorKind::LengthMismatch,
         "vector of length " + std::to_string(u.size()) + " on grid with " + std::to_string(g.n) + " nodes");
}

// ---------------------------------------------------------------------------
// Elementary operators
// ---------------------------------------------------------------------------

/// gamma * (u_{j-1} - 2 u_j + u_{j+1}) / h^2 with zero ghosts.
inline Vector apply_laplacian(double gamma, const Vector& u, const Grid& g) {
  check_length(u, g);
  const int n = g.n;
  Vector out(n);
  const double s = gamma / (g.h * g.h);
  for (int j = 0; j < n; ++j) {
    const double left = j > 0 ? u[j - 1] : 0.0;
    const double right = j + 1 < n ? u[j + 1] : 0.0;
    out[j] = s * (left - 2.0 * u[j] + right);
  }
  return out;
}

inline SparseMatrix laplacian_matrix(double gamma, const Grid& g) {
  std::vector<Eigen::Triplet<double>> t;
  const double s = gamma / (g.h * g.h);
  for (int j = 0; j < g.n; ++j) {
    t.emplace_back(j, j, -2.0 * s);
    if (j > 0) t.emplace_back(j, j - 1, s);
    if (j + 1 < g.n) t.emplace_back(j, j + 1, s);
  }
  SparseMatrix m(g.n, g.n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Centered first difference (u_{j+1} - u_{j-1}) / 2h with zero ghosts.
inline SparseMatrix centered_difference_matrix(const Grid& g) {
  std::vector<Eigen::Triplet<double>> t;
  const double s = 0.5 / g.h;
  for (int j = 0; j < g.n; ++j) {
    if (j > 0) t.emplace_back(j, j - 1, -s);
    if (j + 1 < g.n) t.emplace_back(j, j + 1, s);
  }
  SparseMatrix m(g.n, g.n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// Forward differences on the n+1 edges.
inline Vector edge_difference(const Vector& u, const Grid& g) {
  check_length(u, g);
  const int n = g.n;
  Vector d(n + 1);
  for (int e = 0; e <= n; ++e) {
    const double left = e > 0 ? u[e - 1] : 0.0;
    const double right = e < n ? u[e] : 0.0;
    d[e] = (right - left) / g.h;
  }
  return d;
}

/// Edge averages (u_j + u_{j+1}) / 2 with zero ghosts.
inline Vector edge_average(const Vector& u, const Grid& g) {
  check_length(u, g);
  const int n = g.n;
  Vector a(n + 1);
  for (int e = 0; e <= n; ++e) {
    const double left = e > 0 ? u[e - 1] : 0.0;
    const double right = e < n ? u[e] : 0.0;
    a[e] = 0.5 * (left + right);
  }
  return a;
}

/// Discrete L^2 inner product on interior nodes (boundary values are zero).
inline double inner(const Vector& u, const Vector& v, const Grid& g) { return g.h * u.dot(v); }
inline double l2_norm_sq(const Vector& u, const Grid& g) { return g.h * u.squaredNorm(); }
inline double edge_norm_sq(const Vector& e, const Grid& g) { return g.h * e.squaredNorm(); }

inline double lp_norm(const Vector& u, double p, const Grid& g) {
  double s = 0.0;
  for (int j = 0; j < u.size(); ++j) s += std::pow(std::abs(u[j]), p);
  return std::pow(g.h * s, 1.0 / p);
}

// ---------------------------------------------------------------------------
// Strains, energies, norms
// ---------------------------------------------------------------------------

struct EdgeStrains {
  Vector shear;    // phi_x + psi + ell w
  Vector bending;  // psi_x
  Vector axial;    // w_x - ell phi
};

inline EdgeStrains strains(const Vector& phi, const Vector& psi, const Vector& w, const BeamParameters& p,
                           const Grid& g) {
  return {edge_difference(phi, g) + edge_average(psi, g) + p.ell * edge_average(w, g), edge_difference(psi, g),
          edge_difference(w, g) - p.ell * edge_average(phi, g)};
}

/// b||psi_x||^2 + k||phi_x + psi + ell w||^2 + k0||w_x - ell phi||^2.
inline double elastic_energy(const Vector& phi, const Vector& psi, const Vector& w, const BeamParameters& p,
                             const Grid& g) {
  const auto s = strains(phi, psi, w, p, g);
  return p.b * edge_norm_sq(s.bending, g) + p.k * edge_norm_sq(s.shear, g) + p.k0 * edge_norm_sq(s.axial, g);
}

inline double kinetic_energy(const StateZ& z, const BeamParameters& p, const Grid& g) {
  return p.rho1 * l2_norm_sq(z.phi_t, g) + p.rho2 * l2_norm_sq(z.psi_t, g) + p.rho1 * l2_norm_sq(z.w_t, g);
}

/// ||Z||_H^2: kinetic plus elastic quadratic forms.
inline double h_norm_squared(const StateZ& z, const BeamParameters& p, const Grid& g) {
  return kinetic_energy(z, p, g) + elastic_energy(z.phi, z.psi, z.w, p, g);
}

inline double h_distance(const StateZ& a, const StateZ& b, const BeamParameters& p, const Grid& g) {
  return std::sqrt(h_norm_squared(a - b, p, g));
}

/// H^1_0 distance of displacement triples: sqrt(sum ||du||^2 + ||du_x||^2).
inline double h1_distance(const StateZ& a, const StateZ& b, const Grid& g) {
  double s = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Vector d = a.displacement(c) - b.displacement(c);
    s += l2_norm_sq(d, g) + edge_norm_sq(edge_difference(d, g), g);
  }
  return std::sqrt(s);
}

/// Trapezoid quadrature of int_0^L F(phi, psi, w) dx.
inline double discrete_F_energy(const Vector& phi, const Vector& psi, const Vector& w, const Source& src,
                                const Grid& g) {
  check_length(phi, g);
  double s = src.potential(Vec3::Zero());  // two half-weight boundary nodes
  for (int j = 0; j < g.n; ++j) s += src.potential(Vec3(phi[j], psi[j], w[j]));
  return g.h * s;
}

// ---------------------------------------------------------------------------
// Assembled operators
// ---------------------------------------------------------------------------

/// Pointwise elastic operator K on interleaved displacements: the discrete
/// elastic force is -K u and the elastic energy is h u^T K u.
inline SparseMatrix stiffness_matrix(const BeamParameters& p, const Grid& g) {
  const int n = g.n;
  const double ih = 1.0 / g.h, l = p.ell;
  // Rows: shear, bending, axial; columns: (phi, psi, w)_j, (phi, psi, w)_{j+1}.
  const double B[3][6] = {
      {-ih, 0.5, 0.5 * l, ih, 0.5, 0.5 * l},
      {0.0, -ih, 0.0, 0.0, ih, 0.0},
      {-0.5 * l, 0.0, -ih, -0.5 * l, 0.0, ih},
  };
  const double D[3] = {p.k, p.b, p.k0};
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(36 * (n + 1));
  for (int e = 0; e <= n; ++e) {
    // edge e joins interior nodes e-1 and e (0-based); -1 and n are ghosts
    int dof[6];
    for (int c = 0; c < 3; ++c) {
      dof[c] = e > 0 ? 3 * (e - 1) + c : -1;
      dof[c + 3] = e < n ? 3 * e + c : -1;
    }
    for (int a = 0; a < 6; ++a) {
      if (dof[a] < 0) continue;
      for (int c = 0; c < 6; ++c) {
        if (dof[c] < 0) continue;
        double v = 0.0;
        for (int r = 0; r < 3; ++r) v += B[r][a] * D[r] * B[r][c];
        if (v != 0.0) t.emplace_back(dof[a], dof[c], v);
      }
    }
  }
  SparseMatrix K(3 * n, 3 * n);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

/// Gram matrix of the gradient form ||phi_x||^2 + ||psi_x||^2 + ||w_x||^2 (divided by h).
inline SparseMatrix gradient_gram_matrix(const Grid& g) {
  const int n = g.n;
  std::vector<Eigen::Triplet<double>> t;
  const double s = 1.0 / (g.h * g.h);
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < 3; ++c) {
      t.emplace_back(3 * j + c, 3 * j + c, 2.0 * s);
      if (j > 0) t.emplace_back(3 * j + c, 3 * (j - 1) + c, -s);
      if (j + 1 < n) t.emplace_back(3 * j + c, 3 * (j + 1) + c, -s);
    }
  SparseMatrix G(3 * n, 3 * n);
  G.setFromTriplets(t.begin(), t.end());
  return G;
}

/// Elastic force -K u split back into the three fields.
inline std::array<Vector, 3> elastic_force(const Vector& phi, const Vector& psi, const Vector& w,
                                           const BeamParameters& p, const Grid& g) {
  StateZ z = StateZ::zeros(g.n);
  z.phi = phi;
  z.psi = psi;
  z.w = w;
  const Vector f = -(stiffness_matrix(p, g) * pack_displacement(z));
  std::array<Vector, 3> out{Vector(g.n), Vector(g.n), Vector(g.n)};
  for (int j = 0; j < g.n; ++j)
    for (int c = 0; c < 3; ++c) out[c][j] = f[3 * j + c];
  return out;
}

/// Smallest beta with ||phi_x||^2 + ||psi_x||^2 + ||w_x||^2 <= beta * (elastic form),
/// i.e. 1 / (smallest generalized eigenvalue of (K, G)). Dense; meant for desk-scale grids.
inline double beta_constant_discrete(const BeamParameters& p, const Grid& g) {
  const Matrix K = Matrix(stiffness_matrix(p, g));
  const Matrix G = Matrix(gradient_gram_matrix(g));
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(K, G, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorKind::SingularForm, "generalized eigensolve failed");
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  if (!(lmin > 1e-12 * lmax))
    fail(ErrorKind::SingularForm, "elastic form has a (numerical) kernel, lambda_min = " + std::to_string(lmin));
  return 1.0 / lmin;
}

/// Smallest Dirichlet eigenvalue of the 3-point -d^2/dx^2 on the grid.
inline double discrete_dirichlet_eigenvalue(const Grid& g, int mode = 1) {
  return 2.0 / (g.h * g.h) * (1.0 - std::cos(mode * std::numbers::pi * g.h / g.length));
}

/// Linear first-order generator z' = A z for the state ordering
/// (u interleaved, v interleaved), with damping linearized at zero velocity and
/// the source linearized at zero displacement. Dense, desk scale.
inline Matrix linear_generator(const Model& m, const Grid& g) {
  const int N = 3 * g.n;
  const Matrix K = Matrix(stiffness_matrix(m.beam, g));
  const double rho[3] = {m.beam.rho1, m.beam.rho2, m.beam.rho1};
  const Mat3 H0 = m.source.hessian(Vec3::Zero());
  Matrix A = Matrix::Zero(2 * N, 2 * N);
  A.topRightCorner(N, N).setIdentity();
  for (int r = 0; r < N; ++r) {
    const int c = r % 3, j = r / 3;
    const double x = g.x(j);
    for (int col = 0; col < N; ++col) A(N + r, col) = -K(r, col) / rho[c];
    for (int cc = 0; cc < 3; ++cc) A(N + r, 3 * j + cc) -= H0(c, cc) / rho[c];
    const auto& comp = m.damping.components[c];
    A(N + r, N + r) = -comp.a(x) * comp.g.derivative(0.0) / rho[c];
  }
  return A;
}

/// Operators assembled once per (parameters, grid).
struct DiscreteOperatorSet {
  SparseMatrix dx;                       // centered first difference
  std::array<SparseMatrix, 3> laplacian;  // gamma_i d_xx
  SparseMatrix stiffness;                // elastic operator K

  static DiscreteOperatorSet build(const BeamParameters& p, const Grid& g) {
    const auto gam = WaveSpeeds::of(p).as_array();
    return {centered_difference_matrix(g),
            {laplacian_matrix(gam[0], g), laplacian_matrix(gam[1], g), laplacian_matrix(gam[2], g)},
            stiffness_matrix(p, g)};
  }
};

/// Samples a function of x at the interior nodes.
template <class F>
Vector sample(const Grid& g, F&& f) {
  Vector v(g.n);
  for (int j = 0; j < g.n; ++j) v[j] = f(g.x(j));
  return v;
}

}  // namespace bresse

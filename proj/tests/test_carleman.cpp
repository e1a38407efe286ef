#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bresse/carleman.hpp"
#include "oracles.hpp"

using namespace bresse;
constexpr double pi = std::numbers::pi;

namespace {

CarlemanSetup reference_setup() {
  SetupOptions o;
  o.T = 4.0;
  o.c = 0.5;
  o.delta = 0.5;
  o.sigma = 0.25;
  return make_setup(o);
}

}  // namespace

TEST(Weights, ClosedForms) {
  EXPECT_DOUBLE_EQ(weight_d(1, 0.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(weight_d(1, 1.0, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(weight_d(2, 1.0, 1.0), 0.5);
  for (double x = 0; x <= 1.0; x += 0.125) {
    EXPECT_DOUBLE_EQ(weight_d(1, x, 1.0), oracle::d1(x, 1.0));
    EXPECT_DOUBLE_EQ(weight_d(2, x, 1.0), oracle::d2(x, 1.0));
  }
  double mn = 1e300;
  for (int i = 0; i <= 1000; ++i) mn = std::min(mn, weight_d(1, 0.5 * i / 1000, 1.0));
  EXPECT_DOUBLE_EQ(mn, 0.5);
  const auto s = reference_setup();
  for (double x : {0.0, 0.2, 0.5}) EXPECT_DOUBLE_EQ(s.phi(1, x, s.T / 2), weight_d(1, x, 1.0));
}

TEST(Weights, EvalOutOfDomain) {
  const auto s = reference_setup();
  try {
    weight_eval(1, 0.7, 1.0, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
  const auto v = weight_eval(2, 0.75, 1.0, s, 2.0);
  EXPECT_DOUBLE_EQ(v.d, oracle::d2(0.75, 1.0));
  EXPECT_DOUBLE_EQ(v.phi_t, -2 * 0.5 * (1.0 - 2.0));
  EXPECT_DOUBLE_EQ(v.grad, 2.0 * (0.75 - 2.0));
}

TEST(TimeParameters, ThresholdsAndSelection) {
  const auto tp = select_time_parameters(1.0, 0.5);
  EXPECT_DOUBLE_EQ(max_weight(1, 1.0, 0.5), 1.125);
  EXPECT_DOUBLE_EQ(max_weight(2, 1.0, 0.5), 1.125);
  EXPECT_NEAR(tp.T0_1, std::sqrt(4.5), 1e-15);
  EXPECT_NEAR(tp.T0_2, oracle::T0(1.0, 0.5), 1e-15);
  EXPECT_NEAR(tp.T, 1.05 * std::sqrt(4.5), 1e-14);
  EXPECT_GT(tp.c, 0.0);
  EXPECT_LT(tp.c, 1.0);
  EXPECT_GT(tp.c * tp.T * tp.T, 4 * 1.125 + 4 * tp.delta);
  try {
    select_time_parameters(1.0, 0.5, 0.5, std::sqrt(4.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Infeasible);
  }
}

TEST(TimeParameters, ExplicitDeltaRange) {
  SetupOptions o;
  o.T = 4.0;
  o.c = 0.5;
  o.delta = 0.5;
  EXPECT_NO_THROW(make_setup(o));
  o.delta = 0.874;
  EXPECT_NO_THROW(make_setup(o));
  o.delta = 0.875;
  EXPECT_THROW(make_setup(o), Error);
}

TEST(SigmaWindow, ClosedFormWindow) {
  const auto w = sigma_window(1.0, 4.0, 0.5, 0.25);
  const double r = oracle::window_half_width(1.0, 0.5, 0.25);
  EXPECT_NEAR(r, std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(w.t0, 2.0 - r, 1e-12);
  EXPECT_NEAR(w.t1, 2.0 + r, 1e-12);
  EXPECT_NEAR(w.t0, 1.2929, 1e-4);
  EXPECT_NEAR(w.t1, 2.7071, 1e-4);
  EXPECT_DOUBLE_EQ(w.sigma_star, 0.9 * 0.25);
  const auto tiny = sigma_window(1.0, 4.0, 0.5, 1e-12);
  EXPECT_NEAR(tiny.t1 - tiny.t0, 2 * oracle::window_half_width(1.0, 0.5, 0.0), 1e-9);
  try {
    sigma_window(1.0, 4.0, 0.5, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyWindow);
  }
}

TEST(QSigma, Membership) {
  const auto s = reference_setup();
  for (double x = 0; x <= 1.0; x += 0.05) EXPECT_FALSE(q_sigma_membership(x, 0.0, s));
  EXPECT_TRUE(q_sigma_membership(0.3, 2.0, s));
}

TEST(Setup, AllChecksPass) {
  const auto s = reference_setup();
  const auto rep = verify_setup(s, {1.0, 1.0, 1.0});
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  for (const char* name : {"lemma.1", "lemma.2", "lemma.3", "lemma.4", "lemma.5", "(c)", "(phi.1)", "(phi.2)",
                           "Q(sigma) inclusion", "(es)", "k_ij rescaled"})
    EXPECT_NO_THROW(rep.get(name)) << name;
}

TEST(Cutoff, DecompositionExactOnOmegaVanishingFields) {
  const auto s = make_setup({});
  const Grid g = build_grid(1.0, 99);
  const Interval om = s.omega();
  const Vector u = sample(g, [&](double x) { return om.contains(x) ? 0.0 : std::sin(3 * pi * x) + x; });
  EXPECT_EQ(cutoff_decomposition_residual(u, g, s), 0.0);
  for (double x = 0; x <= 1.0; x += 0.01) {
    EXPECT_GE(cutoff(1, x, s), 0.0);
    EXPECT_LE(cutoff(1, x, s), 1.0);
    if (!om.contains(x)) EXPECT_DOUBLE_EQ(cutoff(1, x, s) + cutoff(2, x, s), 1.0) << x;
  }
  EXPECT_EQ(smoothstep5(0.0), 0.0);
  EXPECT_EQ(smoothstep5(1.0), 1.0);
}

TEST(BoundaryTerm, ZeroSolutionIsZero) {
  const auto s = reference_setup();
  const Grid g = build_grid(0.5, 49);
  WaveTrajectory tr;
  tr.grid = g;
  for (int k = 0; k <= 10; ++k) {
    tr.times.push_back(0.4 * k);
    tr.u.push_back({Vector::Zero(49)});
    tr.ut.push_back({Vector::Zero(49)});
  }
  EXPECT_EQ(boundary_term(tr, 0, 1, s, 2.0, 1.0).total, 0.0);
}

TEST(BoundaryTerm, StandingWaveIsNegative) {
  const auto s = reference_setup();
  // explicit solution cos(pi t) sin(pi x) restricted to Omega_1 = (0, 0.5), which vanishes at 0 only;
  // with u(L0) != 0 the right end is kept out by using only the left contribution
  const int n = 99;
  const Grid g{n, 0.5, 0.5 / (n + 1)};
  WaveTrajectory tr;
  tr.grid = g;
  for (int k = 0; k <= 400; ++k) {
    const double t = s.T * k / 400;
    tr.times.push_back(t);
    tr.u.push_back({sample(g, [&](double x) { return oracle::standing_wave(x, t, 1.0); })});
    tr.ut.push_back({Vector::Zero(n)});
  }
  const auto bt = boundary_term(tr, 0, 1, s, 1.0, 1.0);
  EXPECT_LT(bt.left, 0.0);
  // closed form of the left term: 2 tau int e^{2 tau phi(0,t)} (pi cos pi t)^2 <grad d_1, nu>(0) dt
  double ref = 0.0;
  const int M = 20000;
  for (int k = 0; k <= M; ++k) {
    const double t = s.T * k / M, wq = (k == 0 || k == M ? 0.5 : 1.0) * s.T / M;
    const double du = pi * std::cos(pi * t);
    ref += wq * 2.0 * std::exp(2.0 * s.phi(1, 0.0, t)) * du * du * (-weight_d_prime(1, 0.0, 1.0));
  }
  EXPECT_NEAR(bt.left, ref, 2e-3 * std::abs(ref));
}

TEST(Carleman, OmegaVanishingDataGivesNonpositiveLhs) {
  const auto s = make_setup({});
  const Grid g = build_grid(1.0, 99);
  BeamParameters p;
  p.ell = 0.5;
  const auto sys = LinearCoupledSystem::bresse_linearized(p, g);
  const Interval om = s.omega();
  std::vector<Vector> u0(3), u1(3, Vector::Zero(g.n));
  for (int i = 0; i < 3; ++i)
    u0[i] = sample(g, [&](double x) {
      if (x < om.lo) return std::sin(pi * x / om.lo) * (i + 1);
      if (x > om.hi) return std::sin(pi * (x - om.hi) / (1 - om.hi));
      return 0.0;
    });
  IntegratorConfig cfg = IntegratorConfig::defaults(g, s.T);
  cfg.stride = 1;
  const auto runs = solve_subdomains(sys, g, u0, u1, s, cfg);
  const auto rep = carleman_inequality_check(runs, sys, s);
  ASSERT_EQ(rep.rows.size(), s.taus.size());
  for (const auto& row : rep.rows) {
    EXPECT_LE(row.lhs, 0.0) << row.tau;
    EXPECT_GT(row.energy, 0.0);
  }
  EXPECT_GT(rep.k1, 0.0);
  EXPECT_LE(rep.k1, rep.k2);
}

TEST(Carleman, ZeroDataIsTriviallyConsistent) {
  const auto s = make_setup({});
  const Grid g = build_grid(1.0, 99);
  const auto sys = LinearCoupledSystem::uncoupled({1.0});
  IntegratorConfig cfg = IntegratorConfig::defaults(g, s.T);
  const auto runs = solve_subdomains(sys, g, {Vector::Zero(99)}, {Vector::Zero(99)}, s, cfg);
  for (const auto& row : carleman_inequality_check(runs, sys, s).rows) {
    EXPECT_EQ(row.lhs, 0.0);
    EXPECT_EQ(row.energy, 0.0);
  }
}

TEST(Ucp, ZeroDataGivesZeroRatio) {
  const Grid g = build_grid(1.0, 50);
  const auto sys = LinearCoupledSystem::uncoupled({1.0, 1.0, 1.0});
  const std::vector<Vector> z(3, Vector::Zero(50));
  const auto rep = ucp_experiment(sys, g, z, z, {0.4, 0.6}, IntegratorConfig::defaults(g, 2.0));
  EXPECT_EQ(rep.ratio, 0.0);
  EXPECT_EQ(rep.trace_sup, 0.0);
  EXPECT_EQ(rep.energy0, 0.0);
}

TEST(Ucp, SingleStandingWave) {
  const int n = 99;
  const Grid g = build_grid(1.0, n);
  const auto sys = LinearCoupledSystem::uncoupled({1.0});
  IntegratorConfig cfg = IntegratorConfig::defaults(g, 2.0);
  cfg.stride = 1;
  const Vector u0 = sample(g, [](double x) { return std::sin(pi * x); });
  const auto rep = ucp_experiment(sys, g, {u0}, {Vector::Zero(n)}, {0.4, 0.6}, cfg);
  // ||sin(pi x)||_{L2(0.4,0.6)} over sqrt(F(0)), F(0) = 1/2 + pi^2/2
  const double mass = 0.1 + (std::sin(1.2 * pi) - std::sin(0.8 * pi)) / (-4 * pi);
  const double cont = std::sqrt(mass) / std::sqrt(0.5 + pi * pi / 2);
  EXPECT_NEAR(rep.ratio, cont, 0.03 * cont);
  EXPECT_GE(rep.omega_trace.front(), std::sin(0.4 * pi) * std::sqrt(0.18));
}

TEST(Ucp, SweepIsPositive) {
  const auto s = make_setup({});
  const Grid g = build_grid(1.0, 60);
  const auto sys = LinearCoupledSystem::bresse_linearized(BeamParameters{}, g);
  IntegratorConfig cfg = IntegratorConfig::defaults(g, s.T);
  const auto sw = ucp_sweep(sys, g, s.omega(), cfg, 10, 1);
  EXPECT_EQ(sw.ratios.size(), 10u);
  EXPECT_GT(sw.min_ratio, 1e-6);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "bresse/model.hpp"
#include "oracles.hpp"

using namespace bresse;

namespace {

Model linear_full(double L = 1.0) {
  Model m;
  m.beam.length = L;
  m.damping = DampingSpec::uniform({0.0, L}, 1.0, DampingLaw::linear());
  m.source = Source::zero();
  return m;
}

SamplingOptions quick() {
  SamplingOptions o;
  o.points = 2000;
  o.x_points = 2000;
  return o;
}

}  // namespace

TEST(Validate, LinearDampingZeroSourcePasses) {
  const auto rep = validate(linear_full(), quick());
  EXPECT_TRUE(rep.all_passed());
  for (const char* name : {"(a.1)", "(g.1)", "(f.1)", "(f.2)", "(f.3)"}) EXPECT_TRUE(rep.get(name).passed) << name;
}

TEST(Validate, TanhDampingSlopeRange) {
  Model m = linear_full();
  m.damping = DampingSpec::uniform({0.0, 1.0}, 1.0, DampingLaw::from_catalog("linear_tanh", {{"tanh_weight", 0.5}}));
  const auto rep = validate(m, quick());
  EXPECT_TRUE(rep.get("(g.1)").passed);
  // g'(s) = 1 + 0.5 (1 - tanh^2 s) lies in (1, 1.5]
  EXPECT_GT(rep.slope_min, 1.0);
  EXPECT_LE(rep.slope_max, 1.5 + 1e-14);
  EXPECT_NEAR(rep.slope_max, 1.5, 1e-6);
  const DampingLaw g = DampingLaw::from_catalog("linear_tanh", {{"tanh_weight", 0.5}});
  for (double s = -5; s <= 5; s += 0.01) {
    const double t = std::tanh(s);
    EXPECT_NEAR(g.derivative(s), 1.0 + 0.5 * (1.0 - t * t), 1e-14);
  }
}

TEST(Validate, DisjointIntervalsAreRejected) {
  Model m = linear_full();
  m.damping.components[0].a = {{0.0, 0.3}, 1.0};
  m.damping.components[1].a = {{0.6, 1.0}, 1.0};
  m.damping.components[2].a = {{0.0, 1.0}, 1.0};
  try {
    validate(m, quick());
    FAIL() << "expected EmptyDampingIntersection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyDampingIntersection);
  }
}

TEST(Validate, NegativeSlopeIsNonmonotone) {
  Model m = linear_full();
  m.damping = DampingSpec::uniform({0.0, 1.0}, 1.0, DampingLaw::from_catalog("linear_tanh", {{"slope", 0.2}, {"tanh_weight", -1.0}}));
  try {
    validate(m, quick());
    FAIL() << "expected NonmonotoneDamping";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonmonotoneDamping);
  }
}

TEST(Validate, Deterministic) {
  Model m = linear_full();
  m.source = Source::from_catalog("double_well", {{"lambda", 1.0}, {"mu", 2.0}});
  const auto a = validate(m, quick()), b = validate(m, quick());
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].passed, b.checks[i].passed);
    EXPECT_EQ(a.checks[i].value, b.checks[i].value);
  }
  EXPECT_EQ(a.c_f, b.c_f);
}

TEST(Validate, PowerSourceReportsPositiveCf) {
  Model m = linear_full();
  m.source = Source::from_catalog("power", {{"kappa", 1.0}, {"p", 3.0}});
  const auto rep = validate(m, quick());
  EXPECT_TRUE(rep.all_passed());
  EXPECT_GT(rep.c_f, 0.0);
}

TEST(Source, HessianIsSymmetricFiniteDifferenceOfGradient) {
  for (const auto& name : Source::catalog()) {
    const Source s = Source::from_catalog(name, name == "linear" ? ParamMap{{"e1", 0.3}} : ParamMap{});
    for (const Vec3 u : {Vec3(0.3, -0.2, 0.5), Vec3(-1.1, 0.7, 0.2), Vec3(0.05, 0.9, -0.4)}) {
      const double eps = 1e-6;
      Mat3 fd;
      for (int c = 0; c < 3; ++c) {
        const Vec3 e = Vec3::Unit(c) * eps;
        fd.col(c) = (s.gradient(u + e) - s.gradient(u - e)) / (2 * eps);
      }
      EXPECT_LT((fd - fd.transpose()).cwiseAbs().maxCoeff(), 1e-7) << name;
      EXPECT_LT((fd - s.hessian(u)).cwiseAbs().maxCoeff(), 1e-6) << name;
    }
  }
}

TEST(Source, UnknownNameIsValidationError) {
  try {
    Source::from_catalog("cubic_spline");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
  }
  try {
    DampingLaw::from_catalog("friction");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ValidationError);
  }
}

TEST(EqualSpeed, Examples) {
  auto beam = [](double r1, double r2, double k, double k0, double b) {
    BeamParameters p;
    p.rho1 = r1;
    p.rho2 = r2;
    p.k = k;
    p.k0 = k0;
    p.b = b;
    return p;
  };
  EXPECT_TRUE(equal_speed_check(beam(1, 2, 1, 1, 2)).equal);
  const auto r = equal_speed_check(beam(1, 1, 1, 1, 2));
  EXPECT_FALSE(r.equal);
  EXPECT_DOUBLE_EQ(r.ratio_residual, 0.5);
  EXPECT_TRUE(equal_speed_check(beam(2, 3, 4, 4, 6)).equal);
}

TEST(EqualSpeed, ScalingInvariance) {
  BeamParameters p;
  p.rho1 = 1.3;
  p.rho2 = 0.7;
  p.k = 2.1;
  p.k0 = 2.1;
  p.b = 0.7 * 2.1 / 1.3;
  for (double c : {1e-3, 0.5, 7.0, 1e4}) {
    BeamParameters q = p;
    q.rho1 *= c;
    q.rho2 *= c;
    q.k *= c;
    q.k0 *= c;
    q.b *= c;
    EXPECT_EQ(equal_speed_check(p).equal, equal_speed_check(q).equal) << c;
  }
}

TEST(Poincare, ClosedForms) {
  EXPECT_DOUBLE_EQ(poincare_constant(std::numbers::pi), 1.0);
  EXPECT_NEAR(poincare_constant(1.0), 0.3183098861837907, 1e-15);
  // 1 / P^2 is the limit of the smallest discrete Dirichlet eigenvalue
  const double lam = oracle::laplacian_eigenvalue(1, 999, 1.0);
  EXPECT_NEAR(lam, std::numbers::pi * std::numbers::pi, 1e-4);
  EXPECT_NEAR(1.0 / (poincare_constant(1.0) * poincare_constant(1.0)), lam, 1e-4);
}

TEST(Interval, IntersectionWidth) {
  DampingSpec d;
  d.components[0].a = {{0.3, 0.6}, 1.0};
  d.components[1].a = {{0.4, 0.7}, 1.0};
  d.components[2].a = {{0.5, 0.8}, 1.0};
  EXPECT_NEAR(d.intersection().width(), 0.1, 1e-15);
}

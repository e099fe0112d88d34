#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orbitquant/cases.hpp"
#include "orbitquant/orbits.hpp"
#include "orbitquant/parse.hpp"

using namespace orbitquant;

namespace {

double diff_residual(const Expr& a, const Expr& b) { return residual(a - b); }

// Central difference of a chart expression in p or q at a real point.
double fd(const Expr& e, Var v, double p, double q, double h = 1e-5) {
  Point plus = chart_point(p, q), minus = chart_point(p, q);
  plus[index(v)] += h;
  minus[index(v)] -= h;
  return (eval(e, plus) - eval(e, minus)).real() / (2 * h);
}

}  // namespace

TEST(Charts, G411ChartIsPlane) {
  const Chart c = make_chart(Family::g411, {0.3, -1.1, 2.0, 0.7});
  EXPECT_EQ(c.psi[0], var(Var::q));
  EXPECT_EQ(c.psi[1], Expr(-1.1));
  EXPECT_EQ(c.psi[2], Expr(2.0));
  EXPECT_EQ(c.psi[3], var(Var::p));
}

TEST(Charts, G441ParaboloidChartAndTensor) {
  const double al = 0.4, be = -0.9, ga = 1.7, de = 0.2;
  const Chart c = make_chart(Family::g441, {al, be, ga, de});
  const Expr P = var(Var::p);
  const Expr cosq = 0.5 * (exp_of(Var::q, kI) + exp_of(Var::q, -kI));
  const Expr sinq = (1.0 / (2.0 * kI)) * (exp_of(Var::q, kI) - exp_of(Var::q, -kI));
  EXPECT_LT(diff_residual(c.psi[0], P * cosq), 1e-14);
  EXPECT_LT(diff_residual(c.psi[1], P * sinq), 1e-14);
  EXPECT_EQ(c.psi[2], Expr(ga));
  EXPECT_LT(diff_residual(c.psi[3], (P * P + 2 * ga * de - al * al - be * be) * (1 / (2 * ga))),
            1e-14);
  EXPECT_LT(diff_residual(c.lambda_pq(), P * (1 / ga)), 1e-15);
  EXPECT_EQ(c.kind, ChartKind::sheeted);
}

TEST(Charts, G442HalfPlaneCase) {
  const Chart c = make_chart(Family::g442, {1.3, 0.0, 0.0, 0.5});
  EXPECT_EQ(c.case_label, "10.1");
  EXPECT_EQ(c.psi[0], 1.3 * exp_of(Var::q, -1.0));
  EXPECT_TRUE(c.psi[1].is_zero());
  EXPECT_TRUE(c.psi[2].is_zero());
  EXPECT_EQ(c.psi[3], var(Var::p));
}

TEST(Charts, ZeroDimensionalStrataRejected) {
  EXPECT_THROW(make_chart(Family::g411, {1, 2, 0, 3}), ChartError);
  EXPECT_THROW(make_chart(Family::g421, {1, 0, 0, 3}), ChartError);
  EXPECT_THROW(make_chart(Family::g441, {0, 0, 0, 3}), ChartError);
  EXPECT_THROW(make_chart(Family::g442, {0, 0, 0, 1}), ChartError);
  try {
    make_chart(Family::g433, {0, 0, 0, 1});
    FAIL();
  } catch (const ChartError& e) {
    EXPECT_NE(std::string(e.what()).find("3.1.i"), std::string::npos);
  }
}

TEST(Charts, BasePointMapsToF) {
  Rng rng(11);
  for (const auto& cc : chart_cases()) {
    for (int trial = 0; trial < 10; ++trial) {
      const DualVector F = cc.sample_F(rng);
      const Chart c = make_chart(cc.algebra, F);
      const auto e = evaluate_psi(c, c.base);
      EXPECT_LT((e.value - F.vec()).norm(), 1e-9) << cc.name;
    }
  }
}

TEST(Hamiltonians, ClosedForms) {
  const double a = 0.3, b = -1.2, cc = 0.8, d = 1.9;
  const AlgebraElement A{a, b, cc, d};
  const Expr P = var(Var::p), Q = var(Var::q);
  {
    const double al = 0.5, be = 1.5, ga = -0.7;
    const auto h = hamiltonian(make_chart(Family::g411, {al, be, ga, 0.1}), A);
    EXPECT_LT(diff_residual(h.full, d * P + a * Q + (b * be + cc * ga)), 1e-14);
  }
  {
    const double al = 0.5, be = 1.5;
    const auto h = hamiltonian(make_chart(Family::g441, {al, be, 0.0, 0.1}), A);
    const Expr cosq = 0.5 * (exp_of(Var::q, kI) + exp_of(Var::q, -kI));
    const Expr sinq = (1.0 / (2.0 * kI)) * (exp_of(Var::q, kI) - exp_of(Var::q, -kI));
    const Expr expected = d * P + (a * al + b * be) * cosq + (b * al - a * be) * sinq;
    EXPECT_LT(diff_residual(h.full, expected), 1e-14);
  }
  {
    const double al = 0.5, be = 1.5, ga = 2.5, de = -0.4;
    const auto h = hamiltonian(make_chart(Family::g441, {al, be, ga, de}), A);
    const Expr cosq = 0.5 * (exp_of(Var::q, kI) + exp_of(Var::q, -kI));
    const Expr sinq = (1.0 / (2.0 * kI)) * (exp_of(Var::q, kI) - exp_of(Var::q, -kI));
    const Expr expected = (d / (2 * ga)) * P * P + (a * cosq + b * sinq) * P + cc * ga + d * de -
                          d * (al * al + be * be) / (2 * ga);
    EXPECT_LT(diff_residual(h.full, expected), 1e-14);
    EXPECT_FALSE(h.affine_in_p);
  }
  {
    // g433: middle coefficient b(alpha q + beta)
    const double al = 0.5, be = 1.5, ga = 2.5;
    const auto h = hamiltonian(make_chart(Family::g433, {al, be, ga, 0.0}), A);
    const Expr e = exp_of(Var::q, 1.0);
    const Expr expected =
        d * P + (a * al + b * (al * Q + be) + cc * (0.5 * al * Q * Q + be * Q + ga)) * e;
    EXPECT_LT(diff_residual(h.full, expected), 1e-14);
  }
  {
    const double al = 0.5, be = 1.5, ga = 2.5, de = 0.3;
    const auto h = hamiltonian(make_chart(Family::g442, {al, be, ga, de}), A);
    const Expr expected = (d + b * ga * exp_of(Var::q, 1.0)) * P + a * exp_of(Var::q, -1.0) +
                          b * (al * be - ga * de) * exp_of(Var::q, 1.0) + cc * ga;
    EXPECT_LT(diff_residual(h.full, expected), 1e-14);
  }
}

TEST(Hamiltonians, ParsedFormMatches) {
  const Chart c = make_chart(Family::g412, {1.0, 2.0, 3.0, 0.0});
  const auto h = hamiltonian(c, {1, 1, 1, 1});
  EXPECT_LT(diff_residual(h.full, parse_expr("p + 3*exp(q) + 3")), 1e-14);
}

TEST(Hamiltonians, LinearInA) {
  Rng rng(5);
  for (const auto& cc : chart_cases()) {
    const Chart c = make_chart(cc.algebra, cc.sample_F(rng));
    const auto A = random_element(rng), B = random_element(rng);
    const double mu = uniform(rng, -3, 3);
    const Expr lhs = pairing(c, A + mu * B);
    const Expr rhs = pairing(c, A) + mu * pairing(c, B);
    EXPECT_LT(diff_residual(lhs, rhs), 1e-12) << cc.name;
  }
}

TEST(Hamiltonians, AffineInPExceptParaboloid) {
  Rng rng(9);
  for (const auto& cc : chart_cases()) {
    if (cc.algebra.family() == Family::g424) continue;
    const Chart c = make_chart(cc.algebra, cc.sample_F(rng));
    const auto h = hamiltonian(c, random_element(rng));
    if (cc.name == "g441-paraboloid") {
      EXPECT_EQ(degree(h.full, Var::p), 2);
    } else {
      EXPECT_LE(degree(h.full, Var::p), 1) << cc.name;
      EXPECT_LT(diff_residual(h.full, h.phi * var(Var::p) + h.psi_fn), 1e-15);
    }
  }
}

TEST(Kirillov, AEqualsBIsExactlyZero) {
  Rng rng(1);
  for (const auto& cc : chart_cases()) {
    const Chart c = make_chart(cc.algebra, cc.sample_F(rng));
    const auto A = random_element(rng);
    EXPECT_EQ(verify_kirillov(c, A, A), 0.0) << cc.name;
  }
}

TEST(Kirillov, AllChartsExceptParaboloid) {
  Rng rng(2026);
  for (const auto& cc : chart_cases()) {
    if (cc.name == "g441-paraboloid") continue;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Chart c = make_chart(cc.algebra, cc.sample_F(rng));
      worst = std::max(worst, verify_kirillov(c, random_element(rng), random_element(rng)));
    }
    EXPECT_LT(worst, 1e-10) << cc.name;
  }
}

TEST(Kirillov, ParaboloidClearedFormHolds) {
  Rng rng(7);
  const auto& cc = chart_case("g441-paraboloid");
  for (int trial = 0; trial < 50; ++trial) {
    const Chart c = make_chart(cc.algebra, cc.sample_F(rng));
    EXPECT_LT(verify_kirillov_cleared(c, random_element(rng), random_element(rng)), 1e-10);
  }
}

// The p/gamma entry gives {X~, Y~} = p^2/gamma while <psi, Z> = gamma.
TEST(Kirillov, ParaboloidPOverGammaTensorDisagrees) {
  const double ga = 1.5;
  const Chart c = make_chart(Family::g441, {0.2, 0.3, ga, 0.0});
  const Expr lhs = poisson_bracket(c.psi[0], c.psi[1], c.tensor);
  EXPECT_LT(diff_residual(lhs, (1 / ga) * var(Var::p, 2)), 1e-14);
  EXPECT_GT(verify_kirillov(c, AlgebraElement::basis(kX), AlgebraElement::basis(kY)), 0.1);
}

TEST(Kirillov, FiniteDifferenceCrossCheck) {
  Rng rng(3);
  const AlgebraId id(Family::g423, {.phi = std::numbers::pi / 4});
  const Chart c = make_chart(id, {0.4, 1.1, -0.6, 0.2});
  const auto A = random_element(rng), B = random_element(rng);
  const Expr a = pairing(c, A), b = pairing(c, B), rhs = pairing(c, bracket(id, A, B));
  for (int k = 0; k < 20; ++k) {
    const double p = uniform(rng, -2, 2), q = uniform(rng, -2, 2);
    const double lhs = fd(a, Var::p, p, q) * fd(b, Var::q, p, q) -
                       fd(a, Var::q, p, q) * fd(b, Var::p, p, q);
    EXPECT_NEAR(lhs, eval(rhs, chart_point(p, q)).real(), 1e-5);
  }
}

TEST(Orbits, ParaboloidRelation) {
  const DualVector F{0.4, -0.9, 1.7, 0.2};
  const auto pts = sample_orbit(Family::g441, F);
  for (const auto& pt : pts) {
    const double x = pt.G[0], y = pt.G[1], t = pt.G[3];
    EXPECT_NEAR(x * x + y * y - 2 * F.gamma * t,
                F.alpha * F.alpha + F.beta * F.beta - 2 * F.gamma * F.delta, 1e-9);
    EXPECT_NEAR(pt.G[2], F.gamma, 1e-15);
  }
}

TEST(Orbits, HyperbolicParaboloidRelation) {
  const DualVector F{-0.4, 1.3, 0.8, -0.5};
  for (const auto& pt : sample_orbit(Family::g442, F)) {
    const double x = pt.G[0], y = pt.G[1], t = pt.G[3];
    EXPECT_NEAR(x * y - F.alpha * F.beta, F.gamma * (t - F.delta), 1e-9);
  }
}

TEST(Orbits, HalfPlaneSign) {
  for (double ga : {-1.5, 0.7}) {
    for (const auto& pt : sample_orbit(Family::g412, {0.1, 0.2, ga, 0.3}))
      EXPECT_GT(ga * pt.G[2], 0.0);
  }
}

TEST(Orbits, DefiningRelationsAllCases) {
  Rng rng(17);
  for (const auto& cc : chart_cases()) {
    if (cc.algebra.family() == Family::g424) continue;
    for (int trial = 0; trial < 5; ++trial) {
      const DualVector F = cc.sample_F(rng);
      const Chart c = make_chart(cc.algebra, F);
      for (const auto& pt : sample_orbit(c, default_grid(c, 7))) {
        EXPECT_LT(orbit_relation_residual(cc.algebra, F, pt.G), 1e-9) << cc.name;
        EXPECT_LT(pt.imag_residual, 1e-10) << cc.name;
      }
    }
  }
}

TEST(Orbits, RelationDetectsOffOrbitPoints) {
  const DualVector F{0.4, -0.9, 1.7, 0.2};
  Eigen::Vector4d G(0.4, -0.9, 1.7, 0.9);
  EXPECT_GT(orbit_relation_residual(Family::g441, F, G), 1e-3);
  EXPECT_GT(orbit_relation_residual(Family::g412, {0, 0, 1, 0}, Eigen::Vector4d(0, 0, -1, 0)), 0.5);
}

TEST(Orbits, CoadjointFlowIsTangent) {
  Rng rng(23);
  for (const auto& cc : chart_cases()) {
    if (cc.algebra.family() == Family::g424) continue;
    const Chart c = make_chart(cc.algebra, cc.sample_F(rng));
    const auto g = default_grid(c, 5);
    for (const auto& pt : sample_orbit(c, g))
      EXPECT_LT(tangent_residual(c, random_element(rng), pt.p, pt.q), 1e-8) << cc.name;
  }
}

TEST(Orbits, FlowStaysOnOrbit) {
  Rng rng(29);
  for (const auto& cc : chart_cases()) {
    const DualVector F = cc.sample_F(rng);
    for (int k = 0; k < 5; ++k) {
      const DualVector G = coadjoint_flow(cc.algebra, random_element(rng, 0.5), F, 1.0);
      EXPECT_LT(orbit_relation_residual(cc.algebra, F, G.vec()), 1e-9) << cc.name;
    }
  }
}

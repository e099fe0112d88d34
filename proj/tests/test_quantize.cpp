#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "orbitquant/cases.hpp"
#include "orbitquant/quantize.hpp"

using namespace orbitquant;

namespace {

Chart chart_for(const ChartCase& c, Rng& rng) { return make_chart(c.algebra, c.sample_F(rng), ChartOptions{}); }

Expr random_test_function(Rng& rng) {
  Expr f;
  for (int k = 0; k < 3; ++k) {
    const int m = static_cast<int>(uniform(rng, 0.0, 3.99));
    const cplx c{uniform(rng, -1, 1), uniform(rng, -1, 1)};
    f += c * var(Var::p, m) * exp_of(Var::q, cplx(0.0, uniform(rng, -1.5, 1.5)));
  }
  return f;
}

Chart paraboloid(double gamma = 5.0) {
  return make_chart(AlgebraId{Family::g441}, DualVector{0.7, -0.4, gamma, 0.3}, ChartOptions{});
}

Chart affc_chart() {
  return make_chart(AlgebraId{Family::g424}, DualVector{0.3, 0.8, -0.6, 0.2}, ChartOptions{});
}

}  // namespace

TEST(Lhat, G411ClosedForm) {
  const DualVector F{0.4, -1.1, 1.0, 0.6};
  const Chart ch = make_chart(AlgebraId{Family::g411}, F, ChartOptions{});
  const AlgebraElement A{0.3, -0.8, 1.7, 2.1};
  const auto op = std::get<DiffOp1>(lhat(ch, A));
  const Expr s = var(Var::s);
  EXPECT_LT(residual(op.phi - A.d), 1e-14);
  EXPECT_LT(residual(op.psi - kI * (A.a * s + A.b * F.beta + A.c * F.gamma)), 1e-14);
}

// With gamma != 1 the tensor entry rescales the first-order part.
TEST(Lhat, G411GeneralGamma) {
  const DualVector F{0.4, -1.1, 2.5, 0.6};
  const Chart ch = make_chart(AlgebraId{Family::g411}, F, ChartOptions{});
  const AlgebraElement A{0.3, -0.8, 1.7, 2.1};
  const auto op = std::get<DiffOp1>(lhat(ch, A));
  EXPECT_LT(residual(op.phi - F.gamma * A.d), 1e-14);
}

TEST(Lhat, TIsPureDerivative) {
  Rng rng(11);
  for (const auto* c : darboux_cases()) {
    const Chart ch = chart_for(*c, rng);
    const Hamiltonian h = hamiltonian(ch, AlgebraElement{0, 0, 0, 1});
    if (!h.phi.is_constant() || !h.psi_fn.is_zero()) continue;
    const auto op = std::get<DiffOp1>(lhat(ch, AlgebraElement{0, 0, 0, 1}));
    EXPECT_TRUE(op.psi.is_zero()) << c->name;
    EXPECT_LT(residual(op.phi - constant_lambda(ch) * h.phi), 1e-14) << c->name;
  }
}

TEST(Lhat, Linearity) {
  Rng rng(12);
  for (const auto* c : darboux_cases()) {
    const Chart ch = chart_for(*c, rng);
    const AlgebraElement A = random_element(rng), B = random_element(rng);
    const double mu = uniform(rng, -2, 2);
    AlgebraElement C;
    for (int i = 0; i < 4; ++i) C[i] = A[i] + mu * B[i];
    const auto la = std::get<DiffOp1>(lhat(ch, A)), lb = std::get<DiffOp1>(lhat(ch, B));
    const auto lc = std::get<DiffOp1>(lhat(ch, C));
    EXPECT_LT(op_residual(lc, DiffOp1{la.phi + mu * lb.phi, la.psi + mu * lb.psi, la.lambda}), 1e-12)
        << c->name;
  }
}

TEST(Lhat, AffCIdentification) {
  const Chart ch = affc_chart();
  const AlgebraElement A{0.5, -1.2, 0.7, 2.0};
  const auto op = std::get<DiffOpAffC>(lhat(ch, A));
  EXPECT_EQ(op.alpha, cplx(2.0, -0.5));
  EXPECT_EQ(op.beta, cplx(-1.2, 0.7));
}

TEST(Lhat, ParaboloidGivesTruncatedOperator) {
  const auto op = std::get<PseudoOpTrunc>(lhat(paraboloid(), AlgebraElement{1, 0, 2, 1}));
  EXPECT_EQ(op.order, kDefaultTruncation);
  // Gamma = c gamma + d delta - d (alpha^2 + beta^2) / 2 gamma
  EXPECT_NEAR(std::abs(op.gamma_const() - kI * (2 * 5.0 + 0.3 - (0.49 + 0.16) / 10.0)), 0.0, 1e-14);
}

TEST(OpCommutator, SelfCommutatorVanishes) {
  Rng rng(13);
  for (const auto* c : darboux_cases()) {
    const Chart ch = chart_for(*c, rng);
    const auto op = std::get<DiffOp1>(lhat(ch, random_element(rng)));
    EXPECT_TRUE(op_commutator(op, op).is_zero()) << c->name;
  }
  const DiffOpAffC a{cplx(1, 2), cplx(-0.5, 0.3)};
  EXPECT_EQ(op_commutator(a, a).beta, cplx{});
}

TEST(OpCommutator, HomomorphismAllFirstOrderCharts) {
  Rng rng(14);
  for (const auto* c : darboux_cases()) {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const Chart ch = chart_for(*c, rng);
      const AlgebraElement A = random_element(rng), B = random_element(rng);
      const auto lhs = op_commutator(lhat(ch, A), lhat(ch, B));
      const auto rhs = lhat(ch, bracket(ch.algebra, A, B));
      worst = std::max(worst, op_residual(std::get<DiffOp1>(lhs), std::get<DiffOp1>(rhs)));
    }
    EXPECT_LT(worst, 1e-10) << c->name;
  }
}

TEST(OpCommutator, HomomorphismAffC) {
  Rng rng(15);
  const Chart ch = affc_chart();
  for (int t = 0; t < 50; ++t) {
    const AlgebraElement A = random_element(rng), B = random_element(rng);
    const auto lhs = std::get<DiffOpAffC>(op_commutator(lhat(ch, A), lhat(ch, B)));
    const auto rhs = std::get<DiffOpAffC>(lhat(ch, bracket(ch.algebra, A, B)));
    EXPECT_LT(op_residual(lhs, rhs), 1e-10);
  }
}

// Independent check of the aff(C) commutator by acting on a test function in (u, ub).
TEST(OpCommutator, AffCActsOnFunctions) {
  const DiffOpAffC x{cplx(0.4, -1.0), cplx(0.2, 0.9)}, y{cplx(-1.3, 0.5), cplx(1.1, -0.2)};
  const Expr f = var(Var::u, 2) * exp_of(Var::ub, 0.5) + var(Var::ub);
  const Expr lhs = x.apply(y.apply(f)) - y.apply(x.apply(f));
  EXPECT_LT(residual(lhs - op_commutator(x, y).apply(f)), 1e-12);
}

TEST(OpCommutator, DiffOp1ActsOnFunctions) {
  const Expr s = var(Var::s);
  const DiffOp1 x{1.0 + 0.5 * s, kI * exp_of(Var::s, 0.3), 1.0}, y{exp_of(Var::s, -1.0), s * s, 1.0};
  const Expr f = var(Var::s, 3) + exp_of(Var::s, cplx(0, 1));
  const Expr lhs = x.apply(y.apply(f)) - y.apply(x.apply(f));
  EXPECT_LT(residual(lhs - op_commutator(x, y).apply(f)), 1e-12);
}

TEST(OpCommutator, CylinderTX) {
  Rng rng(16);
  const Chart ch = make_chart(AlgebraId{Family::g441}, DualVector{0.8, -1.3, 0.0, 0.4}, ChartOptions{});
  const AlgebraElement T{0, 0, 0, 1}, X{1, 0, 0, 0};
  // Hamiltonian of aX + bY: (a alpha + b beta) cos q + (b alpha - a beta) sin q
  for (int k = 0; k < 10; ++k) {
    const double a = uniform(rng, -2, 2), b = uniform(rng, -2, 2), q = uniform(rng, -3, 3);
    const Hamiltonian h = hamiltonian(ch, AlgebraElement{a, b, 0, 0});
    const cplx got = eval(h.psi_fn, chart_point(0.0, q));
    const double want = (a * 0.8 + b * -1.3) * std::cos(q) + (b * 0.8 - a * -1.3) * std::sin(q);
    EXPECT_NEAR(std::abs(got - want), 0.0, 1e-13);
  }
  const auto lhs = std::get<DiffOp1>(op_commutator(lhat(ch, T), lhat(ch, X)));
  const auto rhs = std::get<DiffOp1>(lhat(ch, bracket(ch.algebra, T, X)));
  EXPECT_LT(op_residual(lhs, rhs), 1e-12);
}

TEST(OpCommutator, RejectsMixedAndTruncatedKinds) {
  const Lhat a = DiffOp1{1.0, 0.0, 1.0};
  const Lhat b = DiffOpAffC{1.0, 0.0};
  EXPECT_THROW(op_commutator(a, b), OperatorError);
  const Lhat c = lhat(paraboloid(), AlgebraElement{1, 0, 0, 0});
  EXPECT_THROW(op_commutator(c, c), OperatorError);
  EXPECT_THROW(op_commutator(DiffOp1{1.0, 0.0, 1.0}, DiffOp1{1.0, 0.0, 2.0}), OperatorError);
}

TEST(LOp, ZeroAndUnit) {
  Rng rng(17);
  for (const auto* c : darboux_cases()) {
    const Chart ch = chart_for(*c, rng);
    const AlgebraElement A = random_element(rng);
    EXPECT_TRUE(l_op(ch, AlgebraElement{0, 0, 0, 0}, random_test_function(rng)).is_zero());
    EXPECT_LT(residual(l_op(ch, A, 1.0) - kI * pairing(ch, A)), 1e-14) << c->name;
  }
}

TEST(LOp, CommutatorOnRandomFunctions) {
  Rng rng(18);
  for (const auto* c : darboux_cases()) {
    const Chart ch = chart_for(*c, rng);
    const AlgebraElement A = random_element(rng), B = random_element(rng);
    const AlgebraElement AB = bracket(ch.algebra, A, B);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Expr f = random_test_function(rng);
      const Expr lhs = l_op(ch, A, l_op(ch, B, f)) - l_op(ch, B, l_op(ch, A, f));
      const Expr rhs = l_op(ch, AB, f);
      worst = std::max(worst, residual(lhs - rhs) / std::max(1.0, rhs.max_abs_coeff()));
    }
    EXPECT_LT(worst, 1e-9) << c->name;
  }
}

TEST(TermwiseRewrite, ClosedFormMatchesTermwiseRewrite) {
  Rng rng(19);
  for (const auto* c : darboux_cases()) {
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) worst = std::max(worst, series_residual(chart_for(*c, rng), random_element(rng)));
    EXPECT_LT(worst, 1e-10) << c->name;
  }
}

// p^m d_p^i conjugates to (i d_x)^m (i x)^i; check one case against direct expansion.
TEST(TermwiseRewrite, FourierRewriteOfSingleTerm) {
  DiffOperator op;
  MultiIndex o{};
  o[index(Var::p)] = 2;
  op.add(o, var(Var::p));
  const DiffOperator out = fourier_rewrite(op);
  // (i d_x)(i x)^2 = i^3 (x^2 d_x + 2x)
  MultiIndex dx{};
  dx[index(Var::x)] = 1;
  EXPECT_LT(residual(out.coefficient(dx) - (-kI) * var(Var::x, 2)), 1e-15);
  EXPECT_LT(residual(out.coefficient(MultiIndex{}) - (-2.0 * kI) * var(Var::x)), 1e-15);
}

TEST(FourierOracle, AllFirstOrderCharts) {
  Rng rng(20);
  const OracleSpec spec;
  const auto g = default_gaussian_2d(spec);
  for (const auto* c : darboux_cases()) {
    const Chart ch = chart_for(*c, rng);
    const auto r = fourier_oracle(ch, random_element(rng, 1.0), g, spec);
    EXPECT_LT(r.rel_l2, 1e-6) << c->name;
  }
}

TEST(FourierOracle, ZeroElement) {
  const OracleSpec spec;
  const Chart ch = make_chart(AlgebraId{Family::g411}, DualVector{0.1, 0.2, 1.0, 0.3}, ChartOptions{});
  const auto r = fourier_oracle(ch, AlgebraElement{0, 0, 0, 0}, default_gaussian_2d(spec), spec);
  EXPECT_EQ(r.closed_form.max_abs(), 0.0);
  EXPECT_EQ(r.conjugated.max_abs(), 0.0);
}

TEST(FourierOracle, RightAngleG423NeedsFactorI) {
  const OracleSpec spec;
  const auto g = default_gaussian_2d(spec);
  const Chart ch = make_chart(AlgebraId{Family::g423, AlgebraParams{.phi = std::numbers::pi / 2}},
                              DualVector{0.3, 0.9, -0.7, 0.4}, ChartOptions{});
  const AlgebraElement A{0.8, -0.5, 1.1, 0.6};
  EXPECT_LT(fourier_oracle(ch, A, g, spec).rel_l2, 1e-6);
  // Variant with a alpha lacking the factor i.
  const auto op = std::get<DiffOp1>(lhat(ch, A));
  const cplx c0 = op.psi.constant_term();
  DiffOp1 variant = op;
  variant.psi = op.psi - c0 + c0 / kI;
  const Field f = g.field();
  const Field conj = conjugate_numerically(ch, A, g, spec.star_order);
  EXPECT_GT(relative_l2(apply_xq(variant, f), conj), 1e-3);
}

TEST(FourierOracle, NyquistRejection) {
  OracleSpec spec;
  spec.q = Axis{8, 10.0};
  const Chart ch = make_chart(AlgebraId{Family::g423, AlgebraParams{.phi = std::numbers::pi / 2}},
                              DualVector{0.3, 0.9, -0.7, 0.4}, ChartOptions{});
  EXPECT_THROW(fourier_oracle(ch, AlgebraElement{1, 1, 1, 1}, default_gaussian_2d(spec), spec), GridError);
}

TEST(FourierOracle, ParaboloidTruncatedForm) {
  Rng rng(21);
  const OracleSpec spec;
  const auto g = default_gaussian_2d(spec);
  const Chart ch = paraboloid();
  for (int t = 0; t < 3; ++t) {
    const AlgebraElement A = random_element(rng, 1.0);
    const auto op = std::get<PseudoOpTrunc>(lhat(ch, A));
    const double gate = truncation_gate(op, g.field());
    EXPECT_LT(gate, 1e-6);
    EXPECT_LT(fourier_oracle(ch, A, g, spec).rel_l2, std::max(1e-5, 10 * gate));
  }
}

TEST(FourierOracle, ParaboloidThetaSign) {
  const OracleSpec spec;
  const auto g = default_gaussian_2d(spec);
  const Chart ch = paraboloid();
  const AlgebraElement A{0.9, -0.6, 0.2, 0.4};
  auto op = std::get<PseudoOpTrunc>(lhat(ch, A));
  const Field conj = conjugate_numerically(ch, A, g, spec.star_order);
  EXPECT_LT(relative_l2(apply_xq(op, g.field()), conj), 1e-5);
  op.theta_sign = -1.0;
  EXPECT_GT(relative_l2(apply_xq(op, g.field()), conj), 1e-3);
}

TEST(FourierOracle, AffC) {
  const Chart ch = affc_chart();
  const Field f = default_gaussian_4d(Axis{32, 8.0});
  const auto r = fourier_oracle(ch, AlgebraElement{0.6, -0.4, 0.9, 0.5}, f);
  EXPECT_LT(r.rel_l2, 1e-6);
  EXPECT_THROW(fourier_oracle(ch, AlgebraElement{1, 0, 0, 0}, default_gaussian_4d(Axis{16, 8.0})), GridError);
}

TEST(Printer, FirstOrderForm) {
  const Chart ch = make_chart(AlgebraId{Family::g411}, DualVector{1, 2, 3, 4}, ChartOptions{});
  const std::string s = to_pretty(std::get<DiffOp1>(lhat(ch, AlgebraElement{1, 1, 1, 1})));
  EXPECT_NE(s.find("*ds"), std::string::npos);
  EXPECT_NE(to_pretty(DiffOpAffC{1.0, 1.0}).find("*du"), std::string::npos);
}

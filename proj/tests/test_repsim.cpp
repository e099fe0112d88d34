#include <gtest/gtest.h>

#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "orbitquant/cases.hpp"
#include "orbitquant/repsim.hpp"

using namespace orbitquant;

namespace {

cplx gauss(double s) { return cplx(std::exp(-0.5 * s * s), 0.0); }

const SGrid kFine{-12.0, 12.0, 2048};
const SGrid kCoarse{-12.0, 12.0, 128};

double distance_to(const FlowResult& r, const std::function<cplx(double)>& want) {
  return l2_distance(r.grid, r.values, sample(r.grid, want)) / l2_norm(r.grid, sample(r.grid, gauss));
}

Chart g421_chart() {
  return make_chart(AlgebraId{Family::g421, AlgebraParams{.lambda = 0.7}}, DualVector{0.2, 0.9, -1.1, 0.4},
                    ChartOptions{});
}

}  // namespace

TEST(Evolve, TranslationByUnitTime) {
  const DiffOp1 op{1.0, 0.0, 1.0};
  const auto r = evolve(op, 1.0, gauss, kFine);
  EXPECT_LT(distance_to(r, [](double s) { return gauss(s + 1.0); }), 1e-6);
  EXPECT_NEAR(mass_report(r), 1.0, 1e-6);
}

TEST(Evolve, TranslationOfGridFunction) {
  const DiffOp1 op{1.0, 0.0, 1.0};
  const auto r = evolve(op, 1.0, gaussian(kFine), kFine);
  EXPECT_LT(distance_to(r, [](double s) { return gauss(s + 1.0); }), 1e-6);
}

TEST(Evolve, PureMultiplier) {
  const Expr s = var(Var::s);
  const Expr psi = kI * (0.5 * s * s + exp_of(Var::s, cplx(0, 1)) + exp_of(Var::s, cplx(0, -1)));
  const DiffOp1 op{0.0, psi, 1.0};
  const double u = 0.7;
  const auto r = evolve(op, u, gauss, kFine);
  EXPECT_LT(distance_to(r, [&](double x) { return std::exp(u * detail::eval_s(psi, x)) * gauss(x); }), 1e-12);
  EXPECT_NEAR(mass_report(r), 1.0, 1e-6);
}

TEST(Evolve, ZeroTimeIsIdentity) {
  const DiffOp1 op{exp_of(Var::s, 1.0), kI * var(Var::s), 1.0};
  const auto r = evolve(op, 0.0, gauss, kCoarse);
  EXPECT_EQ(r.values, sample(kCoarse, gauss));
}

TEST(Evolve, FlagsCharacteristicsLeavingTheGrid) {
  const auto shifted = evolve(DiffOp1{1.0, 0.0, 1.0}, 5.0, gauss, kCoarse);
  EXPECT_GT(shifted.escaped, 0u);
  EXPECT_EQ(shifted.diverged, 0u);
  // d sigma/d tau = e^sigma blows up in finite time.
  const auto blow = evolve(DiffOp1{exp_of(Var::s, 1.0), 0.0, 1.0}, 1.0, gauss, kCoarse);
  EXPECT_GT(blow.diverged, 0u);
  for (const auto& v : blow.values) EXPECT_TRUE(std::isfinite(v.real()) && std::isfinite(v.imag()));
}

TEST(Evolve, RejectsComplexSpeed) {
  EXPECT_THROW(evolve(DiffOp1{kI, 0.0, 1.0}, 0.5, gauss, kCoarse), OperatorError);
  EXPECT_THROW(evolve(DiffOp1{var(Var::q), 0.0, 1.0}, 0.5, gauss, kCoarse), OperatorError);
  EXPECT_THROW(evolve(DiffOp1{1.0, 0.0, 1.0}, 0.5, gauss, kCoarse, 0), OperatorError);
}

TEST(GroupLaw, ZeroTimes) {
  const Chart ch = g421_chart();
  EXPECT_EQ(group_law_check(ch, AlgebraElement{1, 2, 3, 4}, 0.0, 0.0, gauss, kCoarse).residual, 0.0);
}

TEST(GroupLaw, G421GeneratorTOnGrid) {
  const Chart ch = g421_chart();
  const auto op = std::get<DiffOp1>(lhat(ch, AlgebraElement{0, 0, 0, 1}));
  EXPECT_LT(group_law_residual(op, 0.6, -0.35, gaussian(kFine), kFine), 1e-5);
  EXPECT_LT(group_law_residual(op, 0.6, -0.35, gauss, kFine), 1e-5);
}

class GroupLawPerChart : public ::testing::TestWithParam<std::string> {};

TEST_P(GroupLawPerChart, TwentyRandomConfigurations) {
  const auto& c = chart_case(GetParam());
  Rng rng(31);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Chart ch = make_chart(c.algebra, c.sample_F(rng), ChartOptions{});
    const AlgebraElement A = random_element(rng, 1.0);
    const double u = uniform(rng, -1, 1), v = uniform(rng, -1, 1);
    const auto rep = group_law_check(ch, A, u, v, gauss, kCoarse);
    worst = std::max(worst, rep.residual);
    if (rep.excluded == 0) {
      EXPECT_DOUBLE_EQ(rep.residual, rep.zero_fill_residual);
    }
  }
  EXPECT_LT(worst, 1e-5);
}

std::vector<std::string> darboux_names() {
  std::vector<std::string> out;
  for (const auto* c : darboux_cases()) out.push_back(c->name);
  return out;
}

INSTANTIATE_TEST_SUITE_P(Charts, GroupLawPerChart, ::testing::ValuesIn(darboux_names()),
                         [](const auto& info) {
                           std::string n = info.param;
                           for (auto& ch : n)
                             if (!std::isalnum(static_cast<unsigned char>(ch))) ch = '_';
                           return n;
                         });

// Phi = a e^s + b: characteristics run off in finite time, so e^{u op} is a local flow.
TEST(GroupLaw, IncompleteFlowIsLocal) {
  const DiffOp1 op{-0.6 * exp_of(Var::s, 1.0) + 0.005, kI * exp_of(Var::s, 1.0), 1.0};
  const auto rep = group_law_report(op, -0.47, 0.47, gauss, kCoarse);
  EXPECT_LT(rep.residual, 1e-9);
  EXPECT_GT(rep.excluded, 0u);
  EXPECT_GT(rep.zero_fill_residual, 1e-3);
}

TEST(GroupLaw, CommutingFlows) {
  const Chart ch = g421_chart();
  const AlgebraElement Y{0, 1, 0, 0}, Z{0, 0, 1, 0};
  const AlgebraElement yz = bracket(ch.algebra, Y, Z);
  for (int i = 0; i < 4; ++i) ASSERT_EQ(yz[i], 0.0);
  const auto a = std::get<DiffOp1>(lhat(ch, Y)), b = std::get<DiffOp1>(lhat(ch, Z));
  EXPECT_LT(commuting_flows_residual(a, b, 0.8, -0.6, gauss, kCoarse), 1e-5);
}

TEST(Flow, StepHalvingIsFourthOrder) {
  Rng rng(32);
  for (const char* name : {"g412", "g421", "g433", "g441-cylinder", "g442-10.4"}) {
    const auto& c = chart_case(name);
    const Chart ch = make_chart(c.algebra, c.sample_F(rng), ChartOptions{});
    const auto op = std::get<DiffOp1>(lhat(ch, random_element(rng, 1.0)));
    const auto rep = step_halving(op, 1.0, gauss, kCoarse, 8);
    if (rep.changes[1] < 1e-11) continue;  // integrator exact for this coefficient
    EXPECT_GE(rep.ratio(), 8.0) << name;
  }
}

TEST(Flow, ConvergenceGateAtDefaultSteps) {
  const Chart ch = g421_chart();
  const auto op = std::get<DiffOp1>(lhat(ch, AlgebraElement{0.5, -0.4, 0.8, 1.0}));
  const auto rep = step_halving(op, 1.0, gauss, kCoarse, kDefaultFlowSteps, 2);
  EXPECT_LT(rep.changes[0], 1e-6);
}

TEST(Flow, GeneratorConsistency) {
  const Chart ch = g421_chart();
  const auto op = std::get<DiffOp1>(lhat(ch, AlgebraElement{0.5, -0.4, 0.8, 1.0}));
  const Expr f0 = var(Var::s) * exp_of(Var::s, cplx(0, 1)) + exp_of(Var::s, -0.2);
  const SGrid g{-4.0, 4.0, 256};
  const auto err = generator_errors(op, f0, g, {1e-2, 1e-3, 1e-4});
  ASSERT_EQ(err.size(), 3u);
  for (std::size_t k = 0; k + 1 < err.size(); ++k) {
    const double rate = std::log10(err[k] / err[k + 1]);
    EXPECT_GT(rate, 0.8);
    EXPECT_LT(rate, 1.2);
  }
}

TEST(Mass, ReportForG412) {
  const Chart ch = make_chart(AlgebraId{Family::g412}, DualVector{0.3, -0.2, 1.4, 0.5}, ChartOptions{});
  const auto r = evolve(std::get<DiffOp1>(lhat(ch, AlgebraElement{0, 0, 0, 1})), 0.5, gauss, kFine);
  EXPECT_TRUE(std::isfinite(mass_report(r)));
  EXPECT_GT(mass_report(r), 0.0);
}

TEST(Output, CsvAndJson) {
  const auto r = evolve(DiffOp1{1.0, 0.0, 1.0}, 0.5, gauss, SGrid{-4, 4, 16}, 10);
  const std::string csv = to_csv(r);
  EXPECT_EQ(csv.rfind("s,re,im\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 17);
  const auto j = to_json(r);
  EXPECT_EQ(j.at("steps"), 10);
  EXPECT_EQ(j.at("grid").at("n"), 16);
  EXPECT_TRUE(j.contains("mass_ratio"));
}

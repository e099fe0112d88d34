#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "orbitquant/parse.hpp"
#include "random_expr.hpp"

using namespace orbitquant;

namespace {

const Expr p = var(Var::p);
const Expr q = var(Var::q);

std::size_t error_position(const std::string& text) {
  try {
    parse_expr(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  ADD_FAILURE() << "no error for '" << text << "'";
  return std::string::npos;
}

std::vector<std::string> corpus() {
  std::vector<std::string> out{
      "p*exp((0+1i)*q)",
      "(1+0i)*q^2 + (0+0i)*p",
      "p + q + 5",
      "2*p - 3*q",
      "-p",
      "p^3*q^2 - 1.5",
      "exp(q)",
      "exp(-q) * p",
      "exp((0.5-0.25i)*q + 1)",
      "(p + exp(i*q))^2",
      "x*t + s - u",
      "z*zb + w*wb",
      "exp(w) + exp(-zb/2)",
      "p/2 + q/4",
      "1e-3*p",
      "2.5i*q",
      "(1+2i)*(3-1i)",
      "i*i",
      "((p))",
      "p*q*x*s*t",
      "q^10",
      "exp(0.5*x)*exp(-0.5*x)",
      "s^2*exp(s) - 3*s",
      "(p - q)*(p + q)",
      "3",
  };
  std::mt19937_64 rng(11);
  while (out.size() < 50) out.push_back(to_string(orbitquant::testing::random_expr(rng, 5, true)));
  return out;
}

}  // namespace

TEST(Parse, MonomialWithExponential) {
  const Expr e = parse_expr("p*exp((0+1i)*q)");
  ASSERT_EQ(e.size(), 1u);
  EXPECT_EQ(e, p * exp_of(Var::q, kI));
}

TEST(Parse, ZeroTermDropped) { EXPECT_EQ(parse_expr("(1+0i)*q^2 + (0+0i)*p"), pow(q, 2)); }

TEST(Parse, Precedence) {
  EXPECT_EQ(parse_expr("1 + 2*p^2"), 1.0 + 2.0 * pow(p, 2));
  EXPECT_EQ(parse_expr("-p^2"), -pow(p, 2));
  EXPECT_EQ(parse_expr("p - q - 1"), p - q - 1.0);
}

TEST(Parse, ComplexLiterals) {
  EXPECT_EQ(parse_expr("(2-3i)"), Expr(cplx(2, -3)));
  EXPECT_EQ(parse_expr("i*p"), kI * p);
  EXPECT_EQ(parse_expr("0.5i"), Expr(cplx(0, 0.5)));
}

TEST(Parse, ExponentialWithConstantShift) {
  const Expr e = parse_expr("exp(2*q + 1)");
  EXPECT_LT(residual(e - std::exp(1.0) * exp_of(Var::q, 2.0)), 1e-15);
}

TEST(RoundTrip, CanonicalPrintIsFixedPoint) {
  const auto texts = corpus();
  ASSERT_EQ(texts.size(), 50u);
  for (const auto& s : texts) {
    const Expr once = parse_expr(s);
    const std::string printed = to_string(once);
    EXPECT_EQ(to_string(parse_expr(printed)), printed) << s;
    EXPECT_EQ(parse_expr(printed), once) << s;
  }
}

TEST(Errors, SyntaxErrorCarriesPosition) {
  EXPECT_EQ(error_position("p + * q"), 4u);
  EXPECT_EQ(error_position("(p + q"), 6u);
  EXPECT_EQ(error_position("p q"), 2u);
  EXPECT_EQ(error_position(""), 0u);
}

TEST(Errors, UnknownVariable) {
  EXPECT_EQ(error_position("p + y"), 4u);
  EXPECT_THROW(parse_expr("sin(q)"), ParseError);
}

TEST(Errors, NonIntegerExponent) {
  EXPECT_EQ(error_position("q^1.5"), 2u);
  EXPECT_THROW(parse_expr("q^-1"), ParseError);
  EXPECT_THROW(parse_expr("q^p"), ParseError);
}

TEST(Errors, NonAffineExponent) {
  EXPECT_THROW(parse_expr("exp(q^2)"), ParseError);
  EXPECT_THROW(parse_expr("exp(p*q)"), ParseError);
}

TEST(Errors, DivisionByNonConstant) {
  EXPECT_THROW(parse_expr("p/q"), ParseError);
  EXPECT_THROW(parse_expr("p/0"), ParseError);
}

TEST(Errors, MessageNamesPosition) {
  try {
    parse_expr("p + y");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("position 4"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos);
  }
}

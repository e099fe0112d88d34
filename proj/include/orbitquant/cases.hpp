#pragma once

// Named chart cases with random generators for F, A, B.

#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "orbitquant/md4cat.hpp"
#include "orbitquant/orbits.hpp"

namespace orbitquant {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Uniform in [-hi, -lo] U [lo, hi].
inline double uniform_nonzero(Rng& rng, double lo = 0.25, double hi = 2.0) {
  const double v = uniform(rng, lo, hi);
  return std::bernoulli_distribution(0.5)(rng) ? v : -v;
}

inline AlgebraElement random_element(Rng& rng, double scale = 2.0) {
  return {uniform(rng, -scale, scale), uniform(rng, -scale, scale), uniform(rng, -scale, scale),
          uniform(rng, -scale, scale)};
}

struct ChartCase {
  std::string name;
  AlgebraId algebra;
  std::function<DualVector(Rng&)> sample_F;
  bool darboux = true;
};

/// One entry per chart case, including the local charts.
inline const std::vector<ChartCase>& chart_cases() {
  using P = AlgebraId::Params;
  constexpr double half_pi = std::numbers::pi / 2;
  static const std::vector<ChartCase> cases = [&] {
    auto any = [](Rng& r) { return uniform(r, -2.0, 2.0); };
    auto nz = [](Rng& r) { return uniform_nonzero(r); };
    std::vector<ChartCase> v;
    v.push_back({"g411", {Family::g411}, [=](Rng& r) { return DualVector{any(r), any(r), nz(r), any(r)}; }});
    v.push_back({"g412", {Family::g412}, [=](Rng& r) { return DualVector{any(r), any(r), nz(r), any(r)}; }});
    v.push_back({"g421", {Family::g421, P{.lambda = 0.7}},
                 [=](Rng& r) { return DualVector{any(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g422", {Family::g422}, [=](Rng& r) { return DualVector{any(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g423", {Family::g423, P{.phi = std::numbers::pi / 4}},
                 [=](Rng& r) { return DualVector{any(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g423-right", {Family::g423, P{.phi = half_pi}},
                 [=](Rng& r) { return DualVector{any(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g424", {Family::g424}, [=](Rng& r) { return DualVector{any(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g431", {Family::g431, P{.lambda1 = 0.5, .lambda2 = -1.3}},
                 [=](Rng& r) { return DualVector{nz(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g432", {Family::g432, P{.lambda = 0.8}},
                 [=](Rng& r) { return DualVector{nz(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g433", {Family::g433}, [=](Rng& r) { return DualVector{nz(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g434", {Family::g434, P{.lambda = 1.5, .phi = std::numbers::pi / 3}},
                 [=](Rng& r) { return DualVector{nz(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g434-right", {Family::g434, P{.lambda = 1.5, .phi = half_pi}},
                 [=](Rng& r) { return DualVector{nz(r), nz(r), nz(r), any(r)}; }});
    v.push_back({"g441-cylinder", {Family::g441},
                 [=](Rng& r) { return DualVector{nz(r), nz(r), 0.0, any(r)}; }});
    v.push_back({"g441-paraboloid", {Family::g441},
                 [=](Rng& r) { return DualVector{any(r), any(r), nz(r), any(r)}; }, false});
    v.push_back({"g442-10.1", {Family::g442}, [=](Rng& r) { return DualVector{nz(r), 0.0, 0.0, any(r)}; }});
    v.push_back({"g442-10.2", {Family::g442}, [=](Rng& r) { return DualVector{0.0, nz(r), 0.0, any(r)}; }});
    v.push_back({"g442-10.3", {Family::g442}, [=](Rng& r) { return DualVector{nz(r), nz(r), 0.0, any(r)}; }});
    v.push_back({"g442-10.4", {Family::g442}, [=](Rng& r) { return DualVector{nz(r), nz(r), nz(r), any(r)}; }});
    v[6].darboux = false;  // aff(C): two canonical pairs in (z, w)
    return v;
  }();
  return cases;
}

inline const ChartCase& chart_case(std::string_view name) {
  for (const auto& c : chart_cases())
    if (c.name == name) return c;
  throw CatalogError("unknown chart case '" + std::string(name) + "'");
}

/// Cases whose Hamiltonians are affine in p with a constant tensor entry.
inline std::vector<const ChartCase*> darboux_cases() {
  std::vector<const ChartCase*> out;
  for (const auto& c : chart_cases())
    if (c.darboux) out.push_back(&c);
  return out;
}

}  // namespace orbitquant

#pragma once

// Verification suites with anchored, deterministic JSON reports.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "orbitquant/cases.hpp"
#include "orbitquant/md4cat.hpp"
#include "orbitquant/orbits.hpp"
#include "orbitquant/quantize.hpp"
#include "orbitquant/repsim.hpp"
#include "orbitquant/starprod.hpp"

namespace orbitquant {

struct VerifyConfig {
  std::uint64_t seed = 0;
  int trials = 50;
  std::optional<double> eps_sym;  // overrides every symbolic tolerance
  std::optional<double> eps_num;  // overrides every numeric tolerance
};

struct VerifyEntry {
  std::string check;
  std::string anchor;
  int trials = 0;
  double value = 0.0;
  double bound = 0.0;
  bool at_least = false;  // value >= bound instead of value < bound
  bool pass = false;
};

struct SuiteReport {
  std::string suite;
  int index = 0;
  std::vector<VerifyEntry> entries;
  bool pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const VerifyEntry& e) { return e.pass; });
  }
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"catalog",      "orbits",    "kirillov",
                                              "termination",  "homomorphism", "ladder",
                                              "operators",    "fourier",   "flows"};
  return names;
}

namespace detail {

inline Rng trial_rng(std::uint64_t seed, int suite, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(suite), static_cast<std::uint32_t>(trial)};
  return Rng(seq);
}

/// Runs fn(trial) for every trial, concurrently when cores allow; results keep trial order.
inline std::vector<double> run_trials(int n, const std::function<double(int)>& fn, bool concurrent = true) {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  const int workers = concurrent ? std::max(1, std::min<int>(std::thread::hardware_concurrency(), 8)) : 1;
  if (workers == 1 || n < 2) {
    for (int k = 0; k < n; ++k) out[k] = fn(k);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int k = w; k < n; k += workers) out[k] = fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::isnan(x) ? INFINITY : x);
  return m;
}

inline VerifyEntry below(std::string check, std::string anchor, const std::vector<double>& values, double bound) {
  VerifyEntry e{std::move(check), std::move(anchor), static_cast<int>(values.size()), max_of(values), bound};
  e.pass = e.value < bound;
  return e;
}

inline VerifyEntry at_least(std::string check, std::string anchor, int trials, double value, double bound) {
  VerifyEntry e{std::move(check), std::move(anchor), trials, value, bound, true};
  e.pass = value >= bound;
  return e;
}

inline std::string orbit_anchor(const std::string& name) {
  static const std::vector<std::pair<std::string, std::string>> eqs{
      {"g411", "Eq. (1)"},        {"g412", "Eq. (2)"},           {"g421", "Eq. (3)"},
      {"g422", "Eq. (4)"},        {"g423", "Eq. (5)"},           {"g423-right", "Eq. (5)"},
      {"g431", "Eq. (7)"},        {"g432", "Eq. (8)"},           {"g433", "Eq. (9)"},
      {"g434", "Eq. (10)"},       {"g434-right", "Eq. (10)"},    {"g441-cylinder", "Eq. (11)"},
      {"g441-paraboloid", "Eq. (12)"}, {"g442-10.1", "Eq. (13)"}, {"g442-10.2", "Eq. (14)"},
      {"g442-10.3", "Eq. (15)"},  {"g442-10.4", "Eq. (16)"}};
  for (const auto& [n, a] : eqs)
    if (n == name) return a;
  return "Thm 2.0.3";
}

inline cplx gauss(double s) { return {std::exp(-0.5 * s * s), 0.0}; }

// Paraboloid Hamiltonian in the expanded form u = d p^2/2g + (p/2) E+ + const.
struct LadderCase {
  double a, b, c, d, alpha, beta, gamma, delta;

  Expr esign(int r) const {
    return cplx(a, -b) * exp_of(Var::q, kI) +
           (r % 2 == 0 ? 1.0 : -1.0) * cplx(a, b) * exp_of(Var::q, -kI);
  }
  Expr u() const {
    const Expr p = var(Var::p);
    return (d / (2 * gamma)) * pow(p, 2) + 0.5 * p * esign(0) + c * gamma + d * delta -
           d * (alpha * alpha + beta * beta) / (2 * gamma);
  }
};

inline Expr dpq(const Expr& v, int np, int nq) { return diff(diff(v, Var::p, np), Var::q, nq); }

// Closed forms of P^0..P^4, and the general-r formula for r >= 3.
inline Expr ladder_formula(int r, const LadderCase& P, const Expr& v) {
  const Expr p = var(Var::p);
  const double g = P.gamma;
  const Expr Ep = P.esign(0), Em = P.esign(1);
  switch (r) {
    case 0:
      return P.u() * v;
    case 1:
      return ((P.d / (g * g)) * pow(p, 2) + (1.0 / (2 * g)) * p * Ep) * dpq(v, 0, 1) -
             (kI / (2 * g)) * pow(p, 2) * Em * dpq(v, 1, 0);
    case 2:
      return (1.0 / (2 * g * g)) *
                 (kI * kI * Ep * pow(p, 3) * dpq(v, 2, 0) - 2.0 * kI * Em * pow(p, 2) * dpq(v, 1, 1)) +
             (P.d / (g * g * g)) * pow(p, 2) * dpq(v, 0, 2);
    default: {
      const double gr = std::pow(g, r);
      return (1.0 / (2 * gr)) * std::pow(-kI, r) * P.esign(r) * pow(p, r + 1) * dpq(v, r, 0) +
             (r / (2 * gr)) * std::pow(-kI, r - 1) * P.esign(r - 1) * pow(p, r) * dpq(v, r - 1, 1);
    }
  }
}

inline double rel_residual(const Expr& got, const Expr& want) {
  return residual(got - want) / std::max(1.0, residual(want));
}

class SuiteRunner {
 public:
  explicit SuiteRunner(const VerifyConfig& cfg) : cfg_(cfg) {}

  SuiteReport run(int index) const {
    SuiteReport r{suite_names().at(index), index, {}};
    switch (index) {
      case 0: catalog(r); break;
      case 1: orbits(r); break;
      case 2: kirillov(r); break;
      case 3: termination(r); break;
      case 4: homomorphism(r); break;
      case 5: ladder(r); break;
      case 6: operators(r); break;
      case 7: fourier(r); break;
      case 8: flows(r); break;
    }
    return r;
  }

 private:
  double sym(double dflt) const { return cfg_.eps_sym.value_or(dflt); }
  double num(double dflt) const { return cfg_.eps_num.value_or(dflt); }
  int scaled(int divisor) const { return std::max(1, cfg_.trials / divisor); }

  // Each (suite, case, trial) draws from its own generator.
  Rng rng(int suite, int slot, int trial) const {
    return trial_rng(cfg_.seed, suite * 1000 + slot, trial);
  }

  void catalog(SuiteReport& r) const {
    const int n = 20 * cfg_.trials;
    for (std::size_t f = 0; f < kAllFamilies.size(); ++f) {
      const AlgebraId id = [&] {
        Rng g = rng(0, static_cast<int>(f), -1);
        return AlgebraId{kAllFamilies[f], AlgebraParams{.lambda = uniform_nonzero(g, 0.2, 3.0),
                                                        .lambda1 = uniform_nonzero(g, 0.2, 3.0),
                                                        .lambda2 = uniform_nonzero(g, 0.2, 3.0),
                                                        .phi = uniform(g, 0.05, std::numbers::pi - 0.05)}};
      }();
      const auto v = run_trials(n, [&](int t) {
        Rng g = rng(0, static_cast<int>(f), t);
        const AlgebraElement A = random_element(g), B = random_element(g), C = random_element(g);
        return jacobi_defect(id, A, B, C);
      });
      r.entries.push_back(below("jacobi " + std::string(id.id()), "Thm 2.0.2", v, sym(1e-10)));
    }
  }

  void orbits(SuiteReport& r) const {
    const auto& cases = chart_cases();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& cc = cases[c];
      if (cc.algebra.family() == Family::g424) continue;
      const auto v = run_trials(scaled(25), [&](int t) {
        Rng g = rng(1, static_cast<int>(c), t);
        const DualVector F = cc.sample_F(g);
        const Chart ch = make_chart(cc.algebra, F);
        double worst = 0.0;
        for (const auto& pt : sample_orbit(ch, default_grid(ch, 64)))
          worst = std::max({worst, orbit_relation_residual(cc.algebra, F, pt.G), pt.imag_residual});
        return worst;
      });
      r.entries.push_back(below("orbit relation " + cc.name, orbit_anchor(cc.name), v, num(1e-9)));
    }
  }

  void kirillov(SuiteReport& r) const {
    const auto& cases = chart_cases();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& cc = cases[c];
      const bool par = cc.name == "g441-paraboloid";
      const auto v = run_trials(cfg_.trials, [&](int t) {
        Rng g = rng(2, static_cast<int>(c), t);
        const Chart ch = make_chart(cc.algebra, cc.sample_F(g));
        return verify_kirillov(ch, random_element(g), random_element(g));
      });
      r.entries.push_back(below("kirillov " + cc.name, par ? "Eq. (40)" : "Eq. (17)", v, sym(1e-10)));
      if (par) {
        const auto w = run_trials(cfg_.trials, [&](int t) {
          Rng g = rng(2, static_cast<int>(c), t);
          const Chart ch = make_chart(cc.algebra, cc.sample_F(g));
          return verify_kirillov_cleared(ch, random_element(g), random_element(g));
        });
        r.entries.push_back(below("kirillov " + cc.name + " (denominators cleared)", "Eqs. (39)-(40)", w, sym(1e-10)));
      }
    }
  }

  void termination(SuiteReport& r) const {
    const auto cases = darboux_cases();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& cc = *cases[c];
      const auto v = run_trials(scaled(5), [&](int t) {
        Rng g = rng(3, static_cast<int>(c), t);
        const Chart ch = make_chart(cc.algebra, cc.sample_F(g));
        const Expr u = pairing(ch, random_element(g)), w = pairing(ch, random_element(g));
        double worst = 0.0;
        for (int k = 3; k <= 8; ++k) worst = std::max(worst, residual(p_r(k, u, w, ch.tensor)));
        return worst;
      });
      r.entries.push_back(below("P^r = 0 for 3 <= r <= 8, " + cc.name, "Sec. 3.2", v, sym(1e-10)));
    }
  }

  void homomorphism(SuiteReport& r) const {
    const auto& cases = chart_cases();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& cc = cases[c];
      if (cc.name == "g441-paraboloid") continue;
      const auto v = run_trials(cfg_.trials, [&](int t) {
        Rng g = rng(4, static_cast<int>(c), t);
        const Chart ch = make_chart(cc.algebra, cc.sample_F(g));
        return verify_homomorphism(ch, random_element(g), random_element(g));
      });
      r.entries.push_back(below("star bracket " + cc.name, "Prop 3.2.1", v, sym(1e-10)));
    }
  }

  void ladder(SuiteReport& r) const {
    for (int order = 0; order <= 8; ++order) {
      const auto v = run_trials(scaled(10), [&](int t) {
        Rng g = rng(5, order, t);
        const LadderCase P{uniform(g, -1, 1), uniform(g, -1, 1),       uniform(g, -1, 1),
                           uniform(g, 0.2, 1), uniform(g, -1, 1),      uniform(g, -1, 1),
                           uniform_nonzero(g, 0.5, 2.0), uniform(g, -1, 1)};
        const PoissonTensor T = PoissonTensor::canonical((1.0 / P.gamma) * var(Var::p));
        double worst = 0.0;
        for (int m = 0; m <= 6; ++m) {
          const Expr v = var(Var::p, m) * exp_of(Var::q, cplx(uniform(g, -1, 1), uniform(g, -1, 1)));
          worst = std::max(worst, rel_residual(p_r(order, P.u(), v, T), ladder_formula(order, P, v)));
        }
        return worst;
      });
      const std::string what = order <= 4 ? "closed form P^" + std::to_string(order)
                                          : "general P^r, r = " + std::to_string(order);
      r.entries.push_back(below(what + " on p^m e^(nu q), m <= 6", "Thm 4.2.2", v, sym(1e-9)));
    }
  }

  void operators(SuiteReport& r) const {
    const auto& cases = chart_cases();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& cc = cases[c];
      if (cc.name == "g441-paraboloid") continue;
      const bool affc = cc.algebra.family() == Family::g424;
      const auto v = run_trials(cfg_.trials, [&](int t) {
        Rng g = rng(6, static_cast<int>(c), t);
        const Chart ch = make_chart(cc.algebra, cc.sample_F(g));
        const AlgebraElement A = random_element(g), B = random_element(g);
        const Lhat lhs = op_commutator(lhat(ch, A), lhat(ch, B));
        const Lhat rhs = lhat(ch, bracket(ch.algebra, A, B));
        if (affc) return op_residual(std::get<DiffOpAffC>(lhs), std::get<DiffOpAffC>(rhs));
        return op_residual(std::get<DiffOp1>(lhs), std::get<DiffOp1>(rhs));
      });
      r.entries.push_back(below("lhat commutator " + cc.name, affc ? "Eq. (41)" : "Cor 3.2.6", v, sym(1e-10)));
      if (!affc) {
        const auto w = run_trials(scaled(10), [&](int t) {
          Rng g = rng(6, 100 + static_cast<int>(c), t);
          return series_residual(make_chart(cc.algebra, cc.sample_F(g)), random_element(g));
        });
        r.entries.push_back(below("termwise rewrite " + cc.name, "Lemma 3.2.3", w, sym(1e-10)));
      }
    }
    // paraboloid: residual of the commutator applied to a Gaussian at R = 8
    const OracleSpec spec;
    const auto gauss2 = default_gaussian_2d(spec);
    const auto& pc = chart_case("g441-paraboloid");
    const auto v = run_trials(scaled(10), [&](int t) {
      Rng g = rng(6, 999, t);
      DualVector F = pc.sample_F(g);
      F.gamma = std::copysign(5.0, F.gamma);
      const Chart ch = make_chart(pc.algebra, F);
      return paraboloid_commutator_residual(ch, random_element(g, 1.0), random_element(g, 1.0),
                                            gauss2.field(), kDefaultTruncation);
    }, false);
    r.entries.push_back(below("lhat commutator g441-paraboloid on Gaussian, R = 8", "Thm 4.2.2", v, num(1e-5)));
  }

  void fourier(SuiteReport& r) const {
    const OracleSpec spec;
    const auto gauss2 = default_gaussian_2d(spec);
    const auto& cases = chart_cases();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& cc = cases[c];
      if (cc.algebra.family() == Family::g424) {
        const Field f = default_gaussian_4d(Axis{32, 8.0});
        const auto v = run_trials(1, [&](int t) {
          Rng g = rng(7, static_cast<int>(c), t);
          const Chart ch = make_chart(cc.algebra, cc.sample_F(g));
          return fourier_oracle(ch, random_element(g, 1.0), f).rel_l2;
        }, false);
        r.entries.push_back(below("fourier oracle " + cc.name + " (32^4 grid)", "Eq. (41)", v, num(1e-6)));
        continue;
      }
      const bool par = cc.name == "g441-paraboloid";
      std::vector<double> gates;
      const auto v = run_trials(scaled(25), [&](int t) {
        Rng g = rng(7, static_cast<int>(c), t);
        DualVector F = cc.sample_F(g);
        if (par) F.gamma = std::copysign(5.0, F.gamma);
        const Chart ch = make_chart(cc.algebra, F);
        const AlgebraElement A = random_element(g, 1.0);
        if (par) gates.push_back(truncation_gate(std::get<PseudoOpTrunc>(lhat(ch, A)), gauss2.field()));
        return fourier_oracle(ch, A, gauss2, spec).rel_l2;
      }, false);
      if (par) r.entries.push_back(below("truncation gate R vs R+1 " + cc.name, "Thm 4.2.2", gates, num(1e-6)));
      r.entries.push_back(below("fourier oracle " + cc.name, par ? "Thm 4.2.2" : "Thm 3.2.5", v, num(1e-6)));
    }
  }

  void flows(SuiteReport& r) const {
    const SGrid grid{-12.0, 12.0, 128};
    const auto cases = darboux_cases();
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& cc = *cases[c];
      double ratio = INFINITY;
      const int n = scaled(10);
      const auto v = run_trials(n, [&](int t) {
        Rng g = rng(8, static_cast<int>(c), t);
        const Chart ch = make_chart(cc.algebra, cc.sample_F(g));
        const AlgebraElement A = random_element(g, 1.0);
        const double u = uniform(g, -1, 1), w = uniform(g, -1, 1);
        const auto op = std::get<DiffOp1>(lhat(ch, A));
        const auto h = step_halving(op, 1.0, gauss, grid, 8);
        if (h.changes[1] >= 1e-11) ratio = std::min(ratio, h.ratio());
        return group_law_report(op, u, w, gauss, grid).residual;
      }, false);
      r.entries.push_back(below("group law " + cc.name, "Thm 3.2.5", v, num(1e-5)));
      // ratio of successive step-halving changes; 16 for a fourth-order integrator
      r.entries.push_back(at_least("step halving ratio " + cc.name, "Thm 3.2.5", n, std::isinf(ratio) ? 16.0 : ratio, 8.0));
    }
  }

  VerifyConfig cfg_;
};

}  // namespace detail

inline SuiteReport run_suite(int index, const VerifyConfig& cfg) { return detail::SuiteRunner(cfg).run(index); }

inline int suite_index(const std::string& name) {
  const auto& n = suite_names();
  const auto it = std::find(n.begin(), n.end(), name);
  return it == n.end() ? -1 : static_cast<int>(it - n.begin());
}

inline nlohmann::ordered_json to_json(const SuiteReport& s) {
  nlohmann::ordered_json j;
  j["suite"] = s.suite;
  j["index"] = s.index;
  j["pass"] = s.pass();
  auto& arr = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : s.entries) {
    arr.push_back({{"check", e.check},
                   {"anchor", e.anchor},
                   {"trials", e.trials},
                   {e.at_least ? "min_value" : "max_residual", e.value},
                   {e.at_least ? "at_least" : "tolerance", e.bound},
                   {"pass", e.pass}});
  }
  return j;
}

inline nlohmann::ordered_json verify_report(const std::vector<SuiteReport>& suites, const VerifyConfig& cfg) {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  bool pass = true;
  auto& arr = j["suites"] = nlohmann::ordered_json::array();
  for (const auto& s : suites) {
    arr.push_back(to_json(s));
    pass = pass && s.pass();
  }
  j["pass"] = pass;
  return j;
}

}  // namespace orbitquant

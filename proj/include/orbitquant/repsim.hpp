#pragma once

// One-parameter flows exp(u lhat_A) of first-order operators phi d_s + psi.
//
//   (e^{u op} f)(s) = exp( int_0^u psi(sigma(tau; s)) dtau ) f(sigma(u; s)),
//   d sigma / d tau = phi(sigma),  sigma(0; s) = s.

#include <algorithm>
#include <exception>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "orbitquant/quantize.hpp"

namespace orbitquant {

inline constexpr int kDefaultFlowSteps = 2000;

/// Uniform grid on [lo, hi] with n points (endpoints included).
struct SGrid {
  double lo = -12.0;
  double hi = 12.0;
  int n = 2048;

  double step() const { return (hi - lo) / (n - 1); }
  double node(int k) const { return lo + k * step(); }
  bool contains(double s) const { return s >= lo && s <= hi; }
};

using GridFunction = std::vector<cplx>;

inline GridFunction sample(const SGrid& g, const std::function<cplx(double)>& f) {
  GridFunction out(g.n);
  for (int k = 0; k < g.n; ++k) out[k] = f(g.node(k));
  return out;
}

inline GridFunction gaussian(const SGrid& g, double center = 0.0, double width = 1.0) {
  return sample(g, [=](double s) { return cplx(std::exp(-0.5 * (s - center) * (s - center) / (width * width)), 0.0); });
}

inline double l2_norm(const SGrid& g, const GridFunction& f) {
  double acc = 0.0;
  for (const auto& v : f) acc += std::norm(v);
  return std::sqrt(acc * g.step());
}

inline double l2_distance(const SGrid& g, const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw GridError("grid functions have different sizes");
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += std::norm(a[k] - b[k]);
  return std::sqrt(acc * g.step());
}

/// Four-point Lagrange interpolation; zero outside the grid.
inline cplx interpolate(const SGrid& g, const GridFunction& f, double s) {
  if (!g.contains(s)) return 0.0;
  const double t = (s - g.lo) / g.step();
  int k = std::clamp(static_cast<int>(std::floor(t)) - 1, 0, g.n - 4);
  const double x = t - k;
  const double w0 = -(x - 1) * (x - 2) * (x - 3) / 6, w1 = x * (x - 2) * (x - 3) / 2;
  const double w2 = -x * (x - 1) * (x - 3) / 2, w3 = x * (x - 1) * (x - 2) / 6;
  return w0 * f[k] + w1 * f[k + 1] + w2 * f[k + 2] + w3 * f[k + 3];
}

struct FlowResult {
  SGrid grid;
  GridFunction values;
  double time = 0.0;
  int steps = 0;
  std::string method = "rk4-characteristics-substepped";
  std::size_t escaped = 0;   // characteristics ending off the grid (flag)
  std::size_t diverged = 0;  // of those, the ones that ran away and were zero-filled
  double mass_ratio = 0.0;
};

namespace detail {

// Splits [0, n) into contiguous chunks; each index is written by exactly one worker.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::max(1, std::min<int>(std::thread::hardware_concurrency(), 8));
  if (workers == 1 || n < 256) {
    for (int k = 0; k < n; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const int chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, w, lo, hi] {
      try {
        for (int k = lo; k < hi; ++k) fn(k);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline cplx eval_s(const Expr& e, double s) {
  Point pt{};
  pt[index(Var::s)] = s;
  return eval(e, pt);
}

// phi, phi' and psi as sum_mu e^{mu s} poly_mu(s), sharing the exponentials.
class CompiledOp {
 public:
  struct Values {
    cplx phi, dphi, psi;
  };

  explicit CompiledOp(const DiffOp1& op) {
    add(op.phi, 0);
    add(diff(op.phi, Var::s), 1);
    add(op.psi, 2);
  }

  Values operator()(double s) const {
    Values out{};
    for (const auto& g : groups_) {
      const cplx e = g.mu == cplx{} ? cplx(1.0) : std::exp(g.mu * s);
      cplx h[3];
      for (int k = 0; k < 3; ++k)
        for (auto c = g.poly[k].rbegin(); c != g.poly[k].rend(); ++c) h[k] = h[k] * s + *c;
      out.phi += e * h[0], out.dphi += e * h[1], out.psi += e * h[2];
    }
    return out;
  }

  static double velocity(const Values& v) {
    if (std::abs(v.phi.imag()) > 1e-9 * (1.0 + std::abs(v.phi.real())))
      throw OperatorError("evolve: characteristic speed is not real");
    return v.phi.real();
  }

 private:
  struct Group {
    cplx mu;
    std::vector<cplx> poly[3];
  };

  void add(const Expr& e, int slot) {
    for (const auto& t : e.terms()) {
      for (std::size_t k = 0; k < kNumVars; ++k)
        if (k != index(Var::s) && (t.powers[k] != 0 || t.freqs[k] != cplx{}))
          throw OperatorError("evolve: coefficient depends on variables other than s");
      const cplx mu = t.freq(Var::s);
      auto it = std::find_if(groups_.begin(), groups_.end(), [&](const Group& g) { return g.mu == mu; });
      if (it == groups_.end()) it = groups_.insert(groups_.end(), Group{mu, {}});
      auto& poly = it->poly[slot];
      const auto n = static_cast<std::size_t>(t.power(Var::s));
      if (poly.size() <= n) poly.resize(n + 1);
      poly[n] += t.coeff;
    }
  }

  std::vector<Group> groups_;
};

struct Characteristic {
  double sigma;
  cplx integral;
  bool diverged;  // left every bounded window or exhausted the substep budget
};

inline constexpr double kStiffnessScale = 10.0;  // substep h * min(1, scale / |phi'|)
inline constexpr double kMaxStiffness = 0.05;   // caps |dt phi'| once h is small
inline constexpr int kMaxSubsteps = 1000000;  // per characteristic

// One RK4 step from c; v0 holds the operator values at c.sigma.
inline void rk4_step(const CompiledOp& op, double h, const CompiledOp::Values& v0, Characteristic& c) {
  const double x = c.sigma;
  const double k1 = CompiledOp::velocity(v0);
  const auto v2 = op(x + 0.5 * h * k1);
  const double k2 = CompiledOp::velocity(v2);
  const auto v3 = op(x + 0.5 * h * k2);
  const double k3 = CompiledOp::velocity(v3);
  const auto v4 = op(x + h * k3);
  const double k4 = CompiledOp::velocity(v4);
  c.sigma = x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  c.integral += h * (v0.psi + 2.0 * v2.psi + 2.0 * v3.psi + v4.psi) / 6.0;
}

// RK4 for (sigma, int psi) over time u in `steps` nominal steps, split where |phi'| is large.
// Stops once sigma is far outside [lo, hi].
inline Characteristic trace(const CompiledOp& op, double s, double u, int steps, const SGrid& g) {
  Characteristic c{s, 0.0, false};
  if (steps <= 0 || u == 0.0) return c;
  const double h = u / steps;
  const double margin = 4.0 * (g.hi - g.lo);
  const double scale = std::max(kStiffnessScale, kMaxStiffness / std::abs(h));
  int budget = kMaxSubsteps;
  for (int k = 0; k < steps; ++k) {
    double left = std::abs(h);
    while (left > 0.0) {
      const auto v0 = op(c.sigma);
      const double stiff = std::abs(v0.dphi.real());
      double dt = left;
      if (stiff > scale) {
        dt = std::min(left, std::abs(h) * scale / stiff);
        if (--budget < 0) {
          c.diverged = true;
          return c;
        }
      }
      rk4_step(op, std::copysign(dt, h), v0, c);
      left = dt < left ? left - dt : 0.0;
      if (!std::isfinite(c.sigma) || std::abs(c.sigma - 0.5 * (g.lo + g.hi)) > margin) {
        c.diverged = true;
        return c;
      }
    }
  }
  return c;
}

inline cplx flowed_value(const Characteristic& c, const std::function<cplx(double)>& f0) {
  if (c.diverged) return 0.0;
  const cplx v = std::exp(c.integral) * f0(c.sigma);
  return std::isfinite(v.real()) && std::isfinite(v.imag()) ? v : cplx{};
}

}  // namespace detail

/// exp(u op) applied to f0 (a function of s), sampled on `grid`. Diverging characteristics zero-fill.
inline FlowResult evolve(const DiffOp1& op, double u, const std::function<cplx(double)>& f0,
                         const SGrid& grid = {}, int steps = kDefaultFlowSteps) {
  if (steps <= 0) throw OperatorError("evolve: step count must be positive");
  if (grid.n < 4 || !(grid.hi > grid.lo)) throw GridError("evolve: invalid s-grid");
  FlowResult r;
  r.grid = grid;
  r.time = u;
  r.steps = steps;
  r.values.assign(grid.n, 0.0);
  std::vector<char> outside(grid.n, 0), diverged(grid.n, 0);
  const detail::CompiledOp compiled(op);
  detail::parallel_for(grid.n, [&](int k) {
    const auto c = detail::trace(compiled, grid.node(k), u, steps, grid);
    diverged[k] = c.diverged;
    outside[k] = c.diverged || !grid.contains(c.sigma);
    r.values[k] = detail::flowed_value(c, f0);
  });
  r.escaped = static_cast<std::size_t>(std::count(outside.begin(), outside.end(), 1));
  r.diverged = static_cast<std::size_t>(std::count(diverged.begin(), diverged.end(), 1));
  const double n0 = l2_norm(grid, sample(grid, f0));
  r.mass_ratio = n0 > 0.0 ? l2_norm(grid, r.values) / n0 : 0.0;
  return r;
}

/// Grid-function input, read through cubic interpolation (zero off the grid).
inline FlowResult evolve(const DiffOp1& op, double u, const GridFunction& f0, const SGrid& grid = {},
                         int steps = kDefaultFlowSteps) {
  if (static_cast<int>(f0.size()) != grid.n) throw GridError("evolve: f0 does not match the grid");
  FlowResult r = evolve(op, u, [&](double s) { return interpolate(grid, f0, s); }, grid, steps);
  const double n0 = l2_norm(grid, f0);
  r.mass_ratio = n0 > 0.0 ? l2_norm(grid, r.values) / n0 : 0.0;
  return r;
}

/// ||result|| / ||f0||.
inline double mass_report(const FlowResult& r) { return r.mass_ratio; }

/// e^{u op} f0 as a function evaluated pointwise along characteristics.
inline std::function<cplx(double)> flow_function(const DiffOp1& op, double u,
                                                 std::function<cplx(double)> f0, const SGrid& grid = {},
                                                 int steps = kDefaultFlowSteps) {
  auto compiled = std::make_shared<const detail::CompiledOp>(op);
  return [=](double s) { return detail::flowed_value(detail::trace(*compiled, s, u, steps, grid), f0); };
}

struct GroupLawReport {
  double residual = 0.0;            // over nodes where all three characteristics stay bounded
  double zero_fill_residual = 0.0;  // over all nodes, diverged values taken as 0
  std::size_t excluded = 0;         // nodes where only one side diverges
  double excluded_mass = 0.0;       // ||whole - composite|| / ||f0|| carried by those nodes
};

/// e^{(u+v) op} f0 vs e^{u op} e^{v op} f0, composing the flows pointwise.
/// Flows of incomplete vector fields are local; the comparison lives on their common domain.
inline GroupLawReport group_law_report(const DiffOp1& op, double u, double v,
                                       const std::function<cplx(double)>& f0, const SGrid& grid = {},
                                       int steps = kDefaultFlowSteps) {
  GroupLawReport rep;
  const double n0 = l2_norm(grid, sample(grid, f0));
  if (n0 == 0.0) return rep;
  const detail::CompiledOp c(op);
  std::vector<double> inside(grid.n, 0.0), excluded(grid.n, 0.0);
  std::vector<char> flag(grid.n, 0);
  detail::parallel_for(grid.n, [&](int k) {
    const double s = grid.node(k);
    const auto whole = detail::trace(c, s, u + v, steps, grid);
    auto first = detail::trace(c, s, u, steps, grid);
    auto second = first.diverged ? first : detail::trace(c, first.sigma, v, steps, grid);
    const bool composite_diverged = first.diverged || second.diverged;
    second.integral += first.integral;
    second.diverged = composite_diverged;
    const double d = std::norm(detail::flowed_value(whole, f0) - detail::flowed_value(second, f0));
    if (whole.diverged != composite_diverged) {
      excluded[k] = d;
      flag[k] = 1;
    } else {
      inside[k] = d;
    }
  });
  double a = 0.0, b = 0.0;
  for (int k = 0; k < grid.n; ++k) a += inside[k], b += excluded[k];
  rep.residual = std::sqrt(a * grid.step()) / n0;
  rep.excluded_mass = std::sqrt(b * grid.step()) / n0;
  rep.zero_fill_residual = std::sqrt((a + b) * grid.step()) / n0;
  rep.excluded = static_cast<std::size_t>(std::count(flag.begin(), flag.end(), 1));
  return rep;
}

inline double group_law_residual(const DiffOp1& op, double u, double v,
                                 const std::function<cplx(double)>& f0, const SGrid& grid = {},
                                 int steps = kDefaultFlowSteps) {
  return group_law_report(op, u, v, f0, grid, steps).residual;
}

/// Same check with the intermediate stored on the grid and read back by cubic interpolation.
inline double group_law_residual(const DiffOp1& op, double u, double v, const GridFunction& f0,
                                 const SGrid& grid = {}, int steps = kDefaultFlowSteps) {
  const double n0 = l2_norm(grid, f0);
  if (n0 == 0.0) return 0.0;
  const FlowResult whole = evolve(op, u + v, f0, grid, steps);
  const FlowResult first = evolve(op, v, f0, grid, steps);
  const FlowResult both = evolve(op, u, first.values, grid, steps);
  return l2_distance(grid, whole.values, both.values) / n0;
}

inline GroupLawReport group_law_check(const Chart& ch, const AlgebraElement& A, double u, double v,
                                      const std::function<cplx(double)>& f0, const SGrid& grid = {},
                                      int steps = kDefaultFlowSteps) {
  const Lhat l = lhat(ch, A);
  const auto* op = std::get_if<DiffOp1>(&l);
  if (!op) throw OperatorError("group_law_check: needs a first-order operator in s");
  return group_law_report(*op, u, v, f0, grid, steps);
}

/// ||e^{u A} e^{v B} f0 - e^{v B} e^{u A} f0|| / ||f0||.
inline double commuting_flows_residual(const DiffOp1& a, const DiffOp1& b, double u, double v,
                                       const std::function<cplx(double)>& f0, const SGrid& grid = {},
                                       int steps = kDefaultFlowSteps) {
  const double n0 = l2_norm(grid, sample(grid, f0));
  const auto ab = evolve(a, u, flow_function(b, v, f0, grid, steps), grid, steps);
  const auto ba = evolve(b, v, flow_function(a, u, f0, grid, steps), grid, steps);
  return n0 > 0.0 ? l2_distance(grid, ab.values, ba.values) / n0 : 0.0;
}

/// ||result(2n) - result(n)|| for n, 2n, 4n: the ratio of successive changes.
struct HalvingReport {
  std::vector<int> steps;
  std::vector<double> changes;  // changes[k] = ||r(steps[k+1]) - r(steps[k])||
  double ratio() const { return changes.size() >= 2 && changes[1] > 0 ? changes[0] / changes[1] : INFINITY; }
};

inline HalvingReport step_halving(const DiffOp1& op, double u, const std::function<cplx(double)>& f0,
                                  const SGrid& grid, int n0, int levels = 3) {
  HalvingReport rep;
  std::vector<GridFunction> results;
  for (int k = 0, n = n0; k < levels; ++k, n *= 2) {
    rep.steps.push_back(n);
    results.push_back(evolve(op, u, f0, grid, n).values);
  }
  for (std::size_t k = 0; k + 1 < results.size(); ++k)
    rep.changes.push_back(l2_distance(grid, results[k + 1], results[k]));
  return rep;
}

/// ||(e^{eps op} f0 - f0)/eps - op f0|| for each eps; f0 given symbolically in s.
inline std::vector<double> generator_errors(const DiffOp1& op, const Expr& f0, const SGrid& grid,
                                            const std::vector<double>& eps, int steps = 64) {
  const auto f0_fn = [&](double s) { return detail::eval_s(f0, s); };
  const GridFunction base = sample(grid, f0_fn);
  const GridFunction target = sample(grid, [&](double s) { return detail::eval_s(op.apply(f0), s); });
  std::vector<double> out;
  for (double e : eps) {
    const FlowResult r = evolve(op, e, f0_fn, grid, steps);
    GridFunction q(grid.n);
    for (int k = 0; k < grid.n; ++k) q[k] = (r.values[k] - base[k]) / e;
    out.push_back(l2_distance(grid, q, target));
  }
  return out;
}

inline std::string to_csv(const FlowResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "s,re,im\n";
  for (int k = 0; k < r.grid.n; ++k) os << r.grid.node(k) << ',' << r.values[k].real() << ',' << r.values[k].imag() << '\n';
  return os.str();
}

inline nlohmann::ordered_json to_json(const FlowResult& r) {
  return {{"time", r.time},          {"steps", r.steps},
          {"method", r.method},      {"grid", {{"lo", r.grid.lo}, {"hi", r.grid.hi}, {"n", r.grid.n}}},
          {"escaped", r.escaped},    {"diverged", r.diverged},
          {"mass_ratio", r.mass_ratio}};
}

}  // namespace orbitquant

#pragma once

// Adapted charts psi : (p, q) -> g* on co-adjoint orbits, Hamiltonians
// A~ o psi, and the Kirillov-form check {A~, B~} = <psi, [A, B]>.
//
// Complex-written charts are realified: a component Re(w0 e^{mu q}) is
// stored as (w0 e^{mu q} + conj(w0) e^{conj(mu) q}) / 2.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orbitquant/md4cat.hpp"
#include "orbitquant/starprod.hpp"
#include "orbitquant/termalg.hpp"

namespace orbitquant {

class ChartError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ChartKind { global, sheeted, affine_complex };

inline std::string_view kind_name(ChartKind k) {
  switch (k) {
    case ChartKind::global:
      return "global";
    case ChartKind::sheeted:
      return "sheeted";
    case ChartKind::affine_complex:
      return "affine-complex";
  }
  return "?";
}

/// Open box in the chart variables; for aff(C), q bounds apply to Im w.
struct ChartDomain {
  double p_lo = -std::numeric_limits<double>::infinity();
  double p_hi = std::numeric_limits<double>::infinity();
  double q_lo = -std::numeric_limits<double>::infinity();
  double q_hi = std::numeric_limits<double>::infinity();

  bool contains(double p, double q) const { return p > p_lo && p < p_hi && q > q_lo && q < q_hi; }
};

struct ChartOptions {
  int sheet = 0;
  int branch = 1;  // sign of p on the g441 paraboloid
};

struct Chart {
  AlgebraId algebra;
  DualVector F;
  ChartKind kind;
  int sheet = 0;
  int branch = 1;
  std::string orbit_tag;
  std::string case_label;
  std::array<Expr, 4> psi;
  PoissonTensor tensor;
  ChartDomain domain;
  Point base{};  // chart coordinates of F itself

  const Expr& lambda_pq() const { return tensor.pairs.front().entry; }
  bool is_affine_complex() const { return kind == ChartKind::affine_complex; }
  bool is_paraboloid() const { return algebra.family() == Family::g441 && F.gamma != 0.0; }
  /// Darboux chart in (p, q): single pair with constant entry.
  bool darboux() const {
    return !is_affine_complex() && tensor.pairs.size() == 1 && lambda_pq().is_constant();
  }
  bool degree_one_in_p() const { return !is_affine_complex() && !is_paraboloid(); }
};

namespace detail {

inline Expr eq(cplx mu) { return Expr::exp(Var::q, mu); }

// (Re, Im) of w0 e^{mu q}
inline std::pair<Expr, Expr> realify(cplx w0, cplx mu) {
  const Expr a = w0 * eq(mu), b = std::conj(w0) * eq(std::conj(mu));
  return {0.5 * (a + b), (1.0 / (2.0 * kI)) * (a - b)};
}

inline std::string stratum_report(const AlgebraId& id, const DualVector& F) {
  const auto d = classify_orbit(id, F);
  return std::string(id.id()) + ": F=(" + format_short(F.alpha) + "," + format_short(F.beta) +
         "," + format_short(F.gamma) + "," + format_short(F.delta) + ") lies in stratum " + d.tag +
         " (dimension " + std::to_string(d.dimension) + ")";
}

inline ChartDomain sheet_domain(int k) {
  ChartDomain d;
  d.q_lo = 2.0 * std::numbers::pi * k;
  d.q_hi = d.q_lo + 2.0 * std::numbers::pi;
  return d;
}

// Representative of an angle inside the k-th sheet.
inline double into_sheet(double angle, int k) {
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, two_pi);
  if (a <= 0) a += two_pi;
  if (a >= two_pi) a -= two_pi;
  return a + two_pi * k;
}

}  // namespace detail

/// Adapted chart through F for the given algebra.
inline Chart make_chart(const AlgebraId& id, const DualVector& F, ChartOptions opt = {}) {
  const auto desc = classify_orbit(id, F);
  if (desc.dimension == 0) throw ChartError("0-dimensional orbit: " + detail::stratum_report(id, F));
  if (opt.branch != 1 && opt.branch != -1) throw ChartError("branch must be +1 or -1");

  const double al = F.alpha, be = F.beta, ga = F.gamma, de = F.delta;
  const Expr P = var(Var::p), Q = var(Var::q);
  using detail::eq;

  Chart c{id, F, ChartKind::global, 0, 1, desc.tag, "", {}, PoissonTensor::canonical(), {}, {}};
  auto base = [&](double p, double q) {
    c.base[index(Var::p)] = p;
    c.base[index(Var::q)] = q;
  };
  auto sheeted = [&] {
    c.kind = ChartKind::sheeted;
    c.sheet = opt.sheet;
    c.domain = detail::sheet_domain(opt.sheet);
  };

  switch (id.family()) {
    case Family::g411:
      c.case_label = "1";
      c.psi = {Q, be, ga, P};
      c.tensor = PoissonTensor::canonical(ga);
      base(de, al);
      break;
    case Family::g412:
      c.case_label = "2";
      c.psi = {al, be, ga * eq(1.0), P};
      base(de, 0.0);
      break;
    case Family::g421:
      c.case_label = "3";
      c.psi = {al, be * eq(id.lambda()), ga * eq(1.0), P};
      base(de, 0.0);
      break;
    case Family::g422:
      c.case_label = "4";
      c.psi = {al, be * eq(1.0), (be * Q + ga) * eq(1.0), P};
      base(de, 0.0);
      break;
    case Family::g423: {
      const bool right = id.right_angle();
      const cplx mu = right ? kI : std::polar(1.0, id.phi());
      const auto [re, im] = detail::realify({be, ga}, mu);
      c.psi = {al, re, im, P};
      if (right) {
        c.case_label = "4.1 (g423, phi=pi/2)";
        sheeted();
        base(de, detail::into_sheet(0.0, opt.sheet));
      } else {
        c.case_label = "5";
        base(de, 0.0);
      }
      break;
    }
    case Family::g424: {
      c.kind = ChartKind::affine_complex;
      c.case_label = "aff(C)";
      c.sheet = opt.sheet;
      c.domain = detail::sheet_domain(opt.sheet);
      const Expr z = var(Var::z), zb = var(Var::zb);
      const Expr ew = Expr::exp(Var::w, 1.0), ewb = Expr::exp(Var::wb, 1.0);
      const cplx inv2i = 1.0 / (2.0 * kI);
      c.psi = {inv2i * (z - zb), 0.5 * (ew + ewb), -inv2i * (ew - ewb), 0.5 * (z + zb)};
      c.tensor = PoissonTensor{{{Var::z, Var::w, Expr(2.0)}, {Var::zb, Var::wb, Expr(2.0)}}};
      const cplx z0{de, al};
      const cplx e0{be, -ga};
      const cplx w0{std::log(std::abs(e0)), detail::into_sheet(std::arg(e0), opt.sheet)};
      c.base[index(Var::z)] = z0;
      c.base[index(Var::zb)] = std::conj(z0);
      c.base[index(Var::w)] = w0;
      c.base[index(Var::wb)] = std::conj(w0);
      break;
    }
    case Family::g431:
      c.case_label = "6";
      c.psi = {al * eq(id.lambda1()), be * eq(id.lambda2()), ga * eq(1.0), P};
      base(de, 0.0);
      break;
    case Family::g432: {
      c.case_label = "7";
      const Expr e = eq(id.lambda());
      c.psi = {al * e, (al * Q + be) * e, ga * eq(1.0), P};
      base(de, 0.0);
      break;
    }
    case Family::g433: {
      c.case_label = "8";
      const Expr e = eq(1.0);
      c.psi = {al * e, (al * Q + be) * e, (0.5 * al * Q * Q + be * Q + ga) * e, P};
      base(de, 0.0);
      break;
    }
    case Family::g434: {
      const bool right = id.right_angle();
      const cplx mu = right ? kI : std::polar(1.0, id.phi());
      const auto [re, im] = detail::realify({al, be}, mu);
      c.psi = {re, im, ga * eq(id.lambda()), P};
      if (right) {
        c.case_label = "4.1 (g434, phi=pi/2)";
        sheeted();
        base(de, detail::into_sheet(0.0, opt.sheet));
      } else {
        c.case_label = "9";
        base(de, 0.0);
      }
      break;
    }
    case Family::g441:
      sheeted();
      if (ga == 0.0) {
        c.case_label = "4.1.2.1 (cylinder)";
        const auto [re_x, im_x] = detail::realify({al, be}, kI);
        const auto [re_y, im_y] = detail::realify({be, -al}, kI);
        c.psi = {re_x, re_y, 0.0, P};
        base(de, detail::into_sheet(0.0, opt.sheet));
      } else {
        c.case_label = "4.1.2.2 (paraboloid)";
        c.branch = opt.branch;
        const cplx half = 0.5;
        const auto cosq = half * (eq(kI) + eq(-kI));
        const auto sinq = (1.0 / (2.0 * kI)) * (eq(kI) - eq(-kI));
        c.psi = {P * cosq, P * sinq, ga, (1.0 / (2.0 * ga)) * (P * P + (2.0 * ga * de - al * al - be * be))};
        c.tensor = PoissonTensor::canonical((1.0 / ga) * P);
        if (opt.branch > 0)
          c.domain.p_lo = 0.0;
        else
          c.domain.p_hi = 0.0;
        const double rho = std::hypot(al, be);
        if (rho == 0.0) {
          base(0.0, detail::into_sheet(0.0, opt.sheet));
        } else {
          const double ang = opt.branch > 0 ? std::atan2(be, al) : std::atan2(-be, -al);
          base(opt.branch * rho, detail::into_sheet(ang, opt.sheet));
        }
      }
      break;
    case Family::g442:
      if (ga != 0.0) {
        c.case_label = "10.4";
        const double sigma = al < 0.0 ? -1.0 : 1.0;
        c.psi = {sigma * eq(-1.0), sigma * (al * be + ga * P - ga * de) * eq(1.0), ga, P};
        base(de, al == 0.0 ? 0.0 : -std::log(std::abs(al)));
      } else if (al != 0.0 && be != 0.0) {
        c.case_label = "10.3";
        c.psi = {al * eq(-1.0), be * eq(1.0), 0.0, P};
        base(de, 0.0);
      } else if (al != 0.0) {
        c.case_label = "10.1";
        c.psi = {al * eq(-1.0), 0.0, 0.0, P};
        base(de, 0.0);
      } else {
        c.case_label = "10.2";
        c.psi = {0.0, be * eq(1.0), 0.0, P};
        base(de, 0.0);
      }
      break;
  }
  return c;
}

inline Chart make_chart(const AlgebraId& id, const DualVector& F, std::optional<int> sheet) {
  ChartOptions opt;
  if (sheet) opt.sheet = *sheet;
  return make_chart(id, F, opt);
}

struct Hamiltonian {
  Expr phi;     // coefficient of p
  Expr psi_fn;  // p-free part
  Expr full;
  bool affine_in_p = true;
};

/// <psi, A> as an expression in the chart variables.
inline Expr pairing(const Chart& c, const AlgebraElement& A) {
  Expr e;
  for (int i = 0; i < 4; ++i)
    if (A[i] != 0.0) e += A[i] * c.psi[i];
  return e;
}

inline Hamiltonian hamiltonian(const Chart& c, const AlgebraElement& A) {
  Hamiltonian h;
  h.full = pairing(c, A);
  h.affine_in_p = !c.is_affine_complex() && degree(h.full, Var::p) <= 1;
  if (h.affine_in_p) {
    h.phi = coefficient(h.full, Var::p, 1);
    h.psi_fn = coefficient(h.full, Var::p, 0);
  }
  return h;
}

/// Max coefficient of {A~, B~} - <psi, [A, B]>.
inline double verify_kirillov(const Chart& c, const AlgebraElement& A, const AlgebraElement& B) {
  const Expr lhs = poisson_bracket(pairing(c, A), pairing(c, B), c.tensor);
  return residual(lhs - pairing(c, bracket(c.algebra, A, B)));
}

/// Paraboloid check with denominators cleared: p <psi,[A,B]> - gamma {A~,B~}_0, Lambda_0 = 1.
inline double verify_kirillov_cleared(const Chart& c, const AlgebraElement& A,
                                      const AlgebraElement& B) {
  if (!c.is_paraboloid()) throw ChartError("cleared Kirillov check applies to the g441 paraboloid");
  const Expr bracket0 = poisson_bracket(pairing(c, A), pairing(c, B), PoissonTensor::canonical());
  const Expr rhs = var(Var::p) * pairing(c, bracket(c.algebra, A, B));
  return residual(rhs - c.F.gamma * bracket0);
}

/// Max coefficient of iA~ * iB~ - iB~ * iA~ - i <psi, [A, B]>.
inline double verify_homomorphism(const Chart& c, const AlgebraElement& A,
                                  const AlgebraElement& B) {
  if (c.is_paraboloid()) throw ChartError("star homomorphism check needs a chart affine in p");
  const Expr lhs = star_bracket(pairing(c, A), pairing(c, B), c.tensor);
  return residual(lhs - kI * pairing(c, bracket(c.algebra, A, B)));
}

/// Chart point for real (p, q); aff(C) charts use z = p0 + i p1, w = q0 + i q1.
inline Point chart_point(double p, double q) {
  Point pt{};
  pt[index(Var::p)] = p;
  pt[index(Var::q)] = q;
  return pt;
}

inline Point chart_point_affc(cplx z, cplx w) {
  Point pt{};
  pt[index(Var::z)] = z;
  pt[index(Var::zb)] = std::conj(z);
  pt[index(Var::w)] = w;
  pt[index(Var::wb)] = std::conj(w);
  return pt;
}

struct Evaluated {
  Eigen::Vector4d value;
  double imag_residual;
};

inline Evaluated evaluate_psi(const Chart& c, const Point& pt) {
  Evaluated e{Eigen::Vector4d::Zero(), 0.0};
  for (int i = 0; i < 4; ++i) {
    const cplx v = eval(c.psi[i], pt);
    e.value[i] = v.real();
    e.imag_residual = std::max(e.imag_residual, std::abs(v.imag()) / std::max(1.0, std::abs(v)));
  }
  return e;
}

struct GridSpec {
  int np = 9;
  int nq = 9;
  double p_lo = -2.0, p_hi = 2.0;
  double q_lo = -2.0, q_hi = 2.0;
};

/// Default sampling box clipped to the chart domain.
inline GridSpec default_grid(const Chart& c, int n = 9) {
  GridSpec g{n, n, -2.0, 2.0, -2.0, 2.0};
  if (c.kind == ChartKind::sheeted) {
    g.q_lo = c.domain.q_lo + 0.1;
    g.q_hi = c.domain.q_hi - 0.1;
  }
  if (c.is_paraboloid()) {
    g.p_lo = c.branch > 0 ? 0.1 : -3.0;
    g.p_hi = c.branch > 0 ? 3.0 : -0.1;
  }
  return g;
}

struct OrbitPoint {
  Eigen::Vector4d G;
  double p;
  double q;
  double imag_residual;
};

/// psi on a (p, q) grid; 2-dimensional charts only.
inline std::vector<OrbitPoint> sample_orbit(const Chart& c, const GridSpec& g) {
  if (c.is_affine_complex()) throw ChartError("sample_orbit: aff(C) orbit is 4-dimensional");
  std::vector<OrbitPoint> out;
  const auto lin = [](double lo, double hi, int n, int i) {
    return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1);
  };
  for (int i = 0; i < g.np; ++i) {
    for (int j = 0; j < g.nq; ++j) {
      const double p = lin(g.p_lo, g.p_hi, g.np, i), q = lin(g.q_lo, g.q_hi, g.nq, j);
      const auto e = evaluate_psi(c, chart_point(p, q));
      out.push_back({e.value, p, q, e.imag_residual});
    }
  }
  return out;
}

inline std::vector<OrbitPoint> sample_orbit(const AlgebraId& id, const DualVector& F,
                                            std::optional<GridSpec> g = std::nullopt) {
  const Chart c = make_chart(id, F);
  return sample_orbit(c, g ? *g : default_grid(c));
}

namespace detail {

inline double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }
inline double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// 0 if the sign condition holds, otherwise a penalty of at least 1.
inline double positive(double v) { return v > 0.0 ? 0.0 : 1.0 + std::abs(v); }

// Recovers s from value = c0 e^{k s}; returns nullopt if the signs disagree.
inline std::optional<double> log_ratio(double value, double c0, double k) {
  if (c0 == 0.0 || value / c0 <= 0.0) return std::nullopt;
  return std::log(value / c0) / k;
}

}  // namespace detail

/// How far G is from satisfying the defining relations of the orbit through F.
inline double orbit_relation_residual(const AlgebraId& id, const DualVector& F,
                                      const Eigen::Vector4d& G) {
  using detail::positive;
  using detail::rel;
  const double al = F.alpha, be = F.beta, ga = F.gamma, de = F.delta;
  const double x = G[0], y = G[1], z = G[2], t = G[3];
  (void)t;
  (void)de;
  constexpr double kFail = 1.0;
  switch (id.family()) {
    case Family::g411:
      return std::abs(y - be) + std::abs(z - ga);
    case Family::g412:
      return std::abs(x - al) + std::abs(y - be) + positive(ga * z);
    case Family::g421: {
      double r = std::abs(x - al);
      if (ga != 0.0) {
        const auto s = detail::log_ratio(z, ga, 1.0);
        if (!s) return kFail;
        return r + rel(y, be * std::exp(id.lambda() * *s));
      }
      return r + std::abs(z) + positive(y * be);
    }
    case Family::g422: {
      double r = std::abs(x - al);
      if (be != 0.0) {
        const auto s = detail::log_ratio(y, be, 1.0);
        if (!s) return kFail;
        return r + rel(z, (be * *s + ga) * std::exp(*s));
      }
      return r + std::abs(y) + positive(z * ga);
    }
    case Family::g423: {
      const cplx w0{be, ga}, w{y, z};
      const cplx rho = w / w0;
      if (std::abs(rho) == 0.0) return kFail;
      const cplx mu = std::polar(1.0, id.phi());
      double s;
      if (id.right_angle()) {
        s = std::arg(rho);
      } else {
        s = std::log(std::abs(rho)) / mu.real();
      }
      return std::abs(x - al) + rel(w, w0 * std::exp(s * mu));
    }
    case Family::g424:
      return positive(y * y + z * z);
    case Family::g431: {
      std::optional<double> s;
      if (ga != 0.0)
        s = detail::log_ratio(z, ga, 1.0);
      else if (al != 0.0)
        s = detail::log_ratio(x, al, id.lambda1());
      else
        s = detail::log_ratio(y, be, id.lambda2());
      if (!s) return kFail;
      return rel(x, al * std::exp(id.lambda1() * *s)) + rel(y, be * std::exp(id.lambda2() * *s)) +
             rel(z, ga * std::exp(*s));
    }
    case Family::g432: {
      const double l = id.lambda();
      std::optional<double> s;
      if (ga != 0.0)
        s = detail::log_ratio(z, ga, 1.0);
      else if (al != 0.0)
        s = detail::log_ratio(x, al, l);
      else
        s = detail::log_ratio(y, be, l);
      if (!s) return kFail;
      const double e = std::exp(l * *s);
      return rel(x, al * e) + rel(y, (al * *s + be) * e) + rel(z, ga * std::exp(*s));
    }
    case Family::g433: {
      std::optional<double> s;
      if (al != 0.0)
        s = detail::log_ratio(x, al, 1.0);
      else if (be != 0.0)
        s = detail::log_ratio(y, be, 1.0);
      else
        s = detail::log_ratio(z, ga, 1.0);
      if (!s) return kFail;
      const double e = std::exp(*s);
      return rel(x, al * e) + rel(y, (al * *s + be) * e) +
             rel(z, (0.5 * al * *s * *s + be * *s + ga) * e);
    }
    case Family::g434: {
      const cplx w0{al, be}, w{x, y};
      const cplx mu = std::polar(1.0, id.phi());
      std::optional<double> s;
      if (std::abs(w0) > 0.0 && !id.right_angle()) {
        if (std::abs(w) == 0.0) return kFail;
        s = std::log(std::abs(w / w0)) / mu.real();
      } else if (ga != 0.0) {
        s = detail::log_ratio(z, ga, id.lambda());
        // on the right-angle chart the angle fixes s only modulo 2 pi
        if (s && std::abs(w0) > 0.0) {
          const double two_pi = 2.0 * std::numbers::pi;
          const double ang = std::arg(w / w0);
          *s = ang + two_pi * std::round((*s - ang) / two_pi);
        }
      } else {
        s = std::arg(w / w0);
      }
      if (!s) return kFail;
      return rel(w, w0 * std::exp(*s * mu)) + rel(z, ga * std::exp(id.lambda() * *s));
    }
    case Family::g441:
      if (ga == 0.0) return std::abs(z) + rel(x * x + y * y, al * al + be * be);
      return std::abs(z - ga) +
             rel(x * x + y * y - 2.0 * ga * t, al * al + be * be - 2.0 * ga * de);
    case Family::g442:
      if (ga != 0.0) return std::abs(z - ga) + rel(x * y - al * be, ga * (t - de));
      if (al != 0.0 && be != 0.0)
        return std::abs(z) + rel(x * y, al * be) + positive(al * x) + positive(be * y);
      if (al != 0.0) return std::abs(y) + std::abs(z) + positive(al * x);
      return std::abs(x) + std::abs(z) + positive(be * y);
  }
  return kFail;
}

/// Least-squares distance from coad(A) psi(p,q) to the tangent plane span(d_p psi, d_q psi).
inline double tangent_residual(const Chart& c, const AlgebraElement& A, double p, double q) {
  if (c.is_affine_complex()) return 0.0;
  const Point pt = chart_point(p, q);
  Eigen::Matrix<double, 4, 2> J;
  for (int i = 0; i < 4; ++i) {
    J(i, 0) = eval(diff(c.psi[i], Var::p), pt).real();
    J(i, 1) = eval(diff(c.psi[i], Var::q), pt).real();
  }
  const Eigen::Vector4d G = evaluate_psi(c, pt).value;
  const Eigen::Vector4d v = coad_matrix(c.algebra, A) * G;
  const Eigen::Vector2d coef = J.colPivHouseholderQr().solve(v);
  return (v - J * coef).norm() / std::max(1.0, v.norm());
}

}  // namespace orbitquant

#pragma once

// Quantized operators: l_A = iA~ * (.) and its partial Fourier conjugate
// lhat_A = F_p o l_A o F_p^{-1}.
//
// For a Hamiltonian Phi(q) p + Psi(q) and constant tensor entry Lambda,
//
//   lhat_A = Lambda Phi(s) d_s + (Lambda/2) Phi'(s) + i Psi(s),   s = q - Lambda x / 2,
//   d_s    = (1/2) d_q - (1/Lambda) d_x   at fixed t = q + Lambda x / 2.

#include <climits>
#include <functional>
#include <numbers>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "orbitquant/orbits.hpp"
#include "orbitquant/spectral.hpp"
#include "orbitquant/starprod.hpp"
#include "orbitquant/termalg.hpp"

namespace orbitquant {

class OperatorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// f -> phi(s) d_s f + psi(s) f; `lambda` fixes the (x, q) embedding of s.
struct DiffOp1 {
  Expr phi;
  Expr psi;
  cplx lambda = 1.0;

  Expr apply(const Expr& f) const { return phi * diff(f, Var::s) + psi * f; }
  bool is_zero() const { return phi.is_zero() && psi.is_zero(); }
};

/// f -> alpha d_u f + conj(alpha) d_ubar f + (i/2)(beta e^u + conj(beta) e^ubar) f
struct DiffOpAffC {
  cplx alpha;
  cplx beta;

  Expr multiplier() const {
    return (0.5 * kI) * (beta * exp_of(Var::u, 1.0) + std::conj(beta) * exp_of(Var::ub, 1.0));
  }
  Expr apply(const Expr& f) const {
    return alpha * diff(f, Var::u) + std::conj(alpha) * diff(f, Var::ub) + multiplier() * f;
  }
};

inline constexpr int kDefaultTruncation = 8;

/// Truncated closed form on the g441 paraboloid chart, acting on f(x, q).
struct PseudoOpTrunc {
  double a = 0, b = 0, c = 0, d = 0;
  double alpha = 0, beta = 0, gamma = 1, delta = 0;
  int order = kDefaultTruncation;
  double theta_sign = 1.0;  // sign of the (i/4 gamma) d_x Theta term

  cplx gamma_const() const {
    return kI * (c * gamma + d * delta - d * (alpha * alpha + beta * beta) / (2 * gamma));
  }
};

using Lhat = std::variant<DiffOp1, DiffOpAffC, PseudoOpTrunc>;

/// Identification of a real aff(C) element aX + bY + cZ + dT with (alpha, beta).
inline std::pair<cplx, cplx> affc_coordinates(const AlgebraElement& A) {
  return {cplx{A.d, -A.a}, cplx{A.b, A.c}};
}

inline cplx constant_lambda(const Chart& ch) {
  if (!ch.lambda_pq().is_constant()) throw OperatorError("chart tensor entry is not constant");
  return ch.lambda_pq().constant_term();
}

/// First-order closed form for a chart with Hamiltonians affine in p.
inline DiffOp1 lhat_first_order(const Chart& ch, const AlgebraElement& A) {
  if (!ch.degree_one_in_p()) throw OperatorError("lhat_first_order: chart is not affine in p");
  const cplx lam = constant_lambda(ch);
  const Hamiltonian h = hamiltonian(ch, A);
  const Expr S = var(Var::s);
  const Expr Phi = subst_linear(h.phi, Var::q, S), Psi = subst_linear(h.psi_fn, Var::q, S);
  return DiffOp1{lam * Phi, (0.5 * lam) * diff(Phi, Var::s) + kI * Psi, lam};
}

inline Lhat lhat(const Chart& ch, const AlgebraElement& A, int order = kDefaultTruncation) {
  if (ch.is_affine_complex()) {
    const auto [al, be] = affc_coordinates(A);
    return DiffOpAffC{al, be};
  }
  if (ch.is_paraboloid()) {
    PseudoOpTrunc op;
    op.a = A.a, op.b = A.b, op.c = A.c, op.d = A.d;
    op.alpha = ch.F.alpha, op.beta = ch.F.beta, op.gamma = ch.F.gamma, op.delta = ch.F.delta;
    op.order = order;
    return op;
  }
  return lhat_first_order(ch, A);
}

/// l_A(f) = iA~ * f.
inline StarResult l_op_detailed(const Chart& ch, const AlgebraElement& A, const Expr& f,
                                int r_max = kDefaultStarOrder) {
  return star_detailed(kI * pairing(ch, A), f, ch.tensor, r_max);
}

inline Expr l_op(const Chart& ch, const AlgebraElement& A, const Expr& f,
                 int r_max = kDefaultStarOrder) {
  return l_op_detailed(ch, A, f, r_max).value;
}

/// [op1, op2] for first-order operators in s.
inline DiffOp1 op_commutator(const DiffOp1& x, const DiffOp1& y) {
  if (x.lambda != y.lambda) throw OperatorError("op_commutator: operators live on different charts");
  const Expr phi = x.phi * diff(y.phi, Var::s) - y.phi * diff(x.phi, Var::s);
  const Expr psi = x.phi * diff(y.psi, Var::s) - y.phi * diff(x.psi, Var::s);
  return DiffOp1{phi, psi, x.lambda};
}

inline DiffOpAffC op_commutator(const DiffOpAffC& x, const DiffOpAffC& y) {
  return DiffOpAffC{0.0, x.alpha * y.beta - y.alpha * x.beta};
}

inline Lhat op_commutator(const Lhat& x, const Lhat& y) {
  if (x.index() != y.index()) throw OperatorError("op_commutator: mixed operator kinds");
  if (const auto* p = std::get_if<DiffOp1>(&x)) return op_commutator(*p, std::get<DiffOp1>(y));
  if (const auto* p = std::get_if<DiffOpAffC>(&x)) return op_commutator(*p, std::get<DiffOpAffC>(y));
  throw OperatorError("op_commutator: truncated operators have no symbolic commutator");
}

/// Max coefficient residual between two first-order operators.
inline double op_residual(const DiffOp1& x, const DiffOp1& y) {
  return std::max(residual(x.phi - y.phi), residual(x.psi - y.psi));
}

inline double op_residual(const DiffOpAffC& x, const DiffOpAffC& y) {
  return std::max(std::abs(x.alpha - y.alpha), std::abs(x.beta - y.beta));
}

inline std::string to_pretty(const DiffOp1& op) {
  return "(" + to_pretty(op.phi) + ")*ds + (" + to_pretty(op.psi) + ")";
}

inline std::string to_pretty(const DiffOpAffC& op) {
  return "(" + detail::format_complex(op.alpha) + ")*du + (" + detail::format_complex(std::conj(op.alpha)) +
         ")*dub + (" + to_pretty(op.multiplier()) + ")";
}

inline std::string to_pretty(const PseudoOpTrunc& op) {
  return "paraboloid operator: Gamma-term " + detail::format_complex(op.gamma_const()) +
         ", truncation order " + std::to_string(op.order);
}

// ---------------------------------------------------------------------------
// Symbolic Fourier rewrite in (x, q).

/// DiffOp1 written in (x, q): phi(s)(d_q/2 - d_x/Lambda) + psi(s), s = q - Lambda x/2.
inline DiffOperator to_xq(const DiffOp1& op) {
  const Expr s_image = var(Var::q) - (0.5 * op.lambda) * var(Var::x);
  const Expr phi = subst_linear(op.phi, Var::s, s_image);
  const Expr psi = subst_linear(op.psi, Var::s, s_image);
  DiffOperator out;
  MultiIndex dq{}, dx{};
  dq[index(Var::q)] = 1;
  dx[index(Var::x)] = 1;
  out.add(dq, 0.5 * phi);
  out.add(dx, (-1.0 / op.lambda) * phi);
  out.add(MultiIndex{}, psi);
  return out;
}

/// Conjugates a (p, q) operator by F_p term by term: p -> i d_x, d_p -> i x.
inline DiffOperator fourier_rewrite(const DiffOperator& op) {
  DiffOperator out;
  for (const auto& [order, coeff] : op.terms()) {
    for (std::size_t k = 0; k < kNumVars; ++k)
      if (order[k] != 0 && k != index(Var::p) && k != index(Var::q))
        throw OperatorError("fourier_rewrite: derivative outside (p, q)");
    const int ip = order[index(Var::p)], jq = order[index(Var::q)];
    const int mmax = degree(coeff, Var::p);
    if (mmax == INT_MAX) throw OperatorError("fourier_rewrite: coefficient not polynomial in p");
    for (int m = 0; m <= mmax; ++m) {
      const Expr g = coefficient(coeff, Var::p, m);
      if (g.is_zero()) continue;
      // (i d_x)^m (i x)^i = sum_k C(m,k) i^{m+i} i!/(i-k)! x^{i-k} d_x^{m-k}
      double binom = 1.0;
      for (int k = 0; k <= std::min(m, ip); ++k) {
        if (k > 0) binom *= static_cast<double>(m - k + 1) / k;
        double falling = 1.0;
        for (int t = 0; t < k; ++t) falling *= ip - t;
        const cplx c = binom * falling * std::pow(kI, m + ip);
        MultiIndex o{};
        o[index(Var::x)] = m - k;
        o[index(Var::q)] = jq;
        out.add(o, c * (g * var(Var::x, ip - k)));
      }
    }
  }
  return out;
}

/// Termwise rewrite: F_p o (iA~ *) o F_p^{-1} from the star series through order R.
inline DiffOperator series_operator(const Chart& ch, const AlgebraElement& A,
                                   int order = kDefaultTruncation) {
  return fourier_rewrite(left_star_operator(kI * pairing(ch, A), ch.tensor, order));
}

/// Coefficient residual of closed form vs termwise rewrite after Taylor truncation in x to order R-1.
inline double series_residual(const Chart& ch, const AlgebraElement& A,
                             int order = kDefaultTruncation) {
  const DiffOperator closed = to_xq(lhat_first_order(ch, A));
  const DiffOperator series = series_operator(ch, A, order);
  double worst = 0.0;
  auto check = [&](const MultiIndex& o) {
    const Expr a = taylor_truncate(closed.coefficient(o), Var::x, order - 1);
    const Expr b = taylor_truncate(series.coefficient(o), Var::x, order - 1);
    worst = std::max(worst, residual(a - b));
  };
  for (const auto& [o, c] : closed.terms()) check(o);
  for (const auto& [o, c] : series.terms()) check(o);
  return worst;
}

// ---------------------------------------------------------------------------
// Grid application. Two-variable fields use axis 0 = x and axis 1 = q;
// aff(C) fields use axes (xi1, xi2, w1, w2).

namespace detail {

inline Field evaluate_on(const Expr& e, const Field& shape,
                         const std::function<Point(std::size_t)>& point_at) {
  Field out(shape.axes());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval(e, point_at(i));
  return out;
}

inline Point xq_point(const Field& f, std::size_t i) {
  Point pt{};
  pt[index(Var::x)] = f.axis(0).node(f.coordinate_index(i, 0));
  pt[index(Var::q)] = f.axis(1).node(f.coordinate_index(i, 1));
  return pt;
}

}  // namespace detail

/// Applies a first-order closed form to f(x, q).
inline Field apply_xq(const DiffOp1& op, const Field& f) {
  if (f.rank() != 2) throw GridError("apply_xq: expected a 2-dimensional field");
  const Expr s_image = var(Var::q) - (0.5 * op.lambda) * var(Var::x);
  auto at = [&](std::size_t i) { return detail::xq_point(f, i); };
  const Field phi = detail::evaluate_on(subst_linear(op.phi, Var::s, s_image), f, at);
  const Field psi = detail::evaluate_on(subst_linear(op.psi, Var::s, s_image), f, at);
  const Field ds = 0.5 * derivative(f, 1) - (1.0 / op.lambda) * derivative(f, 0);
  return phi * ds + psi * f;
}

namespace detail {

// sum_{r=0}^{R} (1/r!) d_x^r ((sign x / 2 gamma)^r g)
inline Field delta_series(const Field& g, double sign, double gamma, int R) {
  Field sum(g.axes());
  Field power = g;  // (sign x/2gamma)^r g
  double fact = 1.0;
  for (int r = 0; r <= R; ++r) {
    if (r > 0) {
      power = multiply_along(power, 0, [&](double x) { return cplx(sign * x / (2 * gamma), 0.0); });
      fact *= r;
    }
    sum += (1.0 / fact) * derivative(power, 0, r);
  }
  return sum;
}

}  // namespace detail

/// Applies the truncated paraboloid closed form to f(x, q).
inline Field apply_xq(const PseudoOpTrunc& op, const Field& f, std::optional<int> order = {}) {
  if (f.rank() != 2) throw GridError("apply_xq: expected a 2-dimensional field");
  const int R = order ? *order : op.order;
  const double g = op.gamma;
  const cplx am{op.a, -op.b}, ap{op.a, op.b};
  auto Q = [&](const Field& h) {
    const Field hx = derivative(h, 0);
    return kI * hx + (1.0 / (2 * g)) * derivative(hx, 1);
  };
  Field out = op.gamma_const() * f;
  out += (kI * (op.d / (2 * g))) * Q(Q(f));
  const auto eiq = [](double q) { return std::exp(cplx(0, q)); };
  const auto emiq = [](double q) { return std::exp(cplx(0, -q)); };
  Field dterm = am * multiply_along(detail::delta_series(f, 1.0, g, R), 1, eiq) +
                ap * multiply_along(detail::delta_series(f, -1.0, g, R), 1, emiq);
  out -= 0.5 * derivative(dterm, 0);
  const Field fq = derivative(f, 1);
  Field tterm = am * multiply_along(detail::delta_series(fq, 1.0, g, R - 1), 1, eiq) +
                ap * multiply_along(detail::delta_series(fq, -1.0, g, R - 1), 1, emiq);
  out += (op.theta_sign * kI / (4 * g)) * derivative(tterm, 0);
  return out;
}

namespace detail {

// Spectral multiplier along several axes: FFT, multiply by m(kappa), inverse.
inline Field spectral_multiplier(Field f, const std::vector<std::size_t>& axes,
                                 const std::vector<double>& spacing,
                                 const std::function<cplx(const std::vector<double>&)>& m) {
  for (auto a : axes) dft_along(f, a, FFTW_FORWARD);
  std::vector<double> kappa(axes.size());
  double norm = 1.0;
  for (auto a : axes) norm *= f.axis(a).n;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < axes.size(); ++j) {
      const int n = f.axis(axes[j]).n;
      const int mm = f.coordinate_index(i, axes[j]);
      const int k = mm < n / 2 ? mm : mm - n;
      kappa[j] = (mm == n / 2) ? 0.0 : 2.0 * std::numbers::pi * k / (n * spacing[j]);
    }
    f[i] *= m(kappa) / norm;
  }
  for (auto a : axes) dft_along(f, a, FFTW_BACKWARD);
  return f;
}

// Wirtinger derivatives d_z^a d_zb^b d_w^c d_wb^d on a 4-field; axes 0,1 carry z (dual or primal).
inline Field wirtinger(const Field& f, int a, int b, int c, int d, bool z_dual) {
  if (a + b + c + d == 0) return f;
  const double hz0 = z_dual ? f.axis(0).dual_step() : f.axis(0).step();
  const double hz1 = z_dual ? f.axis(1).dual_step() : f.axis(1).step();
  return spectral_multiplier(
      f, {0, 1, 2, 3}, {hz0, hz1, f.axis(2).step(), f.axis(3).step()},
      [&](const std::vector<double>& k) {
        const cplx dz = 0.5 * cplx(k[1], k[0]), dzb = 0.5 * cplx(-k[1], k[0]);
        const cplx dw = 0.5 * cplx(k[3], k[2]), dwb = 0.5 * cplx(-k[3], k[2]);
        return std::pow(dz, a) * std::pow(dzb, b) * std::pow(dw, c) * std::pow(dwb, d);
      });
}

inline Point affc_point(const Field& f, std::size_t i, bool z_dual) {
  const auto node = [&](std::size_t k) {
    const int j = f.coordinate_index(i, k);
    return z_dual && k < 2 ? f.axis(k).dual_node(j) : f.axis(k).node(j);
  };
  const cplx z{node(0), node(1)}, w{node(2), node(3)};
  return chart_point_affc(z, w);
}

}  // namespace detail

/// Applies the aff(C) closed form to f(xi1, xi2, w1, w2).
inline Field apply_affc(const DiffOpAffC& op, const Field& f) {
  if (f.rank() != 4) throw GridError("apply_affc: expected a 4-dimensional field");
  // alpha (d_w/2 - d_xibar) + conj(alpha) (d_wb/2 - d_xi); xi sits on axes 0,1
  const Field dw = detail::wirtinger(f, 0, 0, 1, 0, false), dwb = detail::wirtinger(f, 0, 0, 0, 1, false);
  const Field dxi = detail::wirtinger(f, 1, 0, 0, 0, false), dxib = detail::wirtinger(f, 0, 1, 0, 0, false);
  Field out = op.alpha * (0.5 * dw - dxib) + std::conj(op.alpha) * (0.5 * dwb - dxi);
  Field mult(f.axes());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Point pt = detail::affc_point(f, i, false);
    const cplx xi = pt[index(Var::z)], w = pt[index(Var::w)];
    mult[i] = 0.5 * kI *
              (op.beta * std::exp(w - 0.5 * std::conj(xi)) +
               std::conj(op.beta) * std::exp(std::conj(w) - 0.5 * xi));
  }
  return out + mult * f;
}

// ---------------------------------------------------------------------------
// Numeric conjugation oracle.

struct OracleSpec {
  Axis x{256, 10.0};
  Axis q{256, 10.0};
  int star_order = kMaxStarOrder;
  int truncation = kDefaultTruncation;
};

struct OracleResult {
  Field closed_form;
  Field conjugated;
  double rel_l2 = 0.0;
  double max_abs = 0.0;
};

/// Test function e^{-x^2/2} h(q) with exact p-derivatives of its inverse transform:
/// d_p^k (e^{-p^2/2} h) = (-1)^k He_k(p) e^{-p^2/2} h.
struct SeparableGaussian {
  std::vector<Axis> axes;
  std::function<cplx(double)> profile;

  Field field() const {
    return Field::sample(axes, [&](const std::vector<double>& v) {
      return std::exp(-0.5 * v[0] * v[0]) * profile(v[1]);
    });
  }

  /// d_p^k v on (dual p, primal q) nodes.
  Field dual_derivative(int k) const {
    Field out(axes);
    const Axis& ap = axes[0];
    std::vector<double> col(ap.n);
    for (int j = 0; j < ap.n; ++j) {
      const double p = ap.dual_node(j);
      double h0 = std::exp(-0.5 * p * p), h1 = p * h0;
      double hk = k == 0 ? h0 : h1;
      for (int m = 1; m < k; ++m) {
        const double h2 = p * h1 - m * h0;
        h0 = h1, h1 = h2, hk = h2;
      }
      col[j] = (k % 2 == 0 ? 1.0 : -1.0) * hk;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = col[out.coordinate_index(i, 0)] * profile(axes[1].node(out.coordinate_index(i, 1)));
    return out;
  }
};

inline SeparableGaussian default_gaussian_2d(const OracleSpec& g) {
  return {{g.x, g.q}, [](double q) { return cplx(std::exp(-0.5 * (q - 0.3) * (q - 0.3)), 0.0); }};
}

inline Field default_gaussian_4d(const Axis& a) {
  return Field::sample({a, a, a, a}, [](const std::vector<double>& v) {
    const double r = v[0] * v[0] + v[1] * v[1] + (v[2] - 0.2) * (v[2] - 0.2) + v[3] * v[3];
    return cplx(std::exp(-0.5 * r), 0.0);
  });
}

namespace detail {

// Rejects charts whose oscillating factors e^{i w q} are not resolved by the grid.
// Complex variables oscillate along their imaginary axis at rate |mu|.
inline void nyquist_check(const Expr& e, Var v, const Axis& a, bool complex_var = false) {
  for (const auto& t : e.terms()) {
    const double w = complex_var ? std::abs(t.freq(v)) : std::abs(t.freq(v).imag());
    if (w > 0.25 * a.nyquist())
      throw GridError("grid too coarse for frequency " + format_short(w) + " in " +
                      std::string(var_name(v)));
  }
}

}  // namespace detail

/// F_p o (iA~ *) o F_p^{-1} applied to f on the (x, q) grid.
inline Field conjugate_numerically(const Chart& ch, const AlgebraElement& A,
                                   const SeparableGaussian& g, int star_order) {
  const Expr u = kI * pairing(ch, A);
  const DiffOperator op = left_star_operator(u, ch.tensor, star_order);
  const Field f = g.field();
  std::map<int, Field> dp;
  Field acc(f.axes());
  for (const auto& [order, coeff] : op.terms()) {
    const int ip = order[index(Var::p)], jq = order[index(Var::q)];
    if (!dp.count(ip)) dp.emplace(ip, g.dual_derivative(ip));
    Field d = derivative(dp.at(ip), 1, jq);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      Point pt{};
      pt[index(Var::p)] = f.axis(0).dual_node(f.coordinate_index(i, 0));
      pt[index(Var::q)] = f.axis(1).node(f.coordinate_index(i, 1));
      acc[i] += eval(coeff, pt) * d[i];
    }
  }
  return partial_fourier(acc, 0);
}

/// aff(C): 2-d transform in z = p1 + i p2, star in (z, w) with two pairs.
inline Field conjugate_numerically_affc(const Chart& ch, const AlgebraElement& A, const Field& f,
                                        int star_order) {
  const Expr u = kI * pairing(ch, A);
  const DiffOperator op = left_star_operator(u, ch.tensor, star_order);
  const Field v = inverse_partial_fourier(inverse_partial_fourier(f, 0), 1);
  Field acc(f.axes());
  for (const auto& [order, coeff] : op.terms()) {
    const Field d = detail::wirtinger(v, order[index(Var::z)], order[index(Var::zb)],
                                      order[index(Var::w)], order[index(Var::wb)], true);
    for (std::size_t i = 0; i < acc.size(); ++i)
      acc[i] += eval(coeff, detail::affc_point(f, i, true)) * d[i];
  }
  return partial_fourier(partial_fourier(acc, 0), 1);
}

/// Closed-form lhat vs numerically conjugated star multiplication on an (x, q) grid.
inline OracleResult fourier_oracle(const Chart& ch, const AlgebraElement& A,
                                   const SeparableGaussian& g, const OracleSpec& spec = {}) {
  if (ch.is_affine_complex()) throw GridError("fourier_oracle: aff(C) needs a 4-dimensional field");
  if (g.axes.size() != 2) throw GridError("fourier_oracle: expected an (x, q) grid");
  for (const auto& c : ch.psi) detail::nyquist_check(c, Var::q, g.axes[1]);
  const Field f = g.field();
  OracleResult res;
  const Lhat op = lhat(ch, A, spec.truncation);
  if (const auto* p = std::get_if<DiffOp1>(&op))
    res.closed_form = apply_xq(*p, f);
  else
    res.closed_form = apply_xq(std::get<PseudoOpTrunc>(op), f);
  res.conjugated = conjugate_numerically(ch, A, g, spec.star_order);
  res.rel_l2 = relative_l2(res.closed_form, res.conjugated);
  res.max_abs = (res.closed_form - res.conjugated).max_abs();
  return res;
}

/// aff(C) variant on a (xi1, xi2, w1, w2) grid.
inline OracleResult fourier_oracle(const Chart& ch, const AlgebraElement& A, const Field& f,
                                   int star_order = 20) {
  if (!ch.is_affine_complex() || f.rank() != 4)
    throw GridError("fourier_oracle: 4-dimensional fields are for the aff(C) chart");
  for (const auto& c : ch.psi) detail::nyquist_check(c, Var::w, f.axis(3), true);
  OracleResult res;
  res.closed_form = apply_affc(std::get<DiffOpAffC>(lhat(ch, A)), f);
  res.conjugated = conjugate_numerically_affc(ch, A, f, star_order);
  res.rel_l2 = relative_l2(res.closed_form, res.conjugated);
  res.max_abs = (res.closed_form - res.conjugated).max_abs();
  return res;
}

/// Relative change of the truncated paraboloid operator from order R to R+1.
inline double truncation_gate(const PseudoOpTrunc& op, const Field& f) {
  return relative_l2(apply_xq(op, f, op.order + 1), apply_xq(op, f, op.order));
}

/// ||lhat_A lhat_B f - lhat_B lhat_A f - lhat_[A,B] f|| / ||f|| for the paraboloid chart.
inline double paraboloid_commutator_residual(const Chart& ch, const AlgebraElement& A,
                                             const AlgebraElement& B, const Field& f,
                                             int order = kDefaultTruncation) {
  const auto la = std::get<PseudoOpTrunc>(lhat(ch, A, order));
  const auto lb = std::get<PseudoOpTrunc>(lhat(ch, B, order));
  const auto lab = std::get<PseudoOpTrunc>(lhat(ch, bracket(ch.algebra, A, B), order));
  const Field lhs = apply_xq(la, apply_xq(lb, f)) - apply_xq(lb, apply_xq(la, f));
  return (lhs - apply_xq(lab, f)).norm() / f.norm();
}

}  // namespace orbitquant

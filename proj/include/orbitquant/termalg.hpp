#pragma once

// Canonical polynomial-exponential expressions over a fixed variable set.
//
// Every expression is a finite sum  sum_k c_k * prod_v v^{n_kv} * exp(mu_kv * v)
// with complex coefficients c_k and complex frequencies mu_kv. The set is
// closed under addition, multiplication, partial differentiation and affine
// substitution, which is all the symbolic machinery the quantization needs.

#include <algorithm>
#include <array>
#include <climits>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace orbitquant {

using cplx = std::complex<double>;

inline constexpr cplx kI{0.0, 1.0};

enum class Var : std::uint8_t { p, q, x, s, t, u, ub, z, zb, w, wb };

inline constexpr std::size_t kNumVars = 11;

inline constexpr std::array<std::string_view, kNumVars> kVarNames{
    "p", "q", "x", "s", "t", "u", "ub", "z", "zb", "w", "wb"};

constexpr std::size_t index(Var v) { return static_cast<std::size_t>(v); }

inline std::string_view var_name(Var v) { return kVarNames[index(v)]; }

inline std::optional<Var> var_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumVars; ++i)
    if (kVarNames[i] == name) return static_cast<Var>(i);
  return std::nullopt;
}

/// Relative threshold below which monomials are dropped during canonicalization.
inline constexpr double kEpsZero = 1e-12;

using Point = std::array<cplx, kNumVars>;

class AlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Frequencies are snapped to a 2^-40 lattice: sums computed in
// different association orders land on the same key.
inline double snap(double v) {
  constexpr double scale = 1099511627776.0;  // 2^40
  if (std::abs(v) >= 1e6) return v;
  const double r = std::round(v * scale) / scale;
  return r == 0.0 ? 0.0 : r;
}

inline cplx snap(cplx c) { return {snap(c.real()), snap(c.imag())}; }

}  // namespace detail

struct Monomial {
  cplx coeff{0.0, 0.0};
  std::array<int, kNumVars> powers{};
  std::array<cplx, kNumVars> freqs{};

  int power(Var v) const { return powers[index(v)]; }
  cplx freq(Var v) const { return freqs[index(v)]; }
  int total_degree() const {
    int d = 0;
    for (int n : powers) d += n;
    return d;
  }
  bool has_freqs() const {
    return std::any_of(freqs.begin(), freqs.end(),
                       [](cplx f) { return f != cplx{}; });
  }
};

/// Three-way key comparison: powers lexicographically, then frequencies by (re, im).
inline int compare_keys(const Monomial& a, const Monomial& b) {
  for (std::size_t i = 0; i < kNumVars; ++i) {
    if (a.powers[i] != b.powers[i]) return a.powers[i] < b.powers[i] ? -1 : 1;
  }
  for (std::size_t i = 0; i < kNumVars; ++i) {
    const cplx fa = a.freqs[i], fb = b.freqs[i];
    if (fa.real() != fb.real()) return fa.real() < fb.real() ? -1 : 1;
    if (fa.imag() != fb.imag()) return fa.imag() < fb.imag() ? -1 : 1;
  }
  return 0;
}

class Expr {
 public:
  Expr() = default;
  Expr(cplx c) {  // NOLINT(google-explicit-constructor)
    if (c != cplx{}) {
      Monomial m;
      m.coeff = c;
      terms_.push_back(m);
    }
  }
  Expr(double c) : Expr(cplx{c, 0.0}) {}  // NOLINT(google-explicit-constructor)

  static Expr var(Var v, int power = 1) {
    if (power < 0) throw AlgebraError("negative powers are not supported");
    Monomial m;
    m.coeff = 1.0;
    m.powers[index(v)] = power;
    return from_terms({m});
  }

  /// exp(mu * v)
  static Expr exp(Var v, cplx mu) {
    Monomial m;
    m.coeff = 1.0;
    m.freqs[index(v)] = mu;
    return from_terms({m});
  }

  static Expr from_terms(std::vector<Monomial> terms, double eps = kEpsZero) {
    Expr e;
    e.terms_ = std::move(terms);
    e.canonicalize(eps);
    return e;
  }

  const std::vector<Monomial>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& t : terms_) m = std::max(m, std::abs(t.coeff));
    return m;
  }

  /// Constant term (the monomial with no powers and no frequencies).
  cplx constant_term() const {
    for (const auto& t : terms_)
      if (t.total_degree() == 0 && !t.has_freqs()) return t.coeff;
    return {};
  }

  bool is_constant() const {
    return terms_.empty() ||
           (terms_.size() == 1 && terms_[0].total_degree() == 0 && !terms_[0].has_freqs());
  }

  bool depends_on(Var v) const {
    return std::any_of(terms_.begin(), terms_.end(), [v](const Monomial& t) {
      return t.power(v) != 0 || t.freq(v) != cplx{};
    });
  }

  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

  friend Expr operator+(const Expr& a, const Expr& b) {
    std::vector<Monomial> t;
    t.reserve(a.size() + b.size());
    t.insert(t.end(), a.terms_.begin(), a.terms_.end());
    t.insert(t.end(), b.terms_.begin(), b.terms_.end());
    return from_terms(std::move(t));
  }

  friend Expr operator-(const Expr& a) {
    Expr r = a;
    for (auto& t : r.terms_) t.coeff = -t.coeff;
    return r;
  }

  friend Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

  friend Expr operator*(const Expr& lhs, const Expr& rhs) {
    // fixed operand order makes the product bitwise commutative
    const bool swap = operand_less(rhs, lhs);
    const Expr& a = swap ? rhs : lhs;
    const Expr& b = swap ? lhs : rhs;
    std::vector<Monomial> t;
    t.reserve(a.size() * b.size());
    for (const auto& x : a.terms_) {
      for (const auto& y : b.terms_) {
        Monomial m;
        m.coeff = x.coeff * y.coeff;
        for (std::size_t i = 0; i < kNumVars; ++i) {
          m.powers[i] = x.powers[i] + y.powers[i];
          m.freqs[i] = x.freqs[i] + y.freqs[i];
        }
        t.push_back(m);
      }
    }
    return from_terms(std::move(t));
  }

  friend Expr operator*(cplx c, const Expr& a) {
    if (c == cplx{}) return {};
    std::vector<Monomial> t = a.terms_;
    for (auto& m : t) m.coeff *= c;
    return from_terms(std::move(t));
  }
  friend Expr operator*(const Expr& a, cplx c) { return c * a; }
  friend Expr operator*(double c, const Expr& a) { return cplx{c, 0.0} * a; }
  friend Expr operator*(const Expr& a, double c) { return cplx{c, 0.0} * a; }

  /// Structural equality of canonical forms (keys and coefficients exactly equal).
  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (compare_keys(a.terms_[i], b.terms_[i]) != 0) return false;
      if (a.terms_[i].coeff != b.terms_[i].coeff) return false;
    }
    return true;
  }

 private:
  static bool operand_less(const Expr& a, const Expr& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const int k = compare_keys(a.terms_[i], b.terms_[i]);
      if (k != 0) return k < 0;
      const cplx x = a.terms_[i].coeff, y = b.terms_[i].coeff;
      if (x.real() != y.real()) return x.real() < y.real();
      if (x.imag() != y.imag()) return x.imag() < y.imag();
    }
    return false;
  }

  void canonicalize(double eps) {
    for (auto& t : terms_)
      for (auto& f : t.freqs) f = detail::snap(f);
    std::stable_sort(terms_.begin(), terms_.end(), [](const Monomial& a, const Monomial& b) {
      return compare_keys(a, b) < 0;
    });
    std::vector<Monomial> merged;
    merged.reserve(terms_.size());
    for (const auto& t : terms_) {
      if (!merged.empty() && compare_keys(merged.back(), t) == 0) {
        merged.back().coeff += t.coeff;
      } else {
        merged.push_back(t);
      }
    }
    double maxc = 0.0;
    for (const auto& t : merged) maxc = std::max(maxc, std::abs(t.coeff));
    const double cut = eps * maxc;
    std::vector<Monomial> kept;
    kept.reserve(merged.size());
    for (auto& t : merged) {
      if (t.coeff == cplx{} || std::abs(t.coeff) <= cut) continue;
      t.coeff = cplx{t.coeff.real() + 0.0, t.coeff.imag() + 0.0};
      kept.push_back(t);
    }
    terms_ = std::move(kept);
  }

  std::vector<Monomial> terms_;
};

inline Expr var(Var v, int power = 1) { return Expr::var(v, power); }
inline Expr exp_of(Var v, cplx mu) { return Expr::exp(v, mu); }

inline Expr pow(const Expr& e, int n) {
  if (n < 0) throw AlgebraError("negative powers are not supported");
  Expr result = 1.0;
  Expr base = e;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n) base = base * base;
  }
  return result;
}

inline Expr diff(const Expr& a, Var v) {
  const std::size_t k = index(v);
  std::vector<Monomial> out;
  out.reserve(2 * a.size());
  for (const auto& t : a.terms()) {
    if (t.freqs[k] != cplx{}) {
      Monomial m = t;
      m.coeff *= t.freqs[k];
      out.push_back(m);
    }
    if (t.powers[k] > 0) {
      Monomial m = t;
      m.coeff *= static_cast<double>(t.powers[k]);
      m.powers[k] -= 1;
      out.push_back(m);
    }
  }
  return Expr::from_terms(std::move(out));
}

inline Expr diff(const Expr& a, Var v, int order) {
  Expr r = a;
  for (int i = 0; i < order && !r.is_zero(); ++i) r = diff(r, v);
  return r;
}

/// Degree of `a` in `v`; INT_MAX if `v` appears inside an exponential, -1 for zero.
inline int degree(const Expr& a, Var v) {
  if (a.is_zero()) return -1;
  int d = 0;
  for (const auto& t : a.terms()) {
    if (t.freq(v) != cplx{}) return INT_MAX;
    d = std::max(d, t.power(v));
  }
  return d;
}

/// Coefficient of v^k: the terms carrying exactly v^k (with no exp in v), with v removed.
inline Expr coefficient(const Expr& a, Var v, int k) {
  std::vector<Monomial> out;
  for (const auto& t : a.terms()) {
    if (t.power(v) == k && t.freq(v) == cplx{}) {
      Monomial m = t;
      m.powers[index(v)] = 0;
      out.push_back(m);
    }
  }
  return Expr::from_terms(std::move(out));
}

/// True when `image` has total degree <= 1 and no exponentials.
inline bool is_affine(const Expr& image) {
  return std::all_of(image.terms().begin(), image.terms().end(), [](const Monomial& t) {
    return !t.has_freqs() && t.total_degree() <= 1;
  });
}

/// Replace v by an affine combination of variables.
inline Expr subst_linear(const Expr& a, Var v, const Expr& image) {
  if (!is_affine(image))
    throw AlgebraError("subst_linear: image of '" + std::string(var_name(v)) +
                       "' is not affine");
  const std::size_t k = index(v);
  Expr result;
  std::vector<Expr> powers_cache{Expr(1.0)};
  for (const auto& t : a.terms()) {
    Monomial rest = t;
    rest.powers[k] = 0;
    rest.freqs[k] = 0.0;
    Expr term = Expr::from_terms({rest});
    const int n = t.powers[k];
    while (static_cast<int>(powers_cache.size()) <= n)
      powers_cache.push_back(powers_cache.back() * image);
    term = term * powers_cache[n];
    const cplx mu = t.freqs[k];
    if (mu != cplx{}) {
      Monomial shift;
      shift.coeff = 1.0;
      for (const auto& it : image.terms()) {
        if (it.total_degree() == 0) {
          shift.coeff *= std::exp(mu * it.coeff);
        } else {
          for (std::size_t j = 0; j < kNumVars; ++j)
            if (it.powers[j] == 1) shift.freqs[j] += mu * it.coeff;
        }
      }
      term = term * Expr::from_terms({shift});
    }
    result += term;
  }
  return result;
}

/// Replace every exponential in `v` by its Taylor polynomial and drop powers of v above `order`.
inline Expr taylor_truncate(const Expr& a, Var v, int order) {
  const std::size_t k = index(v);
  std::vector<Monomial> out;
  for (const auto& t : a.terms()) {
    const cplx mu = t.freqs[k];
    Monomial base = t;
    base.freqs[k] = 0.0;
    cplx c = 1.0;
    for (int j = 0; base.powers[k] + j <= order; ++j) {
      if (j > 0) c *= mu / static_cast<double>(j);
      if (c == cplx{}) break;
      Monomial m = base;
      m.coeff *= c;
      m.powers[k] += j;
      out.push_back(m);
      if (mu == cplx{}) break;
    }
  }
  return Expr::from_terms(std::move(out));
}

inline cplx eval(const Monomial& t, const Point& pt) {
  cplx val = t.coeff;
  cplx expo{};
  for (std::size_t i = 0; i < kNumVars; ++i) {
    if (t.powers[i]) val *= std::pow(pt[i], t.powers[i]);
    if (t.freqs[i] != cplx{}) expo += t.freqs[i] * pt[i];
  }
  if (expo != cplx{}) val *= std::exp(expo);
  return val;
}

inline cplx eval(const Expr& e, const Point& pt) {
  cplx s{};
  for (const auto& t : e.terms()) s += eval(t, pt);
  return s;
}

/// Point with the unnamed variables set to zero.
inline Point point(std::initializer_list<std::pair<Var, cplx>> values) {
  Point pt{};
  for (const auto& [v, c] : values) pt[index(v)] = c;
  return pt;
}

/// Size of an expression that should vanish.
inline double residual(const Expr& e) { return e.max_abs_coeff(); }

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v + 0.0);
  return buf;
}

inline std::string format_complex(cplx c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", c.real() + 0.0, c.imag() + 0.0);
  return buf;
}

inline std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v + 0.0);
  return buf;
}

inline std::string monomial_factors(const Monomial& t) {
  std::string s;
  for (std::size_t i = 0; i < kNumVars; ++i) {
    if (t.powers[i] == 0) continue;
    if (!s.empty()) s += '*';
    s += kVarNames[i];
    if (t.powers[i] > 1) s += '^' + std::to_string(t.powers[i]);
  }
  for (std::size_t i = 0; i < kNumVars; ++i) {
    if (t.freqs[i] == cplx{}) continue;
    if (!s.empty()) s += '*';
    s += "exp(" + format_complex(t.freqs[i]) + '*' + std::string(kVarNames[i]) + ')';
  }
  return s;
}

}  // namespace detail

/// Canonical text form; parse(to_string(e)) == e.
inline std::string to_string(const Expr& e) {
  if (e.is_zero()) return "(0+0i)";
  std::string out;
  for (const auto& t : e.terms()) {
    if (!out.empty()) out += " + ";
    out += detail::format_complex(t.coeff);
    const std::string f = detail::monomial_factors(t);
    if (!f.empty()) out += '*' + f;
  }
  return out;
}

/// Human-oriented form: highest terms first, real coefficients shortened, unit factors omitted.
inline std::string to_pretty(const Expr& e) {
  if (e.is_zero()) return "0";
  std::string out;
  const auto& terms = e.terms();
  for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
    const Monomial& t = *it;
    const std::string f = detail::monomial_factors(t);
    const double scale = std::max(1.0, std::abs(t.coeff));
    const bool real = std::abs(t.coeff.imag()) <= 1e-14 * scale;
    std::string c;
    bool negative = false;
    if (real) {
      double r = t.coeff.real();
      negative = r < 0;
      r = std::abs(r);
      if (f.empty() || std::abs(r - 1.0) > 1e-14) c = detail::format_short(r);
    } else {
      char buf[80];
      std::snprintf(buf, sizeof buf, "(%.12g%+.12gi)", t.coeff.real() + 0.0,
                    t.coeff.imag() + 0.0);
      c = buf;
    }
    if (out.empty()) {
      if (negative) out += '-';
    } else {
      out += negative ? " - " : " + ";
    }
    if (!c.empty()) {
      out += c;
      if (!f.empty()) out += '*';
    }
    out += f;
  }
  return out;
}

}  // namespace orbitquant

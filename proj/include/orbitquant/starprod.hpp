#pragma once

// Moyal star products built from tensor powers of a Poisson bivector.
//
//   u * v = sum_r (1/r!) (1/2i)^r P^r(u, v)
//   P^r(u, v) = Lambda^{i1 j1} ... Lambda^{ir jr} d^r_{i1..ir} u  d^r_{j1..jr} v
//
// The entries of Lambda are never differentiated, so for a non-constant
// tensor this is the plain tensor-power formula, not a covariant one.

#include <climits>
#include <map>
#include <string>
#include <vector>

#include "orbitquant/termalg.hpp"

namespace orbitquant {

using MultiIndex = std::array<int, kNumVars>;

/// Antisymmetric bivector given by its (a, b) entries; Lambda^{ba} = -Lambda^{ab}.
struct PoissonTensor {
  struct Pair {
    Var a;
    Var b;
    Expr entry;
  };
  std::vector<Pair> pairs;

  static PoissonTensor canonical(Expr entry = 1.0, Var a = Var::p, Var b = Var::q) {
    if (entry.is_zero()) throw AlgebraError("Poisson tensor entry must be nonzero");
    return PoissonTensor{{Pair{a, b, std::move(entry)}}};
  }

  bool is_constant() const {
    for (const auto& pr : pairs)
      if (!pr.entry.is_constant()) return false;
    return true;
  }
};

namespace detail {

/// Memoized partial derivatives of one expression.
class DerivativeCache {
 public:
  explicit DerivativeCache(Expr base) { cache_.emplace(MultiIndex{}, std::move(base)); }

  const Expr& get(const MultiIndex& idx) {
    auto it = cache_.find(idx);
    if (it != cache_.end()) return it->second;
    MultiIndex parent = idx;
    std::size_t k = 0;
    while (parent[k] == 0) ++k;
    parent[k] -= 1;
    Expr d = get(parent);
    d = d.is_zero() ? Expr{} : diff(d, static_cast<Var>(k));
    return cache_.emplace(idx, std::move(d)).first->second;
  }

 private:
  std::map<MultiIndex, Expr> cache_;
};

struct TensorEntry {
  Var first;
  Var second;
  Expr value;
};

inline std::vector<TensorEntry> entries(const PoissonTensor& T) {
  std::vector<TensorEntry> e;
  for (const auto& pr : T.pairs) {
    e.push_back({pr.a, pr.b, pr.entry});
    e.push_back({pr.b, pr.a, -pr.entry});
  }
  return e;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Calls fn(counts) for every composition of r into `parts` nonnegative counts.
template <typename Fn>
void for_each_composition(int r, std::size_t parts, std::vector<int>& counts, std::size_t at,
                          Fn&& fn) {
  if (at + 1 == parts) {
    counts[at] = r;
    fn(counts);
    return;
  }
  for (int n = 0; n <= r; ++n) {
    counts[at] = n;
    for_each_composition(r - n, parts, counts, at + 1, fn);
  }
}

// One grouped term of P^r: multinomial weight times tensor powers, the
// derivative multi-index placed on u and the one placed on v.
struct GroupedTerm {
  double weight;
  Expr lambda_power;
  MultiIndex on_u;
  MultiIndex on_v;
};

inline std::vector<GroupedTerm> grouped_terms(int r, const PoissonTensor& T) {
  const auto ent = entries(T);
  std::vector<GroupedTerm> out;
  std::vector<int> counts(ent.size(), 0);
  std::vector<std::vector<Expr>> powers(ent.size());
  for (std::size_t e = 0; e < ent.size(); ++e) {
    powers[e].push_back(Expr(1.0));
    for (int n = 1; n <= r; ++n) powers[e].push_back(powers[e].back() * ent[e].value);
  }
  for_each_composition(r, ent.size(), counts, 0, [&](const std::vector<int>& c) {
    GroupedTerm g{factorial(r), Expr(1.0), {}, {}};
    for (std::size_t e = 0; e < ent.size(); ++e) {
      g.weight /= factorial(c[e]);
      if (c[e] == 0) continue;
      g.lambda_power = g.lambda_power * powers[e][c[e]];
      g.on_u[index(ent[e].first)] += c[e];
      g.on_v[index(ent[e].second)] += c[e];
    }
    out.push_back(std::move(g));
  });
  return out;
}

inline int saturating_add(int a, int b) {
  if (a == INT_MAX || b == INT_MAX) return INT_MAX;
  return a + b;
}

}  // namespace detail

/// r-th bidifferential term of the star product.
inline Expr p_r(int r, const Expr& u, const Expr& v, const PoissonTensor& T,
                detail::DerivativeCache* du = nullptr, detail::DerivativeCache* dv = nullptr) {
  if (r < 0) throw AlgebraError("p_r: r must be nonnegative");
  if (r == 0) return u * v;
  detail::DerivativeCache local_u(u), local_v(v);
  if (!du) du = &local_u;
  if (!dv) dv = &local_v;
  Expr sum;
  for (const auto& g : detail::grouped_terms(r, T)) {
    const Expr& a = du->get(g.on_u);
    if (a.is_zero()) continue;
    const Expr& b = dv->get(g.on_v);
    if (b.is_zero()) continue;
    sum += g.weight * (g.lambda_power * (a * b));
  }
  return sum;
}

/// Poisson bracket {u, v} = P^1(u, v).
inline Expr poisson_bracket(const Expr& u, const Expr& v, const PoissonTensor& T) {
  return p_r(1, u, v, T);
}

/// Largest r for which P^r(u, v) can be nonzero, from polynomial degrees (INT_MAX if unbounded).
inline int degree_bound(const Expr& u, const Expr& v, const PoissonTensor& T) {
  int bound = 0;
  for (const auto& pr : T.pairs) {
    const int du_a = degree(u, pr.a), du_b = degree(u, pr.b);
    const int dv_a = degree(v, pr.a), dv_b = degree(v, pr.b);
    bound = detail::saturating_add(bound, std::min(du_a, dv_b));
    bound = detail::saturating_add(bound, std::min(du_b, dv_a));
  }
  return bound < 0 ? 0 : bound;
}

inline constexpr int kDefaultStarOrder = 16;
inline constexpr int kMaxStarOrder = 32;

struct StarResult {
  Expr value;
  bool exact = false;
  int last_order = 0;
  std::vector<Expr> terms;  // P^r(u, v) for r = 0..last_order, unscaled
};

/// u * v; exact when three consecutive P^r vanish beyond the degree bound, else truncated.
inline StarResult star_detailed(const Expr& u, const Expr& v, const PoissonTensor& T,
                                int r_max = kDefaultStarOrder) {
  if (r_max > kMaxStarOrder) throw AlgebraError("star: truncation order exceeds maximum");
  StarResult res;
  detail::DerivativeCache du(u), dv(v);
  const int bound = degree_bound(u, v, T);
  const cplx half_over_i = 1.0 / (2.0 * kI);
  cplx scale = 1.0;
  int zeros = 0;
  for (int r = 0; r <= r_max; ++r) {
    if (r > 0) scale *= half_over_i / static_cast<double>(r);
    Expr term = p_r(r, u, v, T, &du, &dv);
    res.value += scale * term;
    res.last_order = r;
    zeros = term.is_zero() ? zeros + 1 : 0;
    res.terms.push_back(std::move(term));
    if (zeros >= 3 && bound <= r) {
      res.exact = true;
      break;
    }
  }
  return res;
}

inline Expr star(const Expr& u, const Expr& v, const PoissonTensor& T,
                 int r_max = kDefaultStarOrder) {
  return star_detailed(u, v, T, r_max).value;
}

/// i u * i v - i v * i u
inline Expr star_bracket(const Expr& u, const Expr& v, const PoissonTensor& T,
                         int r_max = kDefaultStarOrder) {
  const Expr iu = kI * u, iv = kI * v;
  return star(iu, iv, T, r_max) - star(iv, iu, T, r_max);
}

/// A coefficient times a derivative of the argument: coeff * d^order f.
struct DiffTerm {
  Expr coeff;
  MultiIndex order{};
};

/// Linear differential operator sum_k coeff_k d^{order_k}, coefficients on the left.
class DiffOperator {
 public:
  DiffOperator() = default;

  void add(const MultiIndex& order, const Expr& coeff) {
    if (coeff.is_zero()) return;
    auto it = terms_.find(order);
    if (it == terms_.end()) {
      terms_.emplace(order, coeff);
    } else {
      it->second += coeff;
      if (it->second.is_zero()) terms_.erase(it);
    }
  }

  Expr apply(const Expr& f) const {
    detail::DerivativeCache df(f);
    Expr out;
    for (const auto& [order, coeff] : terms_) out += coeff * df.get(order);
    return out;
  }

  const std::map<MultiIndex, Expr>& terms() const { return terms_; }

  Expr coefficient(const MultiIndex& order) const {
    auto it = terms_.find(order);
    return it == terms_.end() ? Expr{} : it->second;
  }

  friend DiffOperator operator-(const DiffOperator& a, const DiffOperator& b) {
    DiffOperator r = a;
    for (const auto& [order, coeff] : b.terms_) r.add(order, -coeff);
    return r;
  }

  double max_residual() const {
    double m = 0.0;
    for (const auto& [order, coeff] : terms_) m = std::max(m, residual(coeff));
    return m;
  }

 private:
  std::map<MultiIndex, Expr> terms_;
};

/// The operator v -> u * v through order r_max.
inline DiffOperator left_star_operator(const Expr& u, const PoissonTensor& T, int r_max) {
  if (r_max > kMaxStarOrder) throw AlgebraError("left_star_operator: order exceeds maximum");
  DiffOperator op;
  detail::DerivativeCache du(u);
  const cplx half_over_i = 1.0 / (2.0 * kI);
  cplx scale = 1.0;
  op.add(MultiIndex{}, u);
  for (int r = 1; r <= r_max; ++r) {
    scale *= half_over_i / static_cast<double>(r);
    for (const auto& g : detail::grouped_terms(r, T)) {
      const Expr& a = du.get(g.on_u);
      if (a.is_zero()) continue;
      op.add(g.on_v, (scale * g.weight) * (g.lambda_power * a));
    }
  }
  return op;
}

}  // namespace orbitquant

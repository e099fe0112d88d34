#pragma once

// Indecomposable MD4 Lie algebras in the basis X, Y, Z, T (indices 0..3).
//
// Matrix convention: column j of ad(A) holds the coordinates of [A, e_j].
// With this convention the ad_T blocks act on (X, Y, Z) for the
// class-3 and class-4 families and on (Y, Z, X) for g423 and g424, whose
// derived algebra is span(Y, Z).

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"

namespace orbitquant {

enum class Family { g411, g412, g421, g422, g423, g424, g431, g432, g433, g434, g441, g442 };

inline constexpr std::array<Family, 12> kAllFamilies{
    Family::g411, Family::g412, Family::g421, Family::g422, Family::g423, Family::g424,
    Family::g431, Family::g432, Family::g433, Family::g434, Family::g441, Family::g442};

struct FamilyInfo {
  Family family;
  std::string_view id;
  std::string_view display;
  std::vector<std::string_view> params;
};

inline const std::vector<FamilyInfo>& family_table() {
  static const std::vector<FamilyInfo> table{
      {Family::g411, "g411", "G_{4,1,1}", {}},
      {Family::g412, "g412", "G_{4,1,2}", {}},
      {Family::g421, "g421", "G_{4,2,1(lambda)}", {"lambda"}},
      {Family::g422, "g422", "G_{4,2,2}", {}},
      {Family::g423, "g423", "G_{4,2,3(phi)}", {"phi"}},
      {Family::g424, "g424", "G_{4,2,4} = Aff(C)", {}},
      {Family::g431, "g431", "G_{4,3,1(lambda1,lambda2)}", {"lambda1", "lambda2"}},
      {Family::g432, "g432", "G_{4,3,2(lambda)}", {"lambda"}},
      {Family::g433, "g433", "G_{4,3,3}", {}},
      {Family::g434, "g434", "G_{4,3,4(lambda,phi)}", {"lambda", "phi"}},
      {Family::g441, "g441", "G_{4,4,1} = R x_j H_3", {}},
      {Family::g442, "g442", "G_{4,4,2} = R x H_3", {}},
  };
  return table;
}

inline const FamilyInfo& family_info(Family f) {
  for (const auto& info : family_table())
    if (info.family == f) return info;
  throw std::invalid_argument("unknown family");
}

class CatalogError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline Family family_from_id(std::string_view id) {
  for (const auto& info : family_table())
    if (info.id == id) return info.family;
  throw CatalogError("unknown family '" + std::string(id) + "'");
}

struct AlgebraParams {
  double lambda = 1.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double phi = std::numbers::pi / 4;
};

/// Family plus its real parameters; the domain is checked on construction.
class AlgebraId {
 public:
  using Params = AlgebraParams;

  AlgebraId(Family family, Params params = {}) : family_(family), params_(params) {  // NOLINT
    const auto& slots = family_info(family).params;
    for (std::string_view s : slots) {
      if (s == "lambda" && params_.lambda == 0.0) throw CatalogError("lambda must be nonzero");
      if (s == "lambda1" && params_.lambda1 == 0.0) throw CatalogError("lambda1 must be nonzero");
      if (s == "lambda2" && params_.lambda2 == 0.0) throw CatalogError("lambda2 must be nonzero");
      if (s == "phi" && !(params_.phi > 0.0 && params_.phi < std::numbers::pi))
        throw CatalogError("phi must lie in (0, pi)");
    }
  }

  Family family() const { return family_; }
  const Params& params() const { return params_; }
  double lambda() const { return params_.lambda; }
  double lambda1() const { return params_.lambda1; }
  double lambda2() const { return params_.lambda2; }
  double phi() const { return params_.phi; }
  std::string_view id() const { return family_info(family_).id; }

  /// phi == pi/2 selects the sheeted charts of g423 / g434.
  bool right_angle() const { return std::abs(params_.phi - std::numbers::pi / 2) < 1e-12; }

 private:
  Family family_;
  Params params_;
};

/// U = aX + bY + cZ + dT
struct AlgebraElement {
  double a = 0, b = 0, c = 0, d = 0;

  double operator[](int i) const { return i == 0 ? a : i == 1 ? b : i == 2 ? c : d; }
  double& operator[](int i) { return i == 0 ? a : i == 1 ? b : i == 2 ? c : d; }

  friend AlgebraElement operator+(AlgebraElement u, const AlgebraElement& v) {
    for (int i = 0; i < 4; ++i) u[i] += v[i];
    return u;
  }
  friend AlgebraElement operator*(double s, AlgebraElement u) {
    for (int i = 0; i < 4; ++i) u[i] *= s;
    return u;
  }
  Eigen::Vector4d vec() const { return {a, b, c, d}; }
  static AlgebraElement from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
  static AlgebraElement basis(int i) {
    AlgebraElement e;
    e[i] = 1.0;
    return e;
  }
};

inline constexpr int kX = 0, kY = 1, kZ = 2, kT = 3;

/// F = alpha X* + beta Y* + gamma Z* + delta T*
struct DualVector {
  double alpha = 0, beta = 0, gamma = 0, delta = 0;

  double operator[](int i) const {
    return i == 0 ? alpha : i == 1 ? beta : i == 2 ? gamma : delta;
  }
  Eigen::Vector4d vec() const { return {alpha, beta, gamma, delta}; }
  static DualVector from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
  double pair(const AlgebraElement& A) const {
    return alpha * A.a + beta * A.b + gamma * A.c + delta * A.d;
  }
};

/// [e_i, e_j] = sum_k c(i,j,k) e_k
class StructureConstants {
 public:
  double operator()(int i, int j, int k) const { return c_[(i * 4 + j) * 4 + k]; }

  void set(int i, int j, int k, double v) {
    c_[(i * 4 + j) * 4 + k] = v;
    c_[(j * 4 + i) * 4 + k] = -v;
  }

  struct Entry {
    int i, j, k;
    double value;
  };

  std::vector<Entry> nonzero() const {
    std::vector<Entry> out;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          if ((*this)(i, j, k) != 0.0) out.push_back({i, j, k, (*this)(i, j, k)});
    return out;
  }

 private:
  std::array<double, 64> c_{};
};

namespace detail {

// [T, e_j] = sum_i m(i, j) e_i over the listed basis indices.
inline void set_ad_T(StructureConstants& sc, const std::array<int, 3>& basis,
                     const std::array<std::array<double, 3>, 3>& m) {
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i)
      if (m[i][j] != 0.0) sc.set(kT, basis[j], basis[i], m[i][j]);
}

}  // namespace detail

inline StructureConstants structure_constants(const AlgebraId& id) {
  StructureConstants sc;
  const double cphi = std::cos(id.phi()), sphi = std::sin(id.phi());
  const std::array<int, 3> xyz{kX, kY, kZ};
  const std::array<int, 3> yzx{kY, kZ, kX};
  switch (id.family()) {
    case Family::g411:
      sc.set(kT, kX, kZ, 1.0);
      break;
    case Family::g412:
      sc.set(kT, kZ, kZ, 1.0);
      break;
    case Family::g421:
      sc.set(kT, kY, kY, id.lambda());
      sc.set(kT, kZ, kZ, 1.0);
      break;
    case Family::g422:
      sc.set(kT, kY, kY, 1.0);
      sc.set(kT, kZ, kY, 1.0);
      sc.set(kT, kZ, kZ, 1.0);
      break;
    case Family::g423:
      detail::set_ad_T(sc, yzx, {{{cphi, sphi, 0}, {-sphi, cphi, 0}, {0, 0, 0}}});
      break;
    case Family::g424:
      detail::set_ad_T(sc, yzx, {{{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}});
      // ad_X = ((0 1 0) (-1 0 0) (0 0 0)) on (Y, Z, X)
      sc.set(kX, kY, kZ, -1.0);
      sc.set(kX, kZ, kY, 1.0);
      break;
    case Family::g431:
      detail::set_ad_T(sc, xyz, {{{id.lambda1(), 0, 0}, {0, id.lambda2(), 0}, {0, 0, 1}}});
      break;
    case Family::g432:
      detail::set_ad_T(sc, xyz, {{{id.lambda(), 1, 0}, {0, id.lambda(), 0}, {0, 0, 1}}});
      break;
    case Family::g433:
      detail::set_ad_T(sc, xyz, {{{1, 1, 0}, {0, 1, 1}, {0, 0, 1}}});
      break;
    case Family::g434:
      detail::set_ad_T(sc, xyz, {{{cphi, sphi, 0}, {-sphi, cphi, 0}, {0, 0, id.lambda()}}});
      break;
    case Family::g441:
      detail::set_ad_T(sc, xyz, {{{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}});
      sc.set(kX, kY, kZ, 1.0);
      break;
    case Family::g442:
      detail::set_ad_T(sc, xyz, {{{-1, 0, 0}, {0, 1, 0}, {0, 0, 0}}});
      sc.set(kX, kY, kZ, 1.0);
      break;
  }
  return sc;
}

inline AlgebraElement bracket(const StructureConstants& sc, const AlgebraElement& A,
                              const AlgebraElement& B) {
  // summed over i < j; [A, A] is exactly zero
  AlgebraElement r;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const double w = A[i] * B[j] - A[j] * B[i];
      if (w == 0.0) continue;
      for (int k = 0; k < 4; ++k) r[k] += w * sc(i, j, k);
    }
  }
  return r;
}

inline AlgebraElement bracket(const AlgebraId& id, const AlgebraElement& A,
                              const AlgebraElement& B) {
  return bracket(structure_constants(id), A, B);
}

inline double jacobi_defect(const AlgebraId& id, const AlgebraElement& A, const AlgebraElement& B,
                            const AlgebraElement& C) {
  const auto sc = structure_constants(id);
  const auto j = bracket(sc, A, bracket(sc, B, C)) + bracket(sc, B, bracket(sc, C, A)) +
                 bracket(sc, C, bracket(sc, A, B));
  return j.vec().norm();
}

/// ad(A) e_j = [A, e_j] stored in column j.
inline Eigen::Matrix4d ad_matrix(const AlgebraId& id, const AlgebraElement& A) {
  const auto sc = structure_constants(id);
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (int j = 0; j < 4; ++j) {
    const auto col = bracket(sc, A, AlgebraElement::basis(j));
    for (int k = 0; k < 4; ++k) m(k, j) = col[k];
  }
  return m;
}

/// Infinitesimal co-adjoint action on dual coordinates: -ad(A)^T.
inline Eigen::Matrix4d coad_matrix(const AlgebraId& id, const AlgebraElement& A) {
  return -ad_matrix(id, A).transpose();
}

inline DualVector coadjoint_flow(const AlgebraId& id, const AlgebraElement& A,
                                 const DualVector& F, double u) {
  const Eigen::Matrix4d m = u * coad_matrix(id, A);
  const Eigen::Matrix4d e = m.exp();
  return DualVector::from(e * F.vec());
}

/// B_F(i, j) = <F, [e_i, e_j]>; its rank is the orbit dimension.
inline Eigen::Matrix4d kirillov_matrix(const AlgebraId& id, const DualVector& F) {
  const auto sc = structure_constants(id);
  Eigen::Matrix4d b;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double v = 0.0;
      for (int k = 0; k < 4; ++k) v += F[k] * sc(i, j, k);
      b(i, j) = v;
    }
  return b;
}

inline int orbit_rank(const AlgebraId& id, const DualVector& F, double tol = 1e-9) {
  Eigen::Matrix4d span;
  for (int i = 0; i < 4; ++i) span.col(i) = coad_matrix(id, AlgebraElement::basis(i)) * F.vec();
  Eigen::FullPivLU<Eigen::Matrix4d> lu(span);
  lu.setThreshold(tol);
  return static_cast<int>(lu.rank());
}

struct OrbitDescriptor {
  int dimension = 0;
  std::string tag;
  std::string shape;
};

inline OrbitDescriptor classify_orbit(const AlgebraId& id, const DualVector& F) {
  const double al = F.alpha, be = F.beta, ga = F.gamma;
  auto zero = [](std::string tag) { return OrbitDescriptor{0, std::move(tag), "point"}; };
  switch (id.family()) {
    case Family::g411:
      return ga == 0 ? zero("1.1.i") : OrbitDescriptor{2, "1.1.ii", "plane"};
    case Family::g412:
      return ga == 0 ? zero("1.2.i") : OrbitDescriptor{2, "1.2.ii", "half-plane"};
    case Family::g421:
      return be == 0 && ga == 0 ? zero("2.1.i") : OrbitDescriptor{2, "2.1.ii", "cylinder"};
    case Family::g422:
      return be == 0 && ga == 0 ? zero("2.2.i") : OrbitDescriptor{2, "2.2.ii", "cylinder"};
    case Family::g423:
      return be == 0 && ga == 0 ? zero("2.3.i") : OrbitDescriptor{2, "2.3.ii", "cylinder"};
    case Family::g424:
      return be == 0 && ga == 0 ? zero("2.4.i")
                                : OrbitDescriptor{4, "2.4.ii", "R x (R^2)* x R"};
    case Family::g431:
    case Family::g432:
    case Family::g433:
      return al == 0 && be == 0 && ga == 0 ? zero("3.1.i")
                                           : OrbitDescriptor{2, "3.1.ii", "cylinder"};
    case Family::g434:
      return al == 0 && be == 0 && ga == 0 ? zero("3.4.i")
                                           : OrbitDescriptor{2, "3.4.ii", "cylinder"};
    case Family::g441:
      if (ga != 0) return {2, "4.1.iii", "rotation paraboloid"};
      if (al != 0 || be != 0) return {2, "4.1.ii", "rotation cylinder"};
      return zero("4.1.i");
    case Family::g442:
      if (ga != 0) return {2, "4.2.v", "hyperbolic paraboloid"};
      if (al != 0 && be != 0) return {2, "4.2.iv", "hyperbolic cylinder"};
      if (al != 0) return {2, "4.2.ii", "half-plane"};
      if (be != 0) return {2, "4.2.iii", "half-plane"};
      return zero("4.2.i");
  }
  return zero("?");
}

struct OrbitCase {
  std::string tag;
  std::string condition;
  int dimension;
  std::string shape;
};

/// Orbit strata of each family, in the order `classify_orbit` tests them.
inline std::vector<OrbitCase> orbit_cases(Family f) {
  switch (f) {
    case Family::g411:
      return {{"1.1.i", "gamma = 0", 0, "point"}, {"1.1.ii", "gamma != 0", 2, "plane"}};
    case Family::g412:
      return {{"1.2.i", "gamma = 0", 0, "point"}, {"1.2.ii", "gamma != 0", 2, "half-plane"}};
    case Family::g421:
    case Family::g422:
    case Family::g423: {
      const std::string n = f == Family::g421 ? "2.1" : f == Family::g422 ? "2.2" : "2.3";
      return {{n + ".i", "beta = gamma = 0", 0, "point"},
              {n + ".ii", "beta^2 + gamma^2 != 0", 2, "cylinder"}};
    }
    case Family::g424:
      return {{"2.4.i", "beta = gamma = 0", 0, "point"},
              {"2.4.ii", "beta^2 + gamma^2 != 0", 4, "R x (R^2)* x R"}};
    case Family::g431:
    case Family::g432:
    case Family::g433:
      return {{"3.1.i", "alpha = beta = gamma = 0", 0, "point"},
              {"3.1.ii", "alpha^2 + beta^2 + gamma^2 != 0", 2, "cylinder"}};
    case Family::g434:
      return {{"3.4.i", "alpha = beta = gamma = 0", 0, "point"},
              {"3.4.ii", "alpha^2 + beta^2 + gamma^2 != 0", 2, "cylinder"}};
    case Family::g441:
      return {{"4.1.i", "alpha = beta = gamma = 0", 0, "point"},
              {"4.1.ii", "gamma = 0, alpha^2 + beta^2 != 0", 2, "rotation cylinder"},
              {"4.1.iii", "gamma != 0", 2, "rotation paraboloid"}};
    case Family::g442:
      return {{"4.2.i", "alpha = beta = gamma = 0", 0, "point"},
              {"4.2.ii", "gamma = 0, alpha != 0, beta = 0", 2, "half-plane"},
              {"4.2.iii", "gamma = 0, alpha = 0, beta != 0", 2, "half-plane"},
              {"4.2.iv", "gamma = 0, alpha beta != 0", 2, "hyperbolic cylinder"},
              {"4.2.v", "gamma != 0", 2, "hyperbolic paraboloid"}};
  }
  return {};
}

/// Catalog entry: id, parameter slots, nonzero structure constants, orbit case table.
inline nlohmann::ordered_json catalog_entry(const AlgebraId& id) {
  static constexpr std::array<char, 4> names{'X', 'Y', 'Z', 'T'};
  const auto& info = family_info(id.family());
  nlohmann::ordered_json j;
  j["id"] = info.id;
  j["name"] = info.display;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  for (std::string_view s : info.params) {
    const double v = s == "lambda"    ? id.lambda()
                     : s == "lambda1" ? id.lambda1()
                     : s == "lambda2" ? id.lambda2()
                                      : id.phi();
    params[std::string(s)] = v;
  }
  j["params"] = params;
  nlohmann::ordered_json consts = nlohmann::ordered_json::array();
  for (const auto& e : structure_constants(id).nonzero())
    consts.push_back({{"bracket", std::string{'[', names[e.i], ',', names[e.j], ']'}},
                      {"basis", std::string{names[e.k]}},
                      {"coeff", e.value}});
  j["structure_constants"] = consts;
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const auto& c : orbit_cases(id.family()))
    cases.push_back({{"tag", c.tag}, {"condition", c.condition}, {"dimension", c.dimension},
                     {"shape", c.shape}});
  j["orbit_cases"] = cases;
  return j;
}

/// All 12 families at default parameters.
inline nlohmann::ordered_json catalog_json() {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (Family f : kAllFamilies) out.push_back(catalog_entry(AlgebraId{f}));
  return out;
}

}  // namespace orbitquant

#pragma once

// Grid functions on centered uniform grids, FFTW transforms along one axis.
//
// An axis with N points and half-width L has nodes x_k = (k - N/2) dx,
// dx = 2L/N, and conjugate nodes p_j = (j - N/2) dp, dp = pi/L. For N
// divisible by 4 the unitary partial transform
//
//   F(x_k) = dp/sqrt(2 pi) sum_j e^{-i p_j x_k} f(p_j)
//
// reduces to a DFT with (-1)^j and (-1)^k twiddles.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace orbitquant {

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Axis {
  int n = 256;
  double half_width = 10.0;

  double step() const { return 2.0 * half_width / n; }
  double node(int k) const { return (k - n / 2) * step(); }
  double dual_step() const { return std::numbers::pi / half_width; }
  double dual_node(int j) const { return (j - n / 2) * dual_step(); }
  /// Largest angular frequency resolved by the grid.
  double nyquist() const { return std::numbers::pi / step(); }
};

/// Row-major complex array over a product of axes.
class Field {
 public:
  Field() = default;
  explicit Field(std::vector<Axis> axes) : axes_(std::move(axes)) {
    std::size_t total = 1;
    for (const auto& a : axes_) {
      if (a.n <= 0 || a.n % 4 != 0) throw GridError("grid sizes must be positive multiples of 4");
      if (!(a.half_width > 0.0)) throw GridError("grid half-width must be positive");
      total *= static_cast<std::size_t>(a.n);
    }
    data_.assign(total, std::complex<double>{});
  }

  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t k) const { return axes_[k]; }
  std::size_t rank() const { return axes_.size(); }
  std::size_t size() const { return data_.size(); }
  std::vector<std::complex<double>>& data() { return data_; }
  const std::vector<std::complex<double>>& data() const { return data_; }
  std::complex<double>& operator[](std::size_t i) { return data_[i]; }
  const std::complex<double>& operator[](std::size_t i) const { return data_[i]; }

  /// Stride of axis k in the flat array.
  std::size_t stride(std::size_t k) const {
    std::size_t s = 1;
    for (std::size_t j = k + 1; j < axes_.size(); ++j) s *= static_cast<std::size_t>(axes_[j].n);
    return s;
  }

  /// Index along axis k of flat position i.
  int coordinate_index(std::size_t i, std::size_t k) const {
    return static_cast<int>((i / stride(k)) % static_cast<std::size_t>(axes_[k].n));
  }

  /// Fills from a function of the node coordinates.
  template <typename Fn>
  static Field sample(std::vector<Axis> axes, Fn&& fn) {
    Field f(std::move(axes));
    std::vector<double> pt(f.rank());
    for (std::size_t i = 0; i < f.size(); ++i) {
      for (std::size_t k = 0; k < f.rank(); ++k) pt[k] = f.axes_[k].node(f.coordinate_index(i, k));
      f.data_[i] = fn(pt);
    }
    return f;
  }

  Field& operator+=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Field& operator-=(const Field& o) {
    check_same(o);
    for (std::size_t i = 0; i < size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Field& operator*=(std::complex<double> c) {
    for (auto& v : data_) v *= c;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(std::complex<double> c, Field a) { return a *= c; }

  /// Pointwise product.
  friend Field operator*(Field a, const Field& b) {
    a.check_same(b);
    for (std::size_t i = 0; i < a.size(); ++i) a.data_[i] *= b.data_[i];
    return a;
  }

  /// Discrete L2 norm including the cell volume.
  double norm() const {
    double cell = 1.0;
    for (const auto& a : axes_) cell *= a.step();
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s * cell);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool all_finite() const {
    for (const auto& v : data_)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
  }

 private:
  void check_same(const Field& o) const {
    if (o.data_.size() != data_.size()) throw GridError("field shapes differ");
  }

  std::vector<Axis> axes_;
  std::vector<std::complex<double>> data_;
};

/// ||a - b|| / ||b||, or ||a|| when b vanishes.
inline double relative_l2(const Field& a, const Field& b) {
  const double d = (a - b).norm(), nb = b.norm();
  return nb > 0.0 ? d / nb : d;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// In-place unnormalized DFT of every line along `axis`; sign is FFTW_FORWARD or FFTW_BACKWARD.
inline void dft_along(Field& f, std::size_t axis, int sign) {
  const int n = f.axis(axis).n;
  const auto inner = static_cast<int>(f.stride(axis));
  const auto outer = static_cast<int>(f.size() / (static_cast<std::size_t>(n) * inner));
  fftw_iodim dim{n, inner, inner};
  fftw_iodim loops[2] = {{outer, n * inner, n * inner}, {inner, 1, 1}};
  auto* buf = reinterpret_cast<fftw_complex*>(f.data().data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_guru_dft(1, &dim, 2, loops, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  if (!plan) throw GridError("FFTW plan creation failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
}

// Multiplies each entry by g(index along axis).
template <typename Fn>
void scale_along(Field& f, std::size_t axis, Fn&& g) {
  const std::size_t n = static_cast<std::size_t>(f.axis(axis).n);
  std::vector<std::complex<double>> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = g(static_cast<int>(k));
  const std::size_t s = f.stride(axis);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] *= w[(i / s) % n];
}

inline double parity(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

}  // namespace detail

/// Unitary partial transform from the dual (p) nodes to the primal (x) nodes of `axis`.
inline Field partial_fourier(Field f, std::size_t axis) {
  const Axis a = f.axis(axis);
  detail::scale_along(f, axis, [](int j) { return detail::parity(j); });
  detail::dft_along(f, axis, FFTW_FORWARD);
  const double c = a.dual_step() / std::sqrt(2.0 * std::numbers::pi);
  detail::scale_along(f, axis, [c](int k) { return c * detail::parity(k); });
  return f;
}

/// Inverse of partial_fourier: primal (x) nodes to dual (p) nodes.
inline Field inverse_partial_fourier(Field f, std::size_t axis) {
  const Axis a = f.axis(axis);
  detail::scale_along(f, axis, [](int k) { return detail::parity(k); });
  detail::dft_along(f, axis, FFTW_BACKWARD);
  const double c = a.step() / std::sqrt(2.0 * std::numbers::pi);
  detail::scale_along(f, axis, [c](int j) { return c * detail::parity(j); });
  return f;
}

/// Spectral derivative of the given order along `axis`, nodes spaced by `spacing`.
inline Field spectral_derivative(Field f, std::size_t axis, int order, double spacing) {
  if (order == 0) return f;
  const int n = f.axis(axis).n;
  detail::dft_along(f, axis, FFTW_FORWARD);
  const double base = 2.0 * std::numbers::pi / (n * spacing);
  detail::scale_along(f, axis, [&](int m) {
    const int k = m < n / 2 ? m : m - n;
    if (m == n / 2 && order % 2 == 1) return std::complex<double>{};
    return std::pow(std::complex<double>(0.0, base * k), order) / static_cast<double>(n);
  });
  detail::dft_along(f, axis, FFTW_BACKWARD);
  return f;
}

/// Derivative on the primal nodes of `axis`.
inline Field derivative(const Field& f, std::size_t axis, int order = 1) {
  return spectral_derivative(f, axis, order, f.axis(axis).step());
}

/// Derivative on the dual nodes of `axis`.
inline Field dual_derivative(const Field& f, std::size_t axis, int order = 1) {
  return spectral_derivative(f, axis, order, f.axis(axis).dual_step());
}

/// Pointwise multiplication by a function of the node coordinate along `axis`.
inline Field multiply_along(Field f, std::size_t axis, const std::function<std::complex<double>(double)>& g,
                            bool dual = false) {
  const Axis a = f.axis(axis);
  detail::scale_along(f, axis, [&](int k) { return g(dual ? a.dual_node(k) : a.node(k)); });
  return f;
}

}  // namespace orbitquant

// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Truncated Taylor jets along coordinate axes.
//
// A jet of order K stores normalized coefficients c_j = f^(j) / j!, j = 0..K.
// Normalized storage keeps the truncated product a plain Cauchy convolution
// and keeps order-4 arithmetic well scaled; `derivative(j)` undoes it.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "pinnkit/error.hpp"

namespace pinnkit::ad {

inline constexpr int kMaxJetOrder = 4;

inline constexpr double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline bool supported_order(int k) { return k == 0 || k == 1 || k == 2 || k == 4; }

/// Elementwise scalar functions the engine can push jets through.
enum class UnaryFn { tanh, sin, cos, exp, gelu };

/// Column-block layout of a batched jet bundle.
///
/// A bundle carries one shared value block and, for each direction d, the
/// coefficients 1..orders[d] of the jet along that direction. Each block
/// holds `batch` columns; blocks are concatenated horizontally, so the
/// block for (d, k) is a contiguous slab in column-major storage. Mixed
/// partials are never formed.
struct JetLayout {
  Eigen::Index batch = 1;
  std::vector<int> orders;

  int blocks() const { return 1 + std::accumulate(orders.begin(), orders.end(), 0); }
  int directions() const { return static_cast<int>(orders.size()); }
  int max_order() const {
    int k = 0;
    for (int o : orders) k = std::max(k, o);
    return k;
  }
  /// Block index of coefficient k (k >= 1) along direction d; 0 for k == 0.
  int block(int d, int k) const {
    if (k == 0) return 0;
    int b = 1;
    for (int i = 0; i < d; ++i) b += orders[static_cast<std::size_t>(i)];
    return b + k - 1;
  }
  Eigen::Index cols() const { return batch * blocks(); }

  bool operator==(const JetLayout&) const = default;
};

namespace detail {

using Array = Eigen::ArrayXd;
using ArrayMap = Eigen::Map<Array>;
using ConstArrayMap = Eigen::Map<const Array>;

/// tanh through exp; the glibc scalar tanh is ~20x slower than vectorized exp.
inline Array fast_tanh(const ConstArrayMap& z) {
  Array e = (-2.0 * z.abs()).exp();
  return z.sign() * (1.0 - e) / (1.0 + e);
}

inline double gaussian_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

/// f^(k)(z) for k = 0..kmax, elementwise.
inline void derivative_series(UnaryFn fn, const ConstArrayMap& z, int kmax,
                              std::vector<Array>& out) {
  out.resize(static_cast<std::size_t>(kmax) + 1);
  switch (fn) {
    case UnaryFn::tanh: {
      out[0] = fast_tanh(z);
      const Array& y = out[0];
      if (kmax >= 1) out[1] = 1.0 - y.square();
      if (kmax >= 2) out[2] = -2.0 * y * out[1];
      if (kmax >= 3) out[3] = -2.0 * (out[1].square() + y * out[2]);
      if (kmax >= 4) out[4] = -2.0 * (3.0 * out[1] * out[2] + y * out[3]);
      if (kmax >= 5) out[5] = -2.0 * (3.0 * out[2].square() + 4.0 * out[1] * out[3] + y * out[4]);
      break;
    }
    case UnaryFn::sin:
    case UnaryFn::cos: {
      Array s = z.sin();
      Array c = z.cos();
      // sin: s, c, -s, -c, ...; cos: c, -s, -c, s, ...
      const int shift = fn == UnaryFn::cos ? 1 : 0;
      for (int k = 0; k <= kmax; ++k) {
        switch ((k + shift) % 4) {
          case 0: out[static_cast<std::size_t>(k)] = s; break;
          case 1: out[static_cast<std::size_t>(k)] = c; break;
          case 2: out[static_cast<std::size_t>(k)] = -s; break;
          default: out[static_cast<std::size_t>(k)] = -c; break;
        }
      }
      break;
    }
    case UnaryFn::exp: {
      out[0] = z.exp();
      for (int k = 1; k <= kmax; ++k) out[static_cast<std::size_t>(k)] = out[0];
      break;
    }
    case UnaryFn::gelu: {
      Array phi = z.unaryExpr([](double v) { return gaussian_pdf(v); });
      Array cdf = z.unaryExpr([](double v) { return 0.5 * (1.0 + std::erf(v / std::sqrt(2.0))); });
      Array z2 = z.square();
      out[0] = z * cdf;
      if (kmax >= 1) out[1] = cdf + z * phi;
      if (kmax >= 2) out[2] = (2.0 - z2) * phi;
      if (kmax >= 3) out[3] = z * (z2 - 4.0) * phi;
      if (kmax >= 4) out[4] = (-z2 * z2 + 7.0 * z2 - 4.0) * phi;
      if (kmax >= 5) out[5] = z * (z2 * z2 - 11.0 * z2 + 18.0) * phi;
      break;
    }
  }
}

/// Coefficient k (1..4) of f(z(t)) from f^(j)(z0) (`f[j]`) and the normalized
/// input coefficients `z[1..k]` (z[0] unused). Passing `f + 1` yields the
/// coefficients of f'(z(t)), which are exactly the partials dy_k/dz_{k-m}.
template <class F, class Z>
auto compose_coeff(const F* f, const Z* z, int k) {
  switch (k) {
    case 1:
      return (f[1] * z[1]).eval();
    case 2:
      return (f[1] * z[2] + 0.5 * f[2] * z[1] * z[1]).eval();
    case 3:
      return (f[1] * z[3] + f[2] * z[1] * z[2] + (1.0 / 6.0) * f[3] * z[1] * z[1] * z[1]).eval();
    default:
      return (f[1] * z[4] + f[2] * (z[1] * z[3] + 0.5 * z[2] * z[2]) +
              0.5 * f[3] * z[1] * z[1] * z[2] + (1.0 / 24.0) * f[4] * (z[1] * z[1]) * (z[1] * z[1]))
          .eval();
  }
}

inline double compose_coeff_scalar(const double* f, const double* z, int k) {
  switch (k) {
    case 1: return f[1] * z[1];
    case 2: return f[1] * z[2] + 0.5 * f[2] * z[1] * z[1];
    case 3: return f[1] * z[3] + f[2] * z[1] * z[2] + f[3] * z[1] * z[1] * z[1] / 6.0;
    default:
      return f[1] * z[4] + f[2] * (z[1] * z[3] + 0.5 * z[2] * z[2]) +
             0.5 * f[3] * z[1] * z[1] * z[2] + f[4] * z[1] * z[1] * z[1] * z[1] / 24.0;
  }
}

}  // namespace detail

/// Single-direction Taylor jet with generic coefficient type.
///
/// With T = double this is the scalar jet used for symbolic checks; with
/// T = Var it carries rows of a batched network output (u, u_x, ... along
/// one axis) into residual assembly.
template <class T>
class Jet {
 public:
  Jet() = default;
  explicit Jet(std::vector<T> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) throw Error(Errc::shape_error, "jet needs at least one coefficient");
  }

  /// Independent variable x0 along the jet direction: [x0, 1, 0, ...].
  static Jet variable(double x0, int order)
    requires std::is_same_v<T, double>
  {
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    c[0] = x0;
    if (order >= 1) c[1] = 1.0;
    return Jet(std::move(c));
  }
  static Jet constant(double v, int order)
    requires std::is_same_v<T, double>
  {
    std::vector<double> c(static_cast<std::size_t>(order) + 1, 0.0);
    c[0] = v;
    return Jet(std::move(c));
  }

  int order() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<T>& coeffs() const { return coeffs_; }
  const T& value() const { return coeffs_.front(); }
  const T& coeff(int k) const { return coeffs_.at(static_cast<std::size_t>(k)); }

  /// Un-normalized k-th derivative, k! * c_k.
  T derivative(int k) const { return factorial(k) * coeff(k); }

  friend Jet operator+(const Jet& a, const Jet& b) {
    check_orders(a, b);
    std::vector<T> c;
    c.reserve(a.coeffs_.size());
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c.push_back(a.coeffs_[i] + b.coeffs_[i]);
    return Jet(std::move(c));
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    check_orders(a, b);
    std::vector<T> c;
    c.reserve(a.coeffs_.size());
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i) c.push_back(a.coeffs_[i] - b.coeffs_[i]);
    return Jet(std::move(c));
  }
  /// Truncated Cauchy product.
  friend Jet operator*(const Jet& a, const Jet& b) {
    check_orders(a, b);
    std::vector<T> c;
    c.reserve(a.coeffs_.size());
    for (std::size_t k = 0; k < a.coeffs_.size(); ++k) {
      T acc = a.coeffs_[0] * b.coeffs_[k];
      for (std::size_t j = 1; j <= k; ++j) acc = acc + a.coeffs_[j] * b.coeffs_[k - j];
      c.push_back(acc);
    }
    return Jet(std::move(c));
  }
  friend Jet operator*(double s, const Jet& a) {
    std::vector<T> c;
    c.reserve(a.coeffs_.size());
    for (const auto& v : a.coeffs_) c.push_back(s * v);
    return Jet(std::move(c));
  }

 private:
  static void check_orders(const Jet& a, const Jet& b) {
    if (a.coeffs_.size() != b.coeffs_.size())
      throw Error(Errc::shape_error, "jet order mismatch");
  }

  std::vector<T> coeffs_;
};

/// f(jet) for a scalar jet, via the derivative series of f at the value.
inline Jet<double> apply(UnaryFn fn, const Jet<double>& z) {
  const int k = z.order();
  if (k > kMaxJetOrder) throw Error(Errc::invalid_argument, "jet order above 4");
  Eigen::ArrayXd z0(1);
  z0(0) = z.value();
  std::vector<Eigen::ArrayXd> series;
  detail::derivative_series(fn, detail::ConstArrayMap(z0.data(), 1), k, series);
  std::array<double, kMaxJetOrder + 1> f{};
  for (int j = 0; j <= k; ++j) f[static_cast<std::size_t>(j)] = series[static_cast<std::size_t>(j)](0);
  std::vector<double> out(static_cast<std::size_t>(k) + 1);
  out[0] = f[0];
  for (int j = 1; j <= k; ++j)
    out[static_cast<std::size_t>(j)] = detail::compose_coeff_scalar(f.data(), z.coeffs().data(), j);
  return Jet<double>(std::move(out));
}

inline Jet<double> tanh(const Jet<double>& z) { return apply(UnaryFn::tanh, z); }
inline Jet<double> sin(const Jet<double>& z) { return apply(UnaryFn::sin, z); }
inline Jet<double> cos(const Jet<double>& z) { return apply(UnaryFn::cos, z); }
inline Jet<double> exp(const Jet<double>& z) { return apply(UnaryFn::exp, z); }

}  // namespace pinnkit::ad

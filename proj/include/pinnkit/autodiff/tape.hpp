// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode tape over dense matrix values.
//
// Every node holds an Eigen matrix (a scalar is 1x1). Nodes are appended in
// evaluation order, so operand indices always precede the node that uses
// them and a single backward sweep in reverse index order is exact. A tape
// lives for one batch: record, sweep one or more times, discard.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pinnkit/autodiff/jet.hpp"
#include "pinnkit/autodiff/param_vector.hpp"
#include "pinnkit/error.hpp"

namespace pinnkit::ad {

enum class OpKind : std::uint8_t {
  leaf,
  matmul,
  add,
  sub,
  mul,
  neg,
  scale,
  add_scalar,
  scale_by,
  scale_rows,
  add_bias,
  unary,
  square,
  sum,
  dot,
  vstack,
  block,
  jet_unary,
  jet_mul,
};

struct Node {
  OpKind kind = OpKind::leaf;
  int lhs = -1;
  int rhs = -1;
  double scalar = 0.0;
  UnaryFn fn = UnaryFn::tanh;
  Eigen::Index r0 = 0;  // block origin / bias column count
  Eigen::Index c0 = 0;
  int param_segment = -1;  // >= 0 for parameter leaves
  bool active = false;     // reachable from a parameter leaf
  Matrix value;
  Matrix aux;  // op-specific cache (derivatives, constant weights)
  std::vector<int> inputs;
  std::shared_ptr<const JetLayout> layout;
};

class Tape;

/// Handle to a tape node.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, int index) : tape_(tape), index_(index) {}

  Tape* tape() const { return tape_; }
  int index() const { return index_; }
  bool valid() const { return tape_ != nullptr && index_ >= 0; }

  inline const Matrix& value() const;
  inline Eigen::Index rows() const;
  inline Eigen::Index cols() const;
  /// Value of a 1x1 node.
  inline double scalar() const;

 private:
  Tape* tape_ = nullptr;
  int index_ = -1;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value) {
    Node n;
    n.value = std::move(value);
    return push(std::move(n));
  }
  Var constant(double v) { return constant(Matrix::Constant(1, 1, v)); }

  /// Leaf bound to one segment of `params`. All parameter leaves on a tape
  /// must come from vectors sharing one layout.
  Var parameter(const ParamVector& params, std::size_t segment) {
    if (!layout_) layout_ = params.layout_ptr();
    else if (!(*layout_ == params.layout()))
      throw Error(Errc::shape_error, "parameters from two layouts on one tape");
    Node n;
    n.value = params.view(segment);
    n.param_segment = static_cast<int>(segment);
    n.active = true;
    return push(std::move(n));
  }

  Var push(Node&& n) {
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int>(nodes_.size()) - 1);
  }

  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return nodes_.size(); }
  bool active(int i) const { return i >= 0 && nodes_[static_cast<std::size_t>(i)].active; }
  const std::shared_ptr<const ParamLayout>& layout() const { return layout_; }

  /// Reverse sweep seeded with d(out) = seed. Replaces any previous adjoints.
  void backward(Var out, const Matrix& seed);

  bool has_adjoint(int i) const {
    return static_cast<std::size_t>(i) < adj_.size() && adj_[static_cast<std::size_t>(i)].size() > 0;
  }
  const Matrix& adjoint(int i) const { return adj_[static_cast<std::size_t>(i)]; }

  /// Scatter parameter-leaf adjoints of the last sweep into a flat vector.
  Vector parameter_gradient() const {
    Vector g = Vector::Zero(layout_ ? layout_->size() : 0);
    for (std::size_t i = 0; i < nodes_.size() && i < adj_.size(); ++i) {
      const Node& n = nodes_[i];
      if (n.param_segment < 0 || adj_[i].size() == 0) continue;
      const auto& seg = (*layout_)[static_cast<std::size_t>(n.param_segment)];
      Eigen::Map<Matrix>(g.data() + seg.offset, seg.rows, seg.cols) += adj_[i];
    }
    return g;
  }

 private:
  void accumulate(int i, const Matrix& g) {
    if (!active(i)) return;
    Matrix& a = adj_[static_cast<std::size_t>(i)];
    if (a.size() == 0) a = g;
    else a += g;
  }
  template <class Expr>
  void accumulate_expr(int i, const Expr& g) {
    if (!active(i)) return;
    Matrix& a = adj_[static_cast<std::size_t>(i)];
    if (a.size() == 0) a = g;
    else a += g;
  }

  void backward_node(const Node& n, const Matrix& g);
  void backward_jet_unary(const Node& n, const Matrix& g);
  void backward_jet_mul(const Node& n, const Matrix& g);

  std::vector<Node> nodes_;
  std::vector<Matrix> adj_;
  std::shared_ptr<const ParamLayout> layout_;
};

inline const Matrix& Var::value() const { return tape_->node(index_).value; }
inline Eigen::Index Var::rows() const { return value().rows(); }
inline Eigen::Index Var::cols() const { return value().cols(); }
inline double Var::scalar() const {
  if (rows() != 1 || cols() != 1) throw Error(Errc::shape_error, "scalar() on a non-1x1 node");
  return value()(0, 0);
}

// ---------------------------------------------------------------------------
// Primitive constructors

namespace detail {

inline Tape& same_tape(const Var& a, const Var& b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape())
    throw Error(Errc::invalid_node, "operands live on different tapes");
  return *a.tape();
}

inline Tape& tape_of(const Var& a) {
  if (!a.valid()) throw Error(Errc::invalid_node, "operand is not a recorded node");
  return *a.tape();
}

inline void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(Errc::shape_error, std::string(op) + ": shape mismatch");
}

inline Node make_node(OpKind kind, const Tape& t, int lhs, int rhs = -1) {
  Node n;
  n.kind = kind;
  n.lhs = lhs;
  n.rhs = rhs;
  n.active = t.active(lhs) || t.active(rhs);
  return n;
}

inline void unary_value(UnaryFn fn, const Matrix& x, Matrix& value, Matrix& deriv) {
  std::vector<Eigen::ArrayXd> series;
  derivative_series(fn, ConstArrayMap(x.data(), x.size()), 1, series);
  value = Eigen::Map<const Matrix>(series[0].data(), x.rows(), x.cols());
  deriv = Eigen::Map<const Matrix>(series[1].data(), x.rows(), x.cols());
}

}  // namespace detail

inline Var matmul(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  if (a.cols() != b.rows()) throw Error(Errc::shape_error, "matmul: inner dimensions differ");
  Node n = detail::make_node(OpKind::matmul, t, a.index(), b.index());
  n.value.noalias() = a.value() * b.value();
  return t.push(std::move(n));
}

inline Var operator+(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_same_shape(a, b, "add");
  Node n = detail::make_node(OpKind::add, t, a.index(), b.index());
  n.value = a.value() + b.value();
  return t.push(std::move(n));
}

inline Var operator-(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_same_shape(a, b, "sub");
  Node n = detail::make_node(OpKind::sub, t, a.index(), b.index());
  n.value = a.value() - b.value();
  return t.push(std::move(n));
}

/// Elementwise (Hadamard) product.
inline Var operator*(const Var& a, const Var& b) {
  Tape& t = detail::same_tape(a, b);
  detail::require_same_shape(a, b, "mul");
  Node n = detail::make_node(OpKind::mul, t, a.index(), b.index());
  n.value = a.value().cwiseProduct(b.value());
  return t.push(std::move(n));
}

inline Var operator-(const Var& a) {
  Tape& t = detail::tape_of(a);
  Node n = detail::make_node(OpKind::neg, t, a.index());
  n.value = -a.value();
  return t.push(std::move(n));
}

inline Var operator*(double s, const Var& a) {
  Tape& t = detail::tape_of(a);
  Node n = detail::make_node(OpKind::scale, t, a.index());
  n.scalar = s;
  n.value = s * a.value();
  return t.push(std::move(n));
}
inline Var operator*(const Var& a, double s) { return s * a; }

inline Var operator+(const Var& a, double s) {
  Tape& t = detail::tape_of(a);
  Node n = detail::make_node(OpKind::add_scalar, t, a.index());
  n.scalar = s;
  n.value = a.value().array() + s;
  return t.push(std::move(n));
}
inline Var operator+(double s, const Var& a) { return a + s; }
inline Var operator-(const Var& a, double s) { return a + (-s); }
inline Var operator-(double s, const Var& a) { return (-a) + s; }

/// s * x for a 1x1 node s.
inline Var scale_by(const Var& s, const Var& x) {
  Tape& t = detail::same_tape(s, x);
  if (s.rows() != 1 || s.cols() != 1) throw Error(Errc::shape_error, "scale_by: s must be 1x1");
  Node n = detail::make_node(OpKind::scale_by, t, s.index(), x.index());
  n.value = s.value()(0, 0) * x.value();
  return t.push(std::move(n));
}

/// diag(v) * x for a column vector v.
inline Var scale_rows(const Var& x, const Var& v) {
  Tape& t = detail::same_tape(x, v);
  if (v.cols() != 1 || v.rows() != x.rows())
    throw Error(Errc::shape_error, "scale_rows: vector length must match rows");
  Node n = detail::make_node(OpKind::scale_rows, t, x.index(), v.index());
  n.value = v.value().asDiagonal() * x.value();
  return t.push(std::move(n));
}

/// Adds column vector b to the first `ncols` columns of x (the value block of
/// a jet bundle; derivative blocks see no bias).
inline Var add_bias(const Var& x, const Var& b, Eigen::Index ncols) {
  Tape& t = detail::same_tape(x, b);
  if (b.cols() != 1 || b.rows() != x.rows() || ncols > x.cols())
    throw Error(Errc::shape_error, "add_bias: bias shape");
  Node n = detail::make_node(OpKind::add_bias, t, x.index(), b.index());
  n.r0 = ncols;
  n.value = x.value();
  n.value.leftCols(ncols).colwise() += b.value().col(0);
  return t.push(std::move(n));
}

inline Var unary(UnaryFn fn, const Var& x) {
  Tape& t = detail::tape_of(x);
  Node n = detail::make_node(OpKind::unary, t, x.index());
  n.fn = fn;
  detail::unary_value(fn, x.value(), n.value, n.aux);
  return t.push(std::move(n));
}
inline Var tanh(const Var& x) { return unary(UnaryFn::tanh, x); }
inline Var sin(const Var& x) { return unary(UnaryFn::sin, x); }
inline Var cos(const Var& x) { return unary(UnaryFn::cos, x); }
inline Var exp(const Var& x) { return unary(UnaryFn::exp, x); }

inline Var square(const Var& x) {
  Tape& t = detail::tape_of(x);
  Node n = detail::make_node(OpKind::square, t, x.index());
  n.value = x.value().array().square();
  return t.push(std::move(n));
}

/// Sum of all entries, 1x1.
inline Var sum(const Var& x) {
  Tape& t = detail::tape_of(x);
  Node n = detail::make_node(OpKind::sum, t, x.index());
  n.value = Matrix::Constant(1, 1, x.value().sum());
  return t.push(std::move(n));
}

inline Var mean(const Var& x) { return (1.0 / static_cast<double>(x.value().size())) * sum(x); }

/// sum(x .* weights) for constant weights, 1x1.
inline Var dot(const Var& x, Matrix weights) {
  Tape& t = detail::tape_of(x);
  if (weights.rows() != x.rows() || weights.cols() != x.cols())
    throw Error(Errc::shape_error, "dot: weight shape mismatch");
  Node n = detail::make_node(OpKind::dot, t, x.index());
  n.value = Matrix::Constant(1, 1, x.value().cwiseProduct(weights).sum());
  n.aux = std::move(weights);
  return t.push(std::move(n));
}

inline Var vstack(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(Errc::shape_error, "vstack of nothing");
  Tape& t = detail::tape_of(parts.front());
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  Node n;
  n.kind = OpKind::vstack;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw Error(Errc::invalid_node, "vstack across tapes");
    if (p.cols() != cols) throw Error(Errc::shape_error, "vstack: column mismatch");
    rows += p.rows();
    n.inputs.push_back(p.index());
    n.active = n.active || t.active(p.index());
  }
  n.value.resize(rows, cols);
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    n.value.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return t.push(std::move(n));
}

inline Var block(const Var& x, Eigen::Index r0, Eigen::Index c0, Eigen::Index rows,
                 Eigen::Index cols) {
  Tape& t = detail::tape_of(x);
  if (r0 < 0 || c0 < 0 || r0 + rows > x.rows() || c0 + cols > x.cols())
    throw Error(Errc::shape_error, "block out of range");
  Node n = detail::make_node(OpKind::block, t, x.index());
  n.r0 = r0;
  n.c0 = c0;
  n.value = x.value().block(r0, c0, rows, cols);
  return t.push(std::move(n));
}

/// Value passes through; the reverse sweep sees a constant.
inline Var stop_gradient(const Var& x) { return detail::tape_of(x).constant(x.value()); }
inline double stop_gradient(double x) { return x; }

// ---------------------------------------------------------------------------
// Fused jet-bundle primitives

/// f applied to every entry of a jet bundle, coefficients propagated by
/// Taylor composition.
inline Var jet_unary(UnaryFn fn, const Var& z, std::shared_ptr<const JetLayout> layout) {
  Tape& t = detail::tape_of(z);
  if (z.cols() != layout->cols()) throw Error(Errc::shape_error, "jet_unary: layout mismatch");
  const int kmax = layout->max_order();
  const Eigen::Index m = z.rows();
  const Eigen::Index e = m * layout->batch;
  Node n = detail::make_node(OpKind::jet_unary, t, z.index());
  n.fn = fn;
  n.value.resize(m, z.cols());

  const double* zd = z.value().data();
  std::vector<Eigen::ArrayXd> f;
  // One extra order is cached for the reverse sweep.
  detail::derivative_series(fn, detail::ConstArrayMap(zd, e), kmax + 1, f);
  detail::ArrayMap(n.value.data(), e) = f[0];

  std::vector<detail::ConstArrayMap> zk;
  for (int d = 0; d < layout->directions(); ++d) {
    const int kd = layout->orders[static_cast<std::size_t>(d)];
    zk.clear();
    for (int k = 0; k <= kd; ++k) zk.emplace_back(zd + layout->block(d, k) * e, e);
    for (int k = 1; k <= kd; ++k)
      detail::ArrayMap(n.value.data() + layout->block(d, k) * e, e) =
          detail::compose_coeff(f.data(), zk.data(), k);
  }
  if (t.active(z.index())) {
    n.aux.resize(e, kmax + 1);
    for (int k = 1; k <= kmax + 1; ++k) n.aux.col(k - 1) = f[static_cast<std::size_t>(k)].matrix();
  }
  n.layout = std::move(layout);
  return t.push(std::move(n));
}

/// Truncated product of two jet bundles with identical layout.
inline Var jet_mul(const Var& a, const Var& b, std::shared_ptr<const JetLayout> layout) {
  Tape& t = detail::same_tape(a, b);
  detail::require_same_shape(a, b, "jet_mul");
  if (a.cols() != layout->cols()) throw Error(Errc::shape_error, "jet_mul: layout mismatch");
  const Eigen::Index e = a.rows() * layout->batch;
  Node n = detail::make_node(OpKind::jet_mul, t, a.index(), b.index());
  n.value.resize(a.rows(), a.cols());
  const double* ad = a.value().data();
  const double* bd = b.value().data();
  double* out = n.value.data();
  using detail::ArrayMap;
  using detail::ConstArrayMap;
  ArrayMap(out, e) = ConstArrayMap(ad, e) * ConstArrayMap(bd, e);
  for (int d = 0; d < layout->directions(); ++d) {
    const int kd = layout->orders[static_cast<std::size_t>(d)];
    for (int k = 1; k <= kd; ++k) {
      ArrayMap c(out + layout->block(d, k) * e, e);
      c.setZero();
      for (int j = 0; j <= k; ++j)
        c += ConstArrayMap(ad + layout->block(d, j) * e, e) *
             ConstArrayMap(bd + layout->block(d, k - j) * e, e);
    }
  }
  n.layout = std::move(layout);
  return t.push(std::move(n));
}

// ---------------------------------------------------------------------------
// Reverse sweep

inline void Tape::backward(Var out, const Matrix& seed) {
  if (out.tape() != this || out.index() < 0 || static_cast<std::size_t>(out.index()) >= nodes_.size())
    throw Error(Errc::invalid_node, "backward from a node not on this tape");
  const Node& o = nodes_[static_cast<std::size_t>(out.index())];
  if (seed.rows() != o.value.rows() || seed.cols() != o.value.cols())
    throw Error(Errc::shape_error, "seed shape differs from output");
  adj_.assign(nodes_.size(), Matrix());
  if (!o.active) return;
  adj_[static_cast<std::size_t>(out.index())] = seed;
  for (int i = out.index(); i >= 0; --i) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.kind == OpKind::leaf || adj_[static_cast<std::size_t>(i)].size() == 0) continue;
    // Parameter leaves keep their adjoint; interior adjoints are released.
    Matrix g = std::move(adj_[static_cast<std::size_t>(i)]);
    backward_node(n, g);
    adj_[static_cast<std::size_t>(i)] = Matrix();
  }
}

inline void Tape::backward_node(const Node& n, const Matrix& g) {
  auto val = [this](int i) -> const Matrix& { return nodes_[static_cast<std::size_t>(i)].value; };
  switch (n.kind) {
    case OpKind::leaf:
      break;
    case OpKind::matmul:
      if (active(n.lhs)) accumulate_expr(n.lhs, g * val(n.rhs).transpose());
      if (active(n.rhs)) accumulate_expr(n.rhs, val(n.lhs).transpose() * g);
      break;
    case OpKind::add:
      accumulate(n.lhs, g);
      accumulate(n.rhs, g);
      break;
    case OpKind::sub:
      accumulate(n.lhs, g);
      if (active(n.rhs)) accumulate_expr(n.rhs, -g);
      break;
    case OpKind::mul:
      if (active(n.lhs)) accumulate_expr(n.lhs, g.cwiseProduct(val(n.rhs)));
      if (active(n.rhs)) accumulate_expr(n.rhs, g.cwiseProduct(val(n.lhs)));
      break;
    case OpKind::neg:
      if (active(n.lhs)) accumulate_expr(n.lhs, -g);
      break;
    case OpKind::scale:
      if (active(n.lhs)) accumulate_expr(n.lhs, n.scalar * g);
      break;
    case OpKind::add_scalar:
      accumulate(n.lhs, g);
      break;
    case OpKind::scale_by: {
      const double s = val(n.lhs)(0, 0);
      if (active(n.lhs))
        accumulate(n.lhs, Matrix::Constant(1, 1, g.cwiseProduct(val(n.rhs)).sum()));
      if (active(n.rhs)) accumulate_expr(n.rhs, s * g);
      break;
    }
    case OpKind::scale_rows:
      if (active(n.lhs)) accumulate_expr(n.lhs, val(n.rhs).asDiagonal() * g);
      if (active(n.rhs)) accumulate_expr(n.rhs, g.cwiseProduct(val(n.lhs)).rowwise().sum());
      break;
    case OpKind::add_bias:
      accumulate(n.lhs, g);
      if (active(n.rhs)) accumulate_expr(n.rhs, g.leftCols(n.r0).rowwise().sum());
      break;
    case OpKind::unary:
      if (active(n.lhs)) accumulate_expr(n.lhs, g.cwiseProduct(n.aux));
      break;
    case OpKind::square:
      if (active(n.lhs)) accumulate_expr(n.lhs, 2.0 * g.cwiseProduct(val(n.lhs)));
      break;
    case OpKind::sum:
      if (active(n.lhs))
        accumulate(n.lhs, Matrix::Constant(val(n.lhs).rows(), val(n.lhs).cols(), g(0, 0)));
      break;
    case OpKind::dot:
      if (active(n.lhs)) accumulate_expr(n.lhs, g(0, 0) * n.aux);
      break;
    case OpKind::vstack: {
      Eigen::Index r = 0;
      for (int in : n.inputs) {
        const Eigen::Index rows = val(in).rows();
        if (active(in)) accumulate_expr(in, g.middleRows(r, rows));
        r += rows;
      }
      break;
    }
    case OpKind::block:
      if (active(n.lhs)) {
        Matrix& a = adj_[static_cast<std::size_t>(n.lhs)];
        if (a.size() == 0) a = Matrix::Zero(val(n.lhs).rows(), val(n.lhs).cols());
        a.block(n.r0, n.c0, g.rows(), g.cols()) += g;
      }
      break;
    case OpKind::jet_unary:
      if (active(n.lhs)) backward_jet_unary(n, g);
      break;
    case OpKind::jet_mul:
      backward_jet_mul(n, g);
      break;
  }
}

// dy_k/dz_j = [f'(z)]_{k-j} for j >= 1, and dy_k/dz_0 = [f'(z)]_k, where
// [f'(z)]_m is coefficient m of the composed jet f'(z(t)).
inline void Tape::backward_jet_unary(const Node& n, const Matrix& g) {
  using detail::ArrayMap;
  using detail::ConstArrayMap;
  const JetLayout& L = *n.layout;
  const Node& in = nodes_[static_cast<std::size_t>(n.lhs)];
  const Eigen::Index e = in.value.rows() * L.batch;
  const double* zd = in.value.data();
  const double* gd = g.data();
  const int kmax = L.max_order();

  // sh[j] = f^(j+1)(z0): the derivative series of f'.
  std::vector<ConstArrayMap> sh;
  for (int k = 1; k <= kmax + 1; ++k) sh.emplace_back(n.aux.data() + (k - 1) * e, e);

  Matrix dz(in.value.rows(), in.value.cols());
  double* dd = dz.data();
  ArrayMap dz0(dd, e);
  dz0 = ConstArrayMap(gd, e) * sh[0];

  std::vector<ConstArrayMap> zk;
  std::vector<Eigen::ArrayXd> dser;  // coefficients of f'(z(t)) along d
  for (int dir = 0; dir < L.directions(); ++dir) {
    const int kd = L.orders[static_cast<std::size_t>(dir)];
    zk.clear();
    for (int k = 0; k <= kd; ++k) zk.emplace_back(zd + L.block(dir, k) * e, e);
    dser.clear();
    dser.emplace_back(sh[0]);
    for (int m = 1; m <= kd; ++m) dser.push_back(detail::compose_coeff(sh.data(), zk.data(), m));
    for (int k = 1; k <= kd; ++k) dz0 += ConstArrayMap(gd + L.block(dir, k) * e, e) * dser[static_cast<std::size_t>(k)];
    for (int j = 1; j <= kd; ++j) {
      ArrayMap dzj(dd + L.block(dir, j) * e, e);
      dzj.setZero();
      for (int k = j; k <= kd; ++k)
        dzj += ConstArrayMap(gd + L.block(dir, k) * e, e) * dser[static_cast<std::size_t>(k - j)];
    }
  }
  accumulate(n.lhs, dz);
}

inline void Tape::backward_jet_mul(const Node& n, const Matrix& g) {
  using detail::ArrayMap;
  using detail::ConstArrayMap;
  const JetLayout& L = *n.layout;
  const Matrix& av = nodes_[static_cast<std::size_t>(n.lhs)].value;
  const Matrix& bv = nodes_[static_cast<std::size_t>(n.rhs)].value;
  const Eigen::Index e = av.rows() * L.batch;
  const double* gd = g.data();

  auto partial = [&](const Matrix& other) {
    Matrix d(other.rows(), other.cols());
    const double* od = other.data();
    double* dd = d.data();
    ArrayMap d0(dd, e);
    d0 = ConstArrayMap(gd, e) * ConstArrayMap(od, e);
    for (int dir = 0; dir < L.directions(); ++dir) {
      const int kd = L.orders[static_cast<std::size_t>(dir)];
      for (int k = 1; k <= kd; ++k)
        d0 += ConstArrayMap(gd + L.block(dir, k) * e, e) * ConstArrayMap(od + L.block(dir, k) * e, e);
      for (int j = 1; j <= kd; ++j) {
        ArrayMap dj(dd + L.block(dir, j) * e, e);
        dj.setZero();
        for (int k = j; k <= kd; ++k)
          dj += ConstArrayMap(gd + L.block(dir, k) * e, e) *
                ConstArrayMap(od + L.block(dir, k - j) * e, e);
      }
    }
    return d;
  };
  if (active(n.lhs)) accumulate(n.lhs, partial(bv));
  if (active(n.rhs)) accumulate(n.rhs, partial(av));
}

// ---------------------------------------------------------------------------

/// Reverse-mode gradient of a recorded 1x1 node with respect to every
/// parameter leaf on the tape, laid out like the bound parameters.
inline ParamVector loss_grad(Tape& tape, Var loss) {
  if (loss.tape() != &tape || loss.index() < 0 || static_cast<std::size_t>(loss.index()) >= tape.size())
    throw Error(Errc::invalid_node, "loss index is not a node of this tape");
  const Matrix& v = tape.node(loss.index()).value;
  if (v.rows() != 1 || v.cols() != 1)
    throw Error(Errc::invalid_node, "loss node is not a scalar");
  if (!tape.layout()) throw Error(Errc::invalid_node, "tape has no parameter leaves");
  tape.backward(loss, Matrix::Ones(1, 1));
  return ParamVector(tape.layout(), tape.parameter_gradient());
}

}  // namespace pinnkit::ad

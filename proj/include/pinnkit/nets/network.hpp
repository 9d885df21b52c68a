// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Coordinate networks: plain and modified MLPs with optional periodic and
// random Fourier feature embeddings and random weight factorization.
//
// Parameter segments are named "<layer>.<tensor>":
//   enc_u.{W,b}, enc_v.{W,b}        modified-MLP encoders
//   hidden<l>.{W,b} | {s,V,b}        hidden layers, l = 0..depth-1
//   output.{W,b}    | {s,V,b}        final affine layer
//   embed.log_period<a>              trainable period of input axis a
// With factorization enabled every W is replaced by the pair (s, V).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "pinnkit/autodiff/jet.hpp"
#include "pinnkit/autodiff/param_vector.hpp"
#include "pinnkit/autodiff/tape.hpp"
#include "pinnkit/error.hpp"
#include "pinnkit/nets/config.hpp"

namespace pinnkit::nets {

using ad::Matrix;
using ad::ParamVector;
using ad::Var;

/// Segment indices of one affine layer.
struct DenseSlots {
  int W = -1;
  int s = -1;
  int V = -1;
  int b = -1;
  std::string name;
};

/// Architecture, fixed Fourier matrix and initial parameters. Immutable
/// after construction; trained parameters live in a separate ParamVector
/// with the same layout.
struct Network {
  NetworkConfig config;
  ParamVector params;
  Matrix fourier_B;  // features x periodic_dim; empty without Fourier features
  bool factorized = false;
  DenseSlots enc_u;
  DenseSlots enc_v;
  std::vector<DenseSlots> hidden;
  DenseSlots output;
  std::vector<int> log_period;  // per input axis, -1 when not trainable

  std::vector<const DenseSlots*> dense_layers() const {
    std::vector<const DenseSlots*> out;
    if (config.arch == Arch::modified) {
      out.push_back(&enc_u);
      out.push_back(&enc_v);
    }
    for (const auto& h : hidden) out.push_back(&h);
    out.push_back(&output);
    return out;
  }
};

namespace detail {

inline void resolve_slots(Network& net) {
  const auto& L = net.params.layout();
  auto slot = [&](const std::string& n) {
    auto i = L.find(n);
    return i ? static_cast<int>(*i) : -1;
  };
  auto fill = [&](DenseSlots& d) {
    d.W = slot(d.name + ".W");
    d.s = slot(d.name + ".s");
    d.V = slot(d.name + ".V");
    d.b = slot(d.name + ".b");
  };
  net.enc_u.name = "enc_u";
  net.enc_v.name = "enc_v";
  fill(net.enc_u);
  fill(net.enc_v);
  net.hidden.resize(static_cast<std::size_t>(net.config.depth));
  for (int l = 0; l < net.config.depth; ++l) {
    net.hidden[static_cast<std::size_t>(l)].name = "hidden" + std::to_string(l);
    fill(net.hidden[static_cast<std::size_t>(l)]);
  }
  net.output.name = "output";
  fill(net.output);
  net.log_period.assign(static_cast<std::size_t>(net.config.input_dim), -1);
  for (int a = 0; a < net.config.input_dim; ++a)
    net.log_period[static_cast<std::size_t>(a)] = slot("embed.log_period" + std::to_string(a));
}

struct LayerShape {
  std::string name;
  int in = 0;
  int out = 0;
};

inline std::vector<LayerShape> layer_shapes(const NetworkConfig& c) {
  std::vector<LayerShape> shapes;
  const int e = c.embedding_dim();
  if (c.arch == Arch::modified) {
    shapes.push_back({"enc_u", e, c.width});
    shapes.push_back({"enc_v", e, c.width});
  }
  for (int l = 0; l < c.depth; ++l) shapes.push_back({"hidden" + std::to_string(l), l == 0 ? e : c.width, c.width});
  shapes.push_back({"output", c.width, c.output_dim});
  return shapes;
}

}  // namespace detail

/// Glorot-normal weights (variance 2 / (fan_in + fan_out)), zero biases,
/// N(0, sigma^2) Fourier matrix, trainable periods at their configured
/// initial value. Factorization is not applied; see apply_rwf.
inline Network init_glorot(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Network net;
  net.config = config;
  auto layout = std::make_shared<ad::ParamLayout>();
  const auto shapes = detail::layer_shapes(config);
  for (const auto& s : shapes) {
    layout->add(s.name + ".W", s.out, s.in);
    layout->add(s.name + ".b", s.out, 1);
  }
  for (const auto& p : config.periodic)
    if (p.trainable) layout->add("embed.log_period" + std::to_string(p.axis), 1, 1);
  net.params = ParamVector(layout);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& s : shapes) {
    const double stddev = std::sqrt(2.0 / static_cast<double>(s.in + s.out));
    auto W = net.params.view(s.name + ".W");
    for (Eigen::Index j = 0; j < W.cols(); ++j)
      for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = stddev * normal(rng);
  }
  for (const auto& p : config.periodic)
    if (p.trainable) net.params.view("embed.log_period" + std::to_string(p.axis))(0, 0) = std::log(p.period);

  if (config.fourier) {
    // Separate stream so B does not depend on the layer sizes.
    std::mt19937_64 brng(seed ^ 0x9e3779b97f4a7c15ULL);
    net.fourier_B.resize(config.fourier->features, config.periodic_dim());
    for (Eigen::Index j = 0; j < net.fourier_B.cols(); ++j)
      for (Eigen::Index i = 0; i < net.fourier_B.rows(); ++i)
        net.fourier_B(i, j) = config.fourier->sigma * normal(brng);
  }
  detail::resolve_slots(net);
  return net;
}

/// Replaces every weight matrix W by (s, V) with s ~ N(mean, stddev^2) per
/// output neuron and V = diag(exp(-s)) W, so diag(exp(s)) V reproduces W.
inline Network apply_rwf(const Network& net, double mean, double stddev, std::uint64_t seed) {
  if (net.factorized) throw Error(Errc::already_factorized, "network is already factorized");
  Network out = net;
  out.config.rwf = RwfConfig{mean, stddev};
  auto layout = std::make_shared<ad::ParamLayout>();
  const auto& old = net.params.layout();
  for (const auto& seg : old.segments()) {
    const auto dot = seg.name.rfind('.');
    if (seg.name.substr(dot + 1) == "W") {
      const std::string base = seg.name.substr(0, dot);
      layout->add(base + ".s", seg.rows, 1);
      layout->add(base + ".V", seg.rows, seg.cols);
    } else {
      layout->add(seg.name, seg.rows, seg.cols);
    }
  }
  out.params = ParamVector(layout);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (const auto& seg : old.segments()) {
    const auto dot = seg.name.rfind('.');
    const std::string base = seg.name.substr(0, dot);
    if (seg.name.substr(dot + 1) == "W") {
      auto W = net.params.view(seg.name);
      auto s = out.params.view(base + ".s");
      for (Eigen::Index i = 0; i < s.rows(); ++i) s(i, 0) = mean + stddev * normal(rng);
      out.params.view(base + ".V") = (-s.col(0).array()).exp().matrix().asDiagonal() * W;
    } else {
      out.params.view(seg.name) = net.params.view(seg.name);
    }
  }
  out.factorized = true;
  detail::resolve_slots(out);
  return out;
}

/// init_glorot followed by apply_rwf when the config requests it.
inline Network make_network(const NetworkConfig& config, std::uint64_t seed) {
  Network net = init_glorot(config, seed);
  if (config.rwf) net = apply_rwf(net, config.rwf->mean, config.rwf->stddev, seed + 1);
  return net;
}

/// Effective weight of a layer, diag(exp(s)) V when factorized.
inline Matrix effective_weight(const ParamVector& params, const DenseSlots& d) {
  if (d.W >= 0) return params.view(static_cast<std::size_t>(d.W));
  return params.view(static_cast<std::size_t>(d.s)).col(0).array().exp().matrix().asDiagonal() *
         params.view(static_cast<std::size_t>(d.V));
}

// ---------------------------------------------------------------------------
// Embeddings (plain-value versions)

/// [cos(Bx); sin(Bx)].
inline Eigen::VectorXd embed_fourier(const Eigen::VectorXd& x, const Matrix& B) {
  if (B.cols() != x.size()) throw Error(Errc::shape_error, "B column count differs from input length");
  const Eigen::VectorXd z = B * x;
  Eigen::VectorXd out(2 * z.size());
  out << z.array().cos().matrix(), z.array().sin().matrix();
  return out;
}

/// Maps each axis with a period P to (cos(2 pi x / P), sin(2 pi x / P));
/// axes with no period pass through unchanged.
inline Eigen::VectorXd embed_periodic(const Eigen::VectorXd& coords,
                                      const std::vector<std::optional<double>>& periods) {
  if (periods.size() != static_cast<std::size_t>(coords.size()))
    throw Error(Errc::shape_error, "one period entry per coordinate expected");
  std::vector<double> out;
  for (Eigen::Index a = 0; a < coords.size(); ++a) {
    const auto& p = periods[static_cast<std::size_t>(a)];
    if (!p) {
      out.push_back(coords(a));
      continue;
    }
    if (!(*p > 0.0)) throw Error(Errc::invalid_period, "period must be positive");
    const double w = 2.0 * std::numbers::pi / *p;
    out.push_back(std::cos(w * coords(a)));
    out.push_back(std::sin(w * coords(a)));
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

// ---------------------------------------------------------------------------
// Recorded forward pass

/// Lazily creates one tape leaf per parameter segment.
class ParamBinding {
 public:
  ParamBinding(ad::Tape& tape, const ParamVector& params, bool trainable = true)
      : tape_(tape), params_(params), trainable_(trainable), leaves_(params.layout().count()) {}

  Var operator()(int segment) {
    auto& v = leaves_[static_cast<std::size_t>(segment)];
    if (!v.valid()) {
      v = trainable_ ? tape_.parameter(params_, static_cast<std::size_t>(segment))
                     : tape_.constant(Matrix(params_.view(static_cast<std::size_t>(segment))));
    }
    return v;
  }

  ad::Tape& tape() { return tape_; }

 private:
  ad::Tape& tape_;
  const ParamVector& params_;
  bool trainable_;
  std::vector<Var> leaves_;
};

/// Where jets are seeded: direction d differentiates along input axis axes[d].
struct JetRequest {
  std::vector<int> axes;
  std::vector<int> orders;
};

namespace detail {

inline void check_finite(const Var& v, const std::string& where) {
  if (!v.value().allFinite())
    throw Error(Errc::numerical_overflow, "non-finite value in layer " + where);
}

inline Var dense(ParamBinding& bind, const DenseSlots& d, const Var& h,
                 Eigen::Index batch) {
  Var W = d.W >= 0 ? bind(d.W) : ad::scale_rows(bind(d.V), ad::exp(bind(d.s)));
  return ad::add_bias(ad::matmul(W, h), bind(d.b), batch);
}

}  // namespace detail

/// Records the network on a batch of coordinates (input_dim x batch) and
/// returns the output jet bundle (output_dim x layout->cols()).
inline Var forward_jets(const Network& net, ParamBinding& bind, const Matrix& coords,
                        const JetRequest& request, std::shared_ptr<const ad::JetLayout>* layout_out = nullptr) {
  const auto& c = net.config;
  if (coords.rows() != c.input_dim)
    throw Error(Errc::shape_error, "coordinate rows differ from network input_dim");
  if (request.axes.size() != request.orders.size())
    throw Error(Errc::shape_error, "jet request axes/orders length mismatch");
  for (std::size_t d = 0; d < request.axes.size(); ++d) {
    if (request.axes[d] < 0 || request.axes[d] >= c.input_dim)
      throw Error(Errc::shape_error, "jet direction is not a network input");
    if (!ad::supported_order(request.orders[d]) && request.orders[d] != 3)
      throw Error(Errc::invalid_argument, "jet order must be one of 0, 1, 2, 4");
  }
  ad::Tape& tape = bind.tape();
  const Eigen::Index n = coords.cols();
  auto layout = std::make_shared<ad::JetLayout>();
  layout->batch = n;
  for (std::size_t d = 0; d < request.orders.size(); ++d)
    if (request.orders[d] > 0) layout->orders.push_back(request.orders[d]);
  std::vector<int> dir_axes;
  for (std::size_t d = 0; d < request.orders.size(); ++d)
    if (request.orders[d] > 0) dir_axes.push_back(request.axes[d]);
  std::shared_ptr<const ad::JetLayout> L = layout;
  if (layout_out) *layout_out = L;
  const Eigen::Index C = L->cols();

  // Periodic stage.
  std::vector<Var> rows;
  for (int a = 0; a < c.input_dim; ++a) {
    Matrix x = Matrix::Zero(1, C);
    x.leftCols(n) = coords.row(a);
    for (int d = 0; d < L->directions(); ++d)
      if (dir_axes[static_cast<std::size_t>(d)] == a) x.middleCols(L->block(d, 1) * n, n).setOnes();
    Var xv = tape.constant(std::move(x));
    const PeriodicAxis* p = c.periodic_axis(a);
    if (!p) {
      rows.push_back(xv);
      continue;
    }
    Var arg;
    const int lp = net.log_period[static_cast<std::size_t>(a)];
    if (lp >= 0) {
      Var omega = (2.0 * std::numbers::pi) * ad::exp(-bind(lp));
      arg = ad::scale_by(omega, xv);
    } else {
      arg = (2.0 * std::numbers::pi / p->period) * xv;
    }
    rows.push_back(ad::jet_unary(ad::UnaryFn::cos, arg, L));
    rows.push_back(ad::jet_unary(ad::UnaryFn::sin, arg, L));
  }
  Var h = rows.size() == 1 ? rows.front() : ad::vstack(rows);

  if (c.fourier) {
    Var z = ad::matmul(tape.constant(net.fourier_B), h);
    h = ad::vstack({ad::jet_unary(ad::UnaryFn::cos, z, L), ad::jet_unary(ad::UnaryFn::sin, z, L)});
  }
  detail::check_finite(h, "embedding");

  const ad::UnaryFn act = to_unary(c.activation);
  if (c.arch == Arch::plain) {
    for (const auto& layer : net.hidden) {
      h = ad::jet_unary(act, detail::dense(bind, layer, h, n), L);
      detail::check_finite(h, layer.name);
    }
  } else {
    Var U = ad::jet_unary(act, detail::dense(bind, net.enc_u, h, n), L);
    Var V = ad::jet_unary(act, detail::dense(bind, net.enc_v, h, n), L);
    detail::check_finite(U, "enc_u");
    detail::check_finite(V, "enc_v");
    Var diff = U - V;
    for (const auto& layer : net.hidden) {
      Var gate = ad::jet_unary(act, detail::dense(bind, layer, h, n), L);
      h = V + ad::jet_mul(gate, diff, L);
      detail::check_finite(h, layer.name);
    }
  }
  Var out = detail::dense(bind, net.output, h, n);
  detail::check_finite(out, "output");
  return out;
}

/// Plain forward pass on a batch of coordinates (input_dim x batch).
inline Matrix forward(const Network& net, const ParamVector& params, const Matrix& coords) {
  ad::Tape tape;
  ParamBinding bind(tape, params, false);
  return forward_jets(net, bind, coords, JetRequest{}).value();
}

inline Matrix forward(const Network& net, const Matrix& coords) { return forward(net, net.params, coords); }

/// Taylor jet of output 0 along input axis `direction` at `point`;
/// coefficient j equals d^j u / dx^j / j!.
inline ad::Jet<double> jet_eval(const Network& net, const ParamVector& params,
                                const Eigen::VectorXd& point, int direction, int order) {
  if (!ad::supported_order(order)) throw Error(Errc::invalid_argument, "jet order must be one of 0, 1, 2, 4");
  ad::Tape tape;
  ParamBinding bind(tape, params, false);
  Matrix coords = point;
  const Matrix out = forward_jets(net, bind, coords, JetRequest{{direction}, {order}}).value();
  std::vector<double> c(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) c[static_cast<std::size_t>(k)] = out(0, k);
  return ad::Jet<double>(std::move(c));
}

}  // namespace pinnkit::nets

// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Adaptive loss weights: causal temporal weights over M time chunks and
// global term weights balanced by gradient norms or NTK traces, smoothed
// by an exponential moving average.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "pinnkit/autodiff/tape.hpp"
#include "pinnkit/error.hpp"

namespace pinnkit::weighting {

enum class Scheme { none, grad_norm, ntk };

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::none: return "none";
    case Scheme::grad_norm: return "grad_norm";
    case Scheme::ntk: return "ntk";
  }
  return "none";
}

/// One value per loss term. Also used for norms and traces.
struct TermValues {
  double ic = 1.0;
  double bc = 1.0;
  double r = 1.0;

  bool operator==(const TermValues&) const = default;
};

struct LossWeights {
  double lambda_ic = 1.0;
  double lambda_bc = 1.0;
  double lambda_r = 1.0;
  std::vector<double> w{1.0};  // temporal weights, w[0] == 1
  double eps = 1.0;            // causal tolerance
  double alpha = 0.9;          // moving-average factor
  int f = 1000;                // global update period in iterations

  int M() const { return static_cast<int>(w.size()); }
  TermValues lambdas() const { return {lambda_ic, lambda_bc, lambda_r}; }
  void set_lambdas(const TermValues& l) {
    lambda_ic = l.ic;
    lambda_bc = l.bc;
    lambda_r = l.r;
  }
  /// Fresh weights for M chunks: every lambda and every w equal to 1.
  static LossWeights initial(int M, double eps = 1.0, double alpha = 0.9, int f = 1000) {
    LossWeights lw;
    lw.w.assign(static_cast<std::size_t>(M), 1.0);
    lw.eps = eps;
    lw.alpha = alpha;
    lw.f = f;
    return lw;
  }
};

struct LossBreakdown {
  double L_ic = 0.0;
  double L_bc = 0.0;
  std::vector<double> L_r_chunks;
  double L_r = 0.0;  // (1/M) sum_i w_i L_r_chunks[i]
};

/// (1/M) sum_i w_i L_i.
inline double weighted_residual(const std::vector<double>& chunk_losses, const std::vector<double>& w) {
  if (chunk_losses.size() != w.size() || w.empty())
    throw Error(Errc::shape_error, "chunk losses and temporal weights differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * chunk_losses[i];
  return s / static_cast<double>(w.size());
}

/// w_1 = 1, w_i = exp(-eps * sum_{k<i} L_k).
inline std::vector<double> causal_weights(const std::vector<double>& chunk_losses, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::invalid_argument, "causal tolerance must be positive");
  std::vector<double> w(chunk_losses.size());
  double prefix = 0.0;
  for (std::size_t i = 0; i < chunk_losses.size(); ++i) {
    const double l = chunk_losses[i];
    if (!std::isfinite(l) || l < 0.0)
      throw Error(Errc::invalid_loss, "chunk loss " + std::to_string(i) + " is negative or non-finite");
    w[i] = std::exp(-eps * prefix);
    prefix += l;
  }
  return w;
}

/// lambda_hat_i = (sum_j n_j) / n_i over the given terms.
inline std::vector<double> balance(const std::vector<double>& norms, Errc zero_error) {
  double total = 0.0;
  for (double n : norms) {
    if (!(n > 0.0) || !std::isfinite(n))
      throw Error(zero_error, "a loss term has zero or non-finite magnitude");
    total += n;
  }
  std::vector<double> out;
  out.reserve(norms.size());
  for (double n : norms) out.push_back(total / n);
  return out;
}

inline TermValues grad_norm_lambdas(const TermValues& grad_norms) {
  auto l = balance({grad_norms.ic, grad_norms.bc, grad_norms.r}, Errc::degenerate_gradient);
  return {l[0], l[1], l[2]};
}

inline TermValues ntk_lambdas(const TermValues& traces) {
  auto l = balance({traces.ic, traces.bc, traces.r}, Errc::degenerate_kernel);
  return {l[0], l[1], l[2]};
}

inline double ema_update(double old_value, double new_hat, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw Error(Errc::invalid_argument, "alpha must lie in [0, 1]");
  if (alpha == 1.0) return old_value;
  if (alpha == 0.0) return new_hat;
  return alpha * old_value + (1.0 - alpha) * new_hat;
}

inline TermValues ema_update(const TermValues& old_values, const TermValues& hat, double alpha) {
  return {ema_update(old_values.ic, hat.ic, alpha), ema_update(old_values.bc, hat.bc, alpha),
          ema_update(old_values.r, hat.r, alpha)};
}

/// Threshold below which a term's magnitude is treated as zero and its
/// lambda keeps its previous value.
inline constexpr double kDegenerateNorm = 1e-12;

/// Balancing over the active terms only, tolerant of vanishing terms: a
/// term whose magnitude is below kDegenerateNorm keeps its old lambda and
/// is treated as zero in the sum. Inactive terms (e.g. a boundary term for
/// a problem with hard periodic constraints) are left untouched.
inline TermValues robust_update(const TermValues& old_values, const TermValues& magnitudes,
                                const std::vector<bool>& active, double alpha) {
  const double m[3] = {magnitudes.ic, magnitudes.bc, magnitudes.r};
  double o[3] = {old_values.ic, old_values.bc, old_values.r};
  bool use[3];
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    use[i] = active[static_cast<std::size_t>(i)] && m[i] >= kDegenerateNorm && std::isfinite(m[i]);
    if (use[i]) total += m[i];
  }
  for (int i = 0; i < 3; ++i)
    if (use[i]) o[i] = ema_update(o[i], total / m[i], alpha);
  return {o[0], o[1], o[2]};
}

/// lambda_ic L_ic + lambda_bc L_bc + lambda_r L_r with the weights entering
/// as constants. Any of the term nodes may be invalid (absent).
inline ad::Var total_loss(ad::Tape& tape, const ad::Var& L_ic, const ad::Var& L_bc, const ad::Var& L_r,
                          const LossWeights& weights) {
  ad::Var total;
  auto add = [&](const ad::Var& term, double lambda) {
    if (!term.valid()) return;
    ad::Var t = ad::scale_by(tape.constant(ad::stop_gradient(lambda)), term);
    total = total.valid() ? total + t : t;
  };
  add(L_ic, weights.lambda_ic);
  add(L_bc, weights.lambda_bc);
  add(L_r, weights.lambda_r);
  if (!total.valid()) throw Error(Errc::invalid_node, "total loss has no terms");
  return total;
}

inline double total_loss(const LossBreakdown& b, const LossWeights& weights) {
  return weights.lambda_ic * b.L_ic + weights.lambda_bc * b.L_bc + weights.lambda_r * b.L_r;
}

// ---------------------------------------------------------------------------
// Per-sample gradients and the NTK diagonal

/// Rows of per-sample parameter gradients: row i is d out_i / d theta for a
/// 1 x n output node. One reverse sweep per sample.
inline Eigen::MatrixXd per_sample_gradients(ad::Tape& tape, const ad::Var& outputs) {
  if (outputs.rows() != 1) throw Error(Errc::shape_error, "per-sample outputs must form one row");
  if (!tape.layout()) throw Error(Errc::invalid_node, "tape has no parameter leaves");
  const Eigen::Index n = outputs.cols();
  Eigen::MatrixXd J(n, tape.layout()->size());
  ad::Matrix seed = ad::Matrix::Zero(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    seed(0, i) = 1.0;
    tape.backward(outputs, seed);
    J.row(i) = tape.parameter_gradient().transpose();
    seed(0, i) = 0.0;
  }
  return J;
}

/// sum_i ||d out_i / d theta||^2, the trace of the empirical NTK of the
/// term whose per-sample outputs are recorded in `outputs`.
inline double ntk_trace(ad::Tape& tape, const ad::Var& outputs) {
  if (outputs.cols() == 0) throw Error(Errc::empty_batch, "NTK trace of an empty batch");
  return per_sample_gradients(tape, outputs).rowwise().squaredNorm().sum();
}

}  // namespace pinnkit::weighting

// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// The training loop: per iteration, draw fresh collocation points, update
// the causal weights from the chunk losses, every f iterations rebalance
// the global weights, then take one Adam step on the weighted loss.

#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pinnkit/autodiff/tape.hpp"
#include "pinnkit/error.hpp"
#include "pinnkit/nets/network.hpp"
#include "pinnkit/problems/problem.hpp"
#include "pinnkit/train/adam.hpp"
#include "pinnkit/weighting/weights.hpp"

namespace pinnkit::train {

using ad::Matrix;
using weighting::LossWeights;
using weighting::Scheme;

struct TrainConfig {
  std::int64_t iterations = 1000;
  int n_ic = 128;
  int n_bc = 64;  // per boundary end, loss-term problems only
  int n_r = 512;
  int M = 1;
  bool causal = false;
  double eps = 1.0;
  Scheme scheme = Scheme::none;
  int f = 1000;
  double alpha = 0.9;
  int ntk_samples = 64;  // per term, for NTK-trace weighting
  LrSchedule lr;
  AdamConfig adam;
  int log_every = 100;
  /// Iterations between oracle evaluations inside the metrics stream; 0 = never.
  int eval_every = 0;
};

struct TrainState {
  ParamVector params;
  ParamVector m;
  ParamVector v;
  std::int64_t step = 0;
  LossWeights weights;
  std::mt19937_64 rng;
  LrSchedule lr;

  static TrainState fresh(const ParamVector& params, const TrainConfig& cfg, std::uint64_t seed) {
    TrainState s;
    s.params = params;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    s.weights = LossWeights::initial(cfg.M, cfg.eps, cfg.alpha, cfg.f);
    s.rng.seed(seed);
    s.lr = cfg.lr;
    return s;
  }

  /// Keeps parameters and RNG; clears optimizer moments, the step counter
  /// and all loss weights (new stage of a curriculum).
  void reset_optimizer(const TrainConfig& cfg) {
    m = params.zeros_like();
    v = params.zeros_like();
    step = 0;
    weights = LossWeights::initial(cfg.M, cfg.eps, cfg.alpha, cfg.f);
    lr = cfg.lr;
  }
};

struct MetricsRecord {
  std::int64_t step = 0;
  double L_ic = 0.0;
  double L_bc = 0.0;
  double L_r = 0.0;  // causal-weighted residual loss
  double loss = 0.0;
  double lambda_ic = 1.0;
  double lambda_bc = 1.0;
  double lambda_r = 1.0;
  double w_min = 1.0;
  double w_mean = 1.0;
  double lr = 0.0;
  double wall = 0.0;  // seconds since the start of the window
  std::optional<double> rel_l2;
  std::string tag;    // window / stage label
};

using MetricsSink = std::function<void(const MetricsRecord&)>;
using Evaluator = std::function<double(const ParamVector&)>;

// ---------------------------------------------------------------------------
// Sampling

struct CollocationBatch {
  Matrix coords;            // 2 x n, rows (t, x)
  std::vector<int> chunk;   // chunk label per column
  int M = 1;
  int per_chunk = 0;
};

inline int chunk_of(double t, double T, int M) {
  const int c = static_cast<int>(std::floor(M * t / T));
  return std::clamp(c, 0, M - 1);
}

/// ceil(N_r / M) points uniform inside each of the M time chunks of [0, T],
/// x uniform over the domain.
inline CollocationBatch sample_collocation(std::mt19937_64& rng, const problems::ProblemSpec& p, int n_r, int M) {
  if (M < 1 || n_r < 1) throw Error(Errc::invalid_argument, "need at least one chunk and one point");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CollocationBatch b;
  b.M = M;
  b.per_chunk = (n_r + M - 1) / M;
  const Eigen::Index n = static_cast<Eigen::Index>(b.per_chunk) * M;
  b.coords.resize(2, n);
  b.chunk.resize(static_cast<std::size_t>(n));
  Eigen::Index k = 0;
  for (int c = 0; c < M; ++c) {
    for (int i = 0; i < b.per_chunk; ++i, ++k) {
      double t = p.T * (c + u(rng)) / M;
      while (chunk_of(t, p.T, M) > c) t = std::nextafter(t, 0.0);
      b.coords(0, k) = t;
      b.coords(1, k) = p.x_lo + p.length() * u(rng);
      b.chunk[static_cast<std::size_t>(k)] = c;
    }
  }
  return b;
}

inline std::vector<double> sample_uniform(std::mt19937_64& rng, double lo, double hi, int n) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = u(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Loss assembly

/// Loss terms of one iteration recorded on a tape.
struct RecordedLoss {
  ad::Var ic_rows, bc_rows, r_rows;  // per-sample outputs (1 x n)
  ad::Var L_ic, L_bc, L_r;           // scalar terms; L_r causal-weighted
  weighting::LossBreakdown breakdown;
  std::vector<double> w;
};

/// Records L_ic, L_bc and the chunked, causally weighted L_r. Temporal
/// weights are computed from the chunk losses of this very batch and enter
/// as constants.
inline RecordedLoss record_loss(const nets::Network& net, nets::ParamBinding& bind, const problems::ProblemSpec& p,
                                const CollocationBatch& batch, const std::vector<double>& ic_xs,
                                const std::vector<double>& bc_ts, bool causal, double eps) {
  RecordedLoss R;
  R.ic_rows = problems::ic_mismatch(net, bind, ic_xs, p.ic);
  R.L_ic = ad::mean(ad::square(R.ic_rows));
  R.breakdown.L_ic = R.L_ic.scalar();
  if (p.bc == problems::BcKind::loss_term) {
    R.bc_rows = problems::bc_mismatch(net, bind, p, bc_ts);
    R.L_bc = ad::mean(ad::square(R.bc_rows));
    R.breakdown.L_bc = R.L_bc.scalar();
  }
  R.r_rows = problems::residual_values(net, bind, p, batch.coords);
  ad::Var sq = ad::square(R.r_rows);
  const Matrix& r2 = sq.value();
  const int M = batch.M;
  std::vector<double> sums(static_cast<std::size_t>(M), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(M), 0);
  for (Eigen::Index i = 0; i < r2.cols(); ++i) {
    const auto c = static_cast<std::size_t>(batch.chunk[static_cast<std::size_t>(i)]);
    sums[c] += r2(0, i);
    counts[c] += 1;
  }
  R.breakdown.L_r_chunks.resize(static_cast<std::size_t>(M));
  for (std::size_t c = 0; c < sums.size(); ++c)
    R.breakdown.L_r_chunks[c] = counts[c] ? sums[c] / counts[c] : 0.0;
  R.w = causal ? weighting::causal_weights(R.breakdown.L_r_chunks, eps)
               : std::vector<double>(static_cast<std::size_t>(M), 1.0);
  Matrix pw(1, r2.cols());
  for (Eigen::Index i = 0; i < r2.cols(); ++i) {
    const auto c = static_cast<std::size_t>(batch.chunk[static_cast<std::size_t>(i)]);
    pw(0, i) = R.w[c] / (static_cast<double>(M) * counts[c]);
  }
  R.L_r = ad::dot(sq, std::move(pw));
  R.breakdown.L_r = R.L_r.scalar();
  return R;
}

namespace detail {

inline double grad_norm(ad::Tape& tape, const ad::Var& term) {
  tape.backward(term, Matrix::Ones(1, 1));
  return tape.parameter_gradient().norm();
}

/// Mean diagonal NTK entry over the first `limit` samples of a term.
inline double mean_ntk_diag(ad::Tape& tape, const ad::Var& rows, int limit) {
  const Eigen::Index n = std::min<Eigen::Index>(rows.cols(), limit);
  if (n == 0) return 0.0;
  Matrix seed = Matrix::Zero(1, rows.cols());
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    seed(0, i) = 1.0;
    tape.backward(rows, seed);
    s += tape.parameter_gradient().squaredNorm();
    seed(0, i) = 0.0;
  }
  return s / static_cast<double>(n);
}

}  // namespace detail

/// Iteration-level hook for tests: receives the step and the gradient that
/// is about to be applied.
using GradientHook = std::function<void(std::int64_t, const ParamVector&)>;

struct WindowResult {
  std::vector<MetricsRecord> metrics;
  double final_loss = 0.0;
  double seconds = 0.0;
};

/// Runs cfg.iterations steps of the loop from `state`. Metrics are emitted
/// every cfg.log_every steps and after the last one.
inline WindowResult train_window(const problems::ProblemSpec& p, const nets::Network& net, TrainState& state,
                                 const TrainConfig& cfg, const MetricsSink& sink = nullptr,
                                 const Evaluator& evaluate = nullptr, const std::string& tag = "",
                                 const GradientHook& hook = nullptr) {
  p.validate();
  WindowResult out;
  if (cfg.iterations <= 0) return out;
  if (state.weights.M() != cfg.M) state.weights.w.assign(static_cast<std::size_t>(cfg.M), 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  const bool has_bc = p.bc == problems::BcKind::loss_term;
  const std::vector<bool> active{true, has_bc, true};

  for (std::int64_t it = 0; it < cfg.iterations; ++it) {
    CollocationBatch batch = sample_collocation(state.rng, p, cfg.n_r, cfg.M);
    std::vector<double> ic_xs = sample_uniform(state.rng, p.x_lo, p.x_hi, cfg.n_ic);
    std::vector<double> bc_ts = has_bc ? sample_uniform(state.rng, 0.0, p.T, cfg.n_bc) : std::vector<double>{};

    ad::Tape tape;
    nets::ParamBinding bind(tape, state.params);
    RecordedLoss R = record_loss(net, bind, p, batch, ic_xs, bc_ts, cfg.causal, cfg.eps);
    state.weights.w = R.w;

    if (cfg.scheme != Scheme::none && state.step % cfg.f == 0) {
      weighting::TermValues mag{0.0, 0.0, 0.0};
      if (cfg.scheme == Scheme::grad_norm) {
        mag.ic = detail::grad_norm(tape, R.L_ic);
        if (has_bc) mag.bc = detail::grad_norm(tape, R.L_bc);
        mag.r = detail::grad_norm(tape, R.L_r);
      } else {
        mag.ic = detail::mean_ntk_diag(tape, R.ic_rows, cfg.ntk_samples);
        if (has_bc) mag.bc = detail::mean_ntk_diag(tape, R.bc_rows, cfg.ntk_samples);
        mag.r = detail::mean_ntk_diag(tape, R.r_rows, cfg.ntk_samples);
      }
      state.weights.set_lambdas(
          weighting::robust_update(state.weights.lambdas(), mag, active, state.weights.alpha));
    }

    ad::Var total = weighting::total_loss(tape, R.L_ic, has_bc ? R.L_bc : ad::Var(), R.L_r, state.weights);
    ParamVector grad = ad::loss_grad(tape, total);
    if (!grad.flat().allFinite())
      throw Error(Errc::non_finite_gradient, "non-finite gradient at step " + std::to_string(state.step));
    if (hook) hook(state.step, grad);
    const double lr = state.lr.at(state.step);
    adam_update(state.params, state.m, state.v, grad, state.step, lr, cfg.adam);
    out.final_loss = total.scalar();

    const bool last = it + 1 == cfg.iterations;
    if (sink && (last || (cfg.log_every > 0 && state.step % cfg.log_every == 0))) {
      MetricsRecord rec;
      rec.step = state.step;
      rec.L_ic = R.breakdown.L_ic;
      rec.L_bc = R.breakdown.L_bc;
      rec.L_r = R.breakdown.L_r;
      rec.loss = out.final_loss;
      rec.lambda_ic = state.weights.lambda_ic;
      rec.lambda_bc = state.weights.lambda_bc;
      rec.lambda_r = state.weights.lambda_r;
      rec.w_min = *std::min_element(R.w.begin(), R.w.end());
      double wsum = 0.0;
      for (double w : R.w) wsum += w;
      rec.w_mean = wsum / static_cast<double>(R.w.size());
      rec.lr = lr;
      rec.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (evaluate && (last || (cfg.eval_every > 0 && state.step % cfg.eval_every == 0)))
        rec.rel_l2 = evaluate(state.params);
      rec.tag = tag;
      out.metrics.push_back(rec);
      sink(rec);
    }
    state.step += 1;
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation helpers

/// Network output (first component) at every column of coords, in chunks.
inline Eigen::RowVectorXd predict(const nets::Network& net, const ParamVector& params, const Matrix& coords,
                                  Eigen::Index chunk = 8192) {
  Eigen::RowVectorXd out(coords.cols());
  for (Eigen::Index s = 0; s < coords.cols(); s += chunk) {
    const Eigen::Index n = std::min(chunk, coords.cols() - s);
    out.segment(s, n) = nets::forward(net, params, coords.middleCols(s, n)).row(0);
  }
  return out;
}

/// Prediction on a (times x xs) grid, laid out like GridSolution::values.
inline Matrix predict_grid(const nets::Network& net, const ParamVector& params, const std::vector<double>& times,
                           const std::vector<double>& xs, double t_offset = 0.0) {
  Matrix coords(2, static_cast<Eigen::Index>(times.size() * xs.size()));
  Eigen::Index k = 0;
  for (double t : times)
    for (double x : xs) {
      coords(0, k) = t - t_offset;
      coords(1, k) = x;
      ++k;
    }
  Eigen::RowVectorXd flat = predict(net, params, coords);
  Matrix out(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(xs.size()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = flat.segment(i * out.cols(), out.cols());
  return out;
}

}  // namespace pinnkit::train

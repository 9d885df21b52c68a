// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training-pathology instruments: empirical NTK spectra, histograms of
// back-propagated gradients, temporal residual profiles and the
// spectral-bias regression experiment.

#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "pinnkit/autodiff/tape.hpp"
#include "pinnkit/error.hpp"
#include "pinnkit/nets/network.hpp"
#include "pinnkit/problems/problem.hpp"
#include "pinnkit/train/adam.hpp"
#include "pinnkit/weighting/weights.hpp"

namespace pinnkit::diag {

using ad::Matrix;
using ad::ParamVector;

inline constexpr Eigen::Index kMaxSpectrumBatch = 200;

/// Eigenvalues of the Gram matrix of per-sample parameter gradients of a
/// 1 x n output node, in descending order.
inline Eigen::VectorXd ntk_spectrum(ad::Tape& tape, const ad::Var& outputs) {
  if (outputs.cols() == 0) throw Error(Errc::empty_batch, "NTK spectrum of an empty batch");
  if (outputs.cols() > kMaxSpectrumBatch)
    throw Error(Errc::batch_too_large, "NTK spectrum needs at most 200 samples, got " +
                                           std::to_string(outputs.cols()));
  const Matrix J = weighting::per_sample_gradients(tape, outputs);
  const Matrix K = J * J.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(K, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = es.eigenvalues().reverse();
  return ev;
}

/// Spectrum of one loss term of a problem: samples are x values (ic), t
/// values (bc) or the columns of `coords` (residual).
inline Eigen::VectorXd ntk_spectrum(const nets::Network& net, const ParamVector& params,
                                    const problems::ProblemSpec& p, problems::Term term,
                                    const std::vector<double>& samples, const Matrix& coords = Matrix()) {
  const Eigen::Index n = term == problems::Term::residual ? coords.cols()
                         : term == problems::Term::bc     ? 2 * static_cast<Eigen::Index>(samples.size())
                                                          : static_cast<Eigen::Index>(samples.size());
  if (n > kMaxSpectrumBatch)
    throw Error(Errc::batch_too_large, "NTK spectrum needs at most 200 samples, got " + std::to_string(n));
  ad::Tape tape;
  nets::ParamBinding bind(tape, params);
  ad::Var out;
  switch (term) {
    case problems::Term::ic: out = problems::ic_mismatch(net, bind, samples, p.ic); break;
    case problems::Term::bc: out = problems::bc_mismatch(net, bind, p, samples); break;
    case problems::Term::residual:
      if (coords.cols() == 0) throw Error(Errc::empty_batch, "residual batch is empty");
      out = problems::residual_values(net, bind, p, coords);
      break;
  }
  return ntk_spectrum(tape, out);
}

/// Counts of |g| over log-spaced bins spanning [lo, hi]; magnitudes below
/// lo (including exact zeros) land in the underflow bin, those at or above
/// hi in the overflow bin.
struct GradHistogram {
  std::vector<double> edges;           // bins + 1 edges
  std::vector<std::int64_t> counts;    // one per bin
  std::int64_t underflow = 0;
  std::int64_t overflow = 0;
  double norm = 0.0;
  double max_abs = 0.0;

  std::int64_t total() const {
    std::int64_t t = underflow + overflow;
    for (auto c : counts) t += c;
    return t;
  }
};

inline GradHistogram grad_histogram(const Eigen::Ref<const Eigen::VectorXd>& g, int bins = 28, double lo = 1e-12,
                                    double hi = 1e2) {
  if (bins < 1 || !(lo > 0.0) || !(hi > lo)) throw Error(Errc::invalid_argument, "bad histogram range");
  GradHistogram h;
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i <= bins; ++i) h.edges.push_back(std::pow(10.0, a + (b - a) * i / bins));
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double v = std::abs(g(i));
    h.max_abs = std::max(h.max_abs, v);
    if (!(v >= lo)) {
      ++h.underflow;
    } else if (v >= hi) {
      ++h.overflow;
    } else {
      const int k = std::clamp(static_cast<int>(std::floor((std::log10(v) - a) / (b - a) * bins)), 0, bins - 1);
      ++h.counts[static_cast<std::size_t>(k)];
    }
  }
  h.norm = g.norm();
  return h;
}

/// Per-term gradients of the unweighted losses at a fixed batch.
struct TermGradients {
  Eigen::VectorXd ic;
  Eigen::VectorXd bc;  // empty without a boundary loss
  Eigen::VectorXd r;
};

inline TermGradients term_gradients(const nets::Network& net, const ParamVector& params,
                                    const problems::ProblemSpec& p, const std::vector<double>& ic_xs,
                                    const Matrix& coords, const std::vector<double>& bc_ts = {}) {
  ad::Tape tape;
  nets::ParamBinding bind(tape, params);
  ad::Var L_ic = problems::ic_loss(net, bind, ic_xs, p.ic);
  ad::Var L_r = ad::mean(ad::square(problems::residual_values(net, bind, p, coords)));
  TermGradients g;
  g.ic = ad::loss_grad(tape, L_ic).flat();
  g.r = ad::loss_grad(tape, L_r).flat();
  if (p.bc == problems::BcKind::loss_term && !bc_ts.empty())
    g.bc = ad::loss_grad(tape, problems::bc_loss(net, bind, p, bc_ts)).flat();
  return g;
}

/// Mean squared residual in each of M equal time chunks, evaluated on a
/// fixed tensor grid: nt uniformly spaced times per chunk (cell centres)
/// and nx uniformly spaced x values.
inline std::vector<double> temporal_residual_profile(const nets::Network& net, const ParamVector& params,
                                                     const problems::ProblemSpec& p, int M, int nt = 4,
                                                     int nx = 128) {
  if (M < 2) throw Error(Errc::invalid_argument, "temporal profile needs at least two chunks");
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int c = 0; c < M; ++c) {
    Matrix coords(2, static_cast<Eigen::Index>(nt) * nx);
    Eigen::Index k = 0;
    for (int i = 0; i < nt; ++i) {
      const double t = p.T * (c + (i + 0.5) / nt) / M;
      for (int j = 0; j < nx; ++j, ++k) {
        coords(0, k) = t;
        coords(1, k) = p.x_lo + p.length() * (j + 0.5) / nx;
      }
    }
    ad::Tape tape;
    nets::ParamBinding bind(tape, params, false);
    out[static_cast<std::size_t>(c)] = problems::residual_values(net, bind, p, coords).value().squaredNorm() /
                                       static_cast<double>(coords.cols());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral bias

struct SpectralBiasConfig {
  int depth = 3;
  int width = 64;
  std::optional<double> fourier_sigma;  // Fourier features when set
  int fourier_features = 64;
  int grid = 128;          // training points on [0, 2 pi)
  int max_iterations = 20000;
  int check_every = 1;
  double lr = 1e-3;
  int low = 1;             // target sin(low x) + sin(high x)
  int high = 8;
};

struct SpectralBiasResult {
  /// First checked iteration at which each component's amplitude error
  /// fell to half its initial value; max_iterations + 1 when never.
  int half_low = 0;
  int half_high = 0;
  double initial_low = 0.0;
  double initial_high = 0.0;
  int gap() const { return half_high - half_low; }
};

/// Amplitude of Fourier mode k of samples on a uniform periodic grid.
inline double mode_amplitude(const std::vector<double>& v, int k) {
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  std::vector<std::complex<double>> in(v.begin(), v.end());
  fft.fwd(out, in);
  return 2.0 * std::abs(out[static_cast<std::size_t>(k)]) / static_cast<double>(v.size());
}

/// Full-batch Adam regression of sin(low x) + sin(high x) on [0, 2 pi),
/// tracking the error left in each of the two Fourier modes.
inline SpectralBiasResult spectral_bias_run(const SpectralBiasConfig& cfg, std::uint64_t seed) {
  nets::NetworkConfig nc;
  nc.input_dim = 1;
  nc.depth = cfg.depth;
  nc.width = cfg.width;
  if (cfg.fourier_sigma) nc.fourier = nets::FourierConfig{*cfg.fourier_sigma, cfg.fourier_features};
  nets::Network net = nets::make_network(nc, seed);
  const double pi = std::numbers::pi;
  Matrix x(1, cfg.grid), y(1, cfg.grid);
  for (int i = 0; i < cfg.grid; ++i) {
    x(0, i) = 2 * pi * i / cfg.grid;
    y(0, i) = std::sin(cfg.low * x(0, i)) + std::sin(cfg.high * x(0, i));
  }
  ParamVector params = net.params, m = params.zeros_like(), v = params.zeros_like();
  auto errors = [&](const ParamVector& ps) {
    Matrix e = nets::forward(net, ps, x) - y;
    std::vector<double> ev(e.data(), e.data() + e.size());
    return std::pair{mode_amplitude(ev, cfg.low), mode_amplitude(ev, cfg.high)};
  };
  SpectralBiasResult r;
  std::tie(r.initial_low, r.initial_high) = errors(params);
  r.half_low = r.half_high = cfg.max_iterations + 1;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    ad::Tape tape;
    nets::ParamBinding bind(tape, params);
    ad::Var u = nets::forward_jets(net, bind, x, {});
    ad::Var loss = ad::mean(ad::square(u - tape.constant(y)));
    ParamVector g = ad::loss_grad(tape, loss);
    train::adam_update(params, m, v, g, it, cfg.lr);
    if ((it + 1) % cfg.check_every == 0) {
      auto [el, eh] = errors(params);
      if (r.half_low > cfg.max_iterations && el <= 0.5 * r.initial_low) r.half_low = it + 1;
      if (r.half_high > cfg.max_iterations && eh <= 0.5 * r.initial_high) r.half_high = it + 1;
      if (r.half_low <= cfg.max_iterations && r.half_high <= cfg.max_iterations) break;
    }
  }
  return r;
}

}  // namespace pinnkit::diag

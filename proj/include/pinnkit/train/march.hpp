// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Curricula built on train_window: sequential time marching over windows
// and parameter continuation over a schedule of PDE constants.

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "pinnkit/oracle/oracle.hpp"
#include "pinnkit/train/trainer.hpp"

namespace pinnkit::train {

/// Piecewise-linear interpolation on a sorted grid, clamped at the ends.
class LinearInterpolant {
 public:
  LinearInterpolant(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() < 2 || xs_.size() != ys_.size())
      throw Error(Errc::invalid_argument, "linear interpolant needs matching grids of two or more points");
  }
  double operator()(double x) const {
    if (x <= xs_.front()) return ys_.front();
    if (x >= xs_.back()) return ys_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const auto j = static_cast<std::size_t>(it - xs_.begin());
    const double a = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
    return (1.0 - a) * ys_[j - 1] + a * ys_[j];
  }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// The network's prediction u(t, .) as a function of x, sampled on `n`
/// points and interpolated (trigonometrically when the problem has a hard
/// periodic constraint).
inline std::function<double(double)> slice_function(const nets::Network& net, const ParamVector& params,
                                                    const problems::ProblemSpec& p, double t, int n) {
  const bool periodic = p.bc == problems::BcKind::periodic_hard;
  std::vector<double> xs = periodic ? oracle::uniform_periodic_grid(p.x_lo, p.x_hi, n)
                                    : std::vector<double>(static_cast<std::size_t>(n));
  if (!periodic)
    for (int j = 0; j < n; ++j) xs[static_cast<std::size_t>(j)] = p.x_lo + p.length() * j / (n - 1);
  Matrix u = predict_grid(net, params, {t}, xs);
  std::vector<double> ys(u.data(), u.data() + u.size());
  if (periodic) {
    auto I = std::make_shared<oracle::PeriodicInterpolant>(ys, p.x_lo, p.length());
    return [I](double x) { return (*I)(x); };
  }
  auto I = std::make_shared<LinearInterpolant>(xs, ys);
  return [I](double x) { return (*I)(x); };
}

/// Called with the live training state after each window or stage ends,
/// and with failed = true when one aborts with an error (before rethrow).
using StageObserver = std::function<void(const TrainState&, const std::string& tag, bool failed)>;

/// Runs one window or stage, reporting its end state to `observe`.
inline WindowResult observed_window(const problems::ProblemSpec& p, const nets::Network& net, TrainState& state,
                                    const TrainConfig& cfg, const MetricsSink& sink, const Evaluator& evaluate,
                                    const std::string& tag, const StageObserver& observe) {
  WindowResult r;
  try {
    r = train_window(p, net, state, cfg, sink, evaluate, tag);
  } catch (const Error&) {
    if (observe) observe(state, tag, true);
    throw;
  }
  if (observe) observe(state, tag, false);
  return r;
}

struct WindowPlan {
  int windows = 1;
  std::int64_t iterations_per_window = 1000;
  int ic_grid = 512;  // resolution of the transferred initial condition
};

struct MarchResult {
  double dt_window = 0.0;
  std::vector<ParamVector> window_params;
  std::vector<MetricsRecord> metrics;
  double seconds = 0.0;

  /// Stitched prediction on a global grid: time t belongs to window
  /// min(floor(t / dt_window), windows - 1) and is evaluated at local time.
  Matrix predict(const nets::Network& net, const std::vector<double>& times, const std::vector<double>& xs) const {
    Matrix out(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(xs.size()));
    const int W = static_cast<int>(window_params.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const int k = std::clamp(static_cast<int>(std::floor(times[i] / dt_window + 1e-12)), 0, W - 1);
      out.row(static_cast<Eigen::Index>(i)) =
          predict_grid(net, window_params[static_cast<std::size_t>(k)], {times[i]}, xs, k * dt_window);
    }
    return out;
  }
};

/// Splits [0, T] into equal windows trained one after another. Each window
/// sees local time [0, T / windows]; its initial condition is the previous
/// window's prediction at its final time. Parameters warm-start from the
/// previous window; Adam moments, step count and loss weights restart.
/// A trainable temporal period should be initialized to the window length.
inline MarchResult time_march(const problems::ProblemSpec& p, const nets::Network& net, const TrainConfig& cfg,
                              const WindowPlan& plan, std::uint64_t seed, const MetricsSink& sink = nullptr,
                              const Evaluator& evaluate = nullptr, const StageObserver& observe = nullptr) {
  if (plan.windows < 1) throw Error(Errc::invalid_argument, "need at least one window");
  MarchResult out;
  out.dt_window = p.T / plan.windows;
  TrainConfig wcfg = cfg;
  wcfg.iterations = plan.iterations_per_window;
  TrainState state = TrainState::fresh(net.params, wcfg, seed);
  problems::ProblemSpec wp = p;
  wp.T = out.dt_window;
  for (int k = 0; k < plan.windows; ++k) {
    const double offset = k * out.dt_window;
    if (k > 0) {
      wp.ic = slice_function(net, state.params, wp, out.dt_window, plan.ic_grid);
      if (p.bc == problems::BcKind::loss_term) {
        wp.bc_lo = [f = p.bc_lo, offset](double t) { return f(t + offset); };
        wp.bc_hi = [f = p.bc_hi, offset](double t) { return f(t + offset); };
      }
      state.reset_optimizer(wcfg);
    }
    const std::string tag = "window" + std::to_string(k);
    WindowResult r =
        observed_window(wp, net, state, wcfg, sink, k + 1 == plan.windows ? evaluate : nullptr, tag, observe);
    out.metrics.insert(out.metrics.end(), r.metrics.begin(), r.metrics.end());
    out.seconds += r.seconds;
    out.window_params.push_back(state.params);
  }
  return out;
}

struct ContinuationStage {
  double value = 0.0;
  std::int64_t iterations = 0;
};

struct ContinuationResult {
  std::vector<ParamVector> stage_params;
  std::vector<MetricsRecord> metrics;
  double seconds = 0.0;
};

/// Trains through a schedule of values for one PDE constant, warm-starting
/// each stage from the previous one. Adam moments, step count and loss
/// weights restart at every stage.
inline ContinuationResult continue_parameter(const problems::ProblemSpec& p, const std::string& constant,
                                             const std::vector<ContinuationStage>& schedule,
                                             const nets::Network& net, const TrainConfig& cfg, std::uint64_t seed,
                                             const MetricsSink& sink = nullptr,
                                             const Evaluator& evaluate = nullptr,
                                             const StageObserver& observe = nullptr) {
  if (schedule.empty()) throw Error(Errc::invalid_argument, "empty continuation schedule");
  p.constant(constant);  // throws for an unknown key
  ContinuationResult out;
  TrainConfig scfg = cfg;
  TrainState state = TrainState::fresh(net.params, scfg, seed);
  problems::ProblemSpec sp = p;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    sp.constants[constant] = schedule[k].value;
    scfg.iterations = schedule[k].iterations;
    if (k > 0) state.reset_optimizer(scfg);
    const std::string tag = constant + "=" + std::to_string(schedule[k].value);
    WindowResult r =
        observed_window(sp, net, state, scfg, sink, k + 1 == schedule.size() ? evaluate : nullptr, tag, observe);
    out.metrics.insert(out.metrics.end(), r.metrics.begin(), r.metrics.end());
    out.seconds += r.seconds;
    out.stage_params.push_back(state.params);
  }
  return out;
}

}  // namespace pinnkit::train

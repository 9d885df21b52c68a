// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>

#include "pinnkit/autodiff/param_vector.hpp"
#include "pinnkit/error.hpp"

namespace pinnkit::train {

using ad::ParamVector;

/// eta(step) = eta0 * rate^floor(step / decay_steps).
struct LrSchedule {
  double eta0 = 1e-3;
  double rate = 0.9;
  std::int64_t decay_steps = 5000;

  double at(std::int64_t step) const {
    return eta0 * std::pow(rate, static_cast<double>(step / decay_steps));
  }
  bool operator==(const LrSchedule&) const = default;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update at iteration `step` (0-based) in place.
/// No weight decay.
inline void adam_update(ParamVector& params, ParamVector& m, ParamVector& v, const ParamVector& grad,
                        std::int64_t step, double lr, const AdamConfig& cfg = {}) {
  if (!(grad.layout() == params.layout()) || !(m.layout() == params.layout()) || !(v.layout() == params.layout()))
    throw Error(Errc::shape_error, "gradient layout differs from parameters");
  if (!grad.flat().allFinite()) throw Error(Errc::non_finite_gradient, "gradient has non-finite entries");
  const double t = static_cast<double>(step + 1);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  auto g = grad.flat().array();
  m.flat().array() = cfg.beta1 * m.flat().array() + (1.0 - cfg.beta1) * g;
  v.flat().array() = cfg.beta2 * v.flat().array() + (1.0 - cfg.beta2) * g.square();
  params.flat().array() -= lr * (m.flat().array() / c1) / ((v.flat().array() / c2).sqrt() + cfg.eps);
}

}  // namespace pinnkit::train

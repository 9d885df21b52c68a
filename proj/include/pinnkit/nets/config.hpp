// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pinnkit/autodiff/jet.hpp"
#include "pinnkit/error.hpp"

namespace pinnkit::nets {

enum class Arch { plain, modified };

/// relu is representable only so that configs naming it can be rejected:
/// its second derivative vanishes, which zeroes u_xx-type residual terms.
enum class Activation { tanh, gelu, sin, relu };

struct PeriodicAxis {
  int axis = 0;
  double period = 1.0;
  /// Period is learned (stored as log-period). Initialize `period` to the
  /// length of the axis' domain.
  bool trainable = false;
};

/// Random Fourier features: B has `features` rows with N(0, sigma^2)
/// entries. A moderately large sigma in [1, 10] is a sensible default for
/// PDE problems.
struct FourierConfig {
  double sigma = 1.0;
  int features = 64;
};

/// Random weight factorization W = diag(exp(s)) V with s ~ N(mean, stddev^2).
struct RwfConfig {
  double mean = 1.0;
  double stddev = 0.1;
};

struct NetworkConfig {
  Arch arch = Arch::plain;
  int input_dim = 2;
  int depth = 4;
  int width = 128;
  Activation activation = Activation::tanh;
  /// Applied first, per input axis; axes not listed pass through raw.
  std::vector<PeriodicAxis> periodic;
  /// Applied to the output of the periodic stage.
  std::optional<FourierConfig> fourier;
  std::optional<RwfConfig> rwf;
  int output_dim = 1;

  /// Throws on invalid settings; returns advisory warnings.
  std::vector<std::string> validate() const {
    if (activation == Activation::relu)
      throw Error(Errc::invalid_config, "relu activation has a vanishing second derivative");
    if (depth < 1 || width < 1 || input_dim < 1 || output_dim < 1)
      throw Error(Errc::invalid_config, "depth, width, input_dim and output_dim must be positive");
    for (const auto& p : periodic) {
      if (p.axis < 0 || p.axis >= input_dim)
        throw Error(Errc::invalid_config, "periodic axis out of range");
      if (!(p.period > 0.0)) throw Error(Errc::invalid_period, "period must be positive");
    }
    if (fourier && (fourier->features < 1 || !(fourier->sigma > 0.0)))
      throw Error(Errc::invalid_config, "fourier features need features >= 1 and sigma > 0");
    std::vector<std::string> warnings;
    if (width < 128 || width > 512)
      warnings.push_back("width " + std::to_string(width) + " outside the usual 128-512 range");
    if (depth < 3 || depth > 6)
      warnings.push_back("depth " + std::to_string(depth) + " outside the usual 3-6 range");
    if (rwf && (rwf->mean < 0.0 || rwf->mean > 1.0 || rwf->stddev > 0.5))
      warnings.push_back("rwf settings far from mean 0.5-1.0, stddev 0.1");
    return warnings;
  }

  const PeriodicAxis* periodic_axis(int axis) const {
    for (const auto& p : periodic)
      if (p.axis == axis) return &p;
    return nullptr;
  }

  /// Width of the feature vector entering the first dense layer.
  int embedding_dim() const {
    int d = 0;
    for (int a = 0; a < input_dim; ++a) d += periodic_axis(a) ? 2 : 1;
    if (fourier) d = 2 * fourier->features;
    return d;
  }
  int periodic_dim() const {
    int d = 0;
    for (int a = 0; a < input_dim; ++a) d += periodic_axis(a) ? 2 : 1;
    return d;
  }
};

inline ad::UnaryFn to_unary(Activation a) {
  switch (a) {
    case Activation::tanh: return ad::UnaryFn::tanh;
    case Activation::gelu: return ad::UnaryFn::gelu;
    case Activation::sin: return ad::UnaryFn::sin;
    case Activation::relu: break;
  }
  throw Error(Errc::invalid_config, "relu activation has a vanishing second derivative");
}

}  // namespace pinnkit::nets

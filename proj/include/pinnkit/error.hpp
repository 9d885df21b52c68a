// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pinnkit {

enum class Errc {
  numerical_overflow,
  invalid_node,
  shape_error,
  already_factorized,
  invalid_period,
  invalid_loss,
  degenerate_gradient,
  degenerate_kernel,
  empty_batch,
  invalid_scale,
  non_finite_gradient,
  checkpoint_error,
  solver_diverged,
  degenerate_reference,
  batch_too_large,
  invalid_config,
  invalid_argument,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::numerical_overflow: return "NumericalOverflow";
    case Errc::invalid_node: return "InvalidNode";
    case Errc::shape_error: return "ShapeError";
    case Errc::already_factorized: return "AlreadyFactorized";
    case Errc::invalid_period: return "InvalidPeriod";
    case Errc::invalid_loss: return "InvalidLoss";
    case Errc::degenerate_gradient: return "DegenerateGradient";
    case Errc::degenerate_kernel: return "DegenerateKernel";
    case Errc::empty_batch: return "EmptyBatch";
    case Errc::invalid_scale: return "InvalidScale";
    case Errc::non_finite_gradient: return "NonFiniteGradient";
    case Errc::checkpoint_error: return "CheckpointError";
    case Errc::solver_diverged: return "SolverDiverged";
    case Errc::degenerate_reference: return "DegenerateReference";
    case Errc::batch_too_large: return "BatchTooLarge";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace pinnkit

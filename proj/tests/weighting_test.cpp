// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pinnkit/nets/network.hpp"
#include "pinnkit/problems/problem.hpp"
#include "pinnkit/weighting/weights.hpp"

namespace pinnkit {
namespace {

using ad::Matrix;
using weighting::TermValues;

std::vector<double> random_losses(std::mt19937_64& rng, int M) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::vector<double> l(static_cast<std::size_t>(M));
  for (auto& v : l) v = u(rng);
  return l;
}

TEST(Causal, MatchesDirectSum) {
  const std::vector<double> L{0.5, 0.25, 1.0, 0.125};
  const auto w = weighting::causal_weights(L, 2.0);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[0], 1.0);
  EXPECT_DOUBLE_EQ(w[1], std::exp(-2.0 * 0.5));
  EXPECT_DOUBLE_EQ(w[2], std::exp(-2.0 * 0.75));
  EXPECT_DOUBLE_EQ(w[3], std::exp(-2.0 * 1.75));
}

TEST(Causal, PropertyMonotoneAndBounded) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const int M = 1 + static_cast<int>(rng() % 40);
    const auto L = random_losses(rng, M);
    const double eps = std::exp(std::uniform_real_distribution<double>(-3, 3)(rng));
    const auto w = weighting::causal_weights(L, eps);
    EXPECT_EQ(w[0], 1.0);
    for (std::size_t i = 1; i < w.size(); ++i) {
      EXPECT_LE(w[i], w[i - 1]);
      EXPECT_GE(w[i], 0.0);
    }
  }
}

TEST(Causal, SingleChunkIsOne) {
  EXPECT_EQ(weighting::causal_weights({123.0}, 1.0), std::vector<double>{1.0});
}

TEST(Causal, ZeroLossesGiveUnitWeights) {
  const auto w = weighting::causal_weights(std::vector<double>(8, 0.0), 1.0);
  for (double v : w) EXPECT_EQ(v, 1.0);
}

TEST(Causal, HugeEarlyLossUnderflowsToZeroNotNaN) {
  const auto w = weighting::causal_weights({1e6, 1.0, 1.0}, 1.0);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_EQ(w[2], 0.0);
}

TEST(Causal, RejectsBadInput) {
  for (double bad : {-1.0, std::nan("")}) {
    try {
      weighting::causal_weights({0.1, bad}, 1.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_loss);
    }
  }
}

TEST(Causal, WeightedResidualDefinition) {
  const std::vector<double> L{1.0, 2.0, 3.0};
  const std::vector<double> w{1.0, 0.5, 0.25};
  EXPECT_DOUBLE_EQ(weighting::weighted_residual(L, w), (1.0 + 1.0 + 0.75) / 3.0);
}

// With uniform w the weighted loss reduces to the plain mean over chunks.
TEST(Causal, PropertyUniformWeightsGiveMean) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int M = 1 + static_cast<int>(rng() % 20);
    const auto L = random_losses(rng, M);
    double mean = 0.0;
    for (double l : L) mean += l / M;
    EXPECT_NEAR(weighting::weighted_residual(L, std::vector<double>(L.size(), 1.0)), mean, 1e-15);
  }
}

// Balanced weights make every weighted gradient norm equal to the total.
TEST(GradNorm, PropertyBalancingIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-12.0, 6.0);
  for (int trial = 0; trial < 500; ++trial) {
    const TermValues g{std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng))};
    const TermValues l = weighting::grad_norm_lambdas(g);
    const double total = g.ic + g.bc + g.r;
    EXPECT_NEAR(l.ic * g.ic / total, 1.0, 1e-12);
    EXPECT_NEAR(l.bc * g.bc / total, 1.0, 1e-12);
    EXPECT_NEAR(l.r * g.r / total, 1.0, 1e-12);
  }
}

TEST(GradNorm, EqualNormsGiveThree) {
  const TermValues l = weighting::grad_norm_lambdas({2.0, 2.0, 2.0});
  EXPECT_EQ(l, (TermValues{3.0, 3.0, 3.0}));
}

TEST(GradNorm, ZeroNormIsDegenerate) {
  try {
    weighting::grad_norm_lambdas({1.0, 0.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_gradient);
  }
  try {
    weighting::ntk_lambdas({1.0, 1.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_kernel);
  }
}

TEST(Ema, EndpointsAreExact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 100.0);
  for (int i = 0; i < 100; ++i) {
    const double a = n(rng), b = n(rng);
    EXPECT_EQ(weighting::ema_update(a, b, 1.0), a);
    EXPECT_EQ(weighting::ema_update(a, b, 0.0), b);
  }
  EXPECT_DOUBLE_EQ(weighting::ema_update(1.0, 3.0, 0.9), 1.2);
  EXPECT_THROW(weighting::ema_update(1.0, 3.0, 1.5), Error);
}

TEST(Ema, PropertyStaysBetweenEndpoints) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = 10 * u(rng), b = 10 * u(rng), alpha = u(rng);
    const double v = weighting::ema_update(a, b, alpha);
    EXPECT_GE(v, std::min(a, b) - 1e-12);
    EXPECT_LE(v, std::max(a, b) + 1e-12);
  }
}

TEST(RobustUpdate, DegenerateTermKeepsOldLambda) {
  const TermValues old{2.0, 5.0, 7.0};
  const TermValues out = weighting::robust_update(old, {1.0, 1.0, 1e-14}, {true, true, true}, 0.0);
  EXPECT_EQ(out.r, 7.0);
  EXPECT_DOUBLE_EQ(out.ic, 2.0);
}

TEST(RobustUpdate, InactiveTermIsIgnored) {
  const TermValues out = weighting::robust_update({1.0, 1.0, 1.0}, {1.0, 123.0, 3.0}, {true, false, true}, 0.0);
  EXPECT_EQ(out.bc, 1.0);
  EXPECT_DOUBLE_EQ(out.ic, 4.0);
  EXPECT_DOUBLE_EQ(out.r, 4.0 / 3.0);
}

TEST(RobustUpdate, MatchesClosedFormWhenAllActive) {
  const TermValues g{0.3, 2.0, 5.0};
  const TermValues a = weighting::robust_update({1.0, 1.0, 1.0}, g, {true, true, true}, 0.9);
  const TermValues b = weighting::ema_update({1.0, 1.0, 1.0}, weighting::grad_norm_lambdas(g), 0.9);
  EXPECT_EQ(a, b);
}

TEST(TotalLoss, TapeMatchesScalarFormula) {
  ad::Tape tape;
  ad::Var a = tape.constant(2.0), b = tape.constant(3.0), c = tape.constant(5.0);
  weighting::LossWeights w = weighting::LossWeights::initial(4);
  w.set_lambdas({0.5, 2.0, 10.0});
  EXPECT_DOUBLE_EQ(weighting::total_loss(tape, a, b, c, w).scalar(), 1.0 + 6.0 + 50.0);
  weighting::LossBreakdown br{2.0, 3.0, {}, 5.0};
  EXPECT_DOUBLE_EQ(weighting::total_loss(br, w), 57.0);
  EXPECT_DOUBLE_EQ(weighting::total_loss(tape, a, ad::Var(), c, w).scalar(), 51.0);
}

// Lambda enters as a constant: the gradient of lambda * L is lambda * dL.
TEST(TotalLoss, LambdaIsConstantInGradient) {
  nets::NetworkConfig cfg;
  cfg.depth = 2;
  cfg.width = 6;
  nets::Network net = nets::make_network(cfg, 1);
  Matrix x = Matrix::Random(2, 5);
  auto loss_grad = [&](double lambda) {
    ad::Tape tape;
    nets::ParamBinding bind(tape, net.params);
    ad::Var L = ad::mean(ad::square(nets::forward_jets(net, bind, x, {})));
    weighting::LossWeights w;
    w.set_lambdas({1.0, 1.0, lambda});
    return ad::loss_grad(tape, weighting::total_loss(tape, ad::Var(), ad::Var(), L, w)).flat().eval();
  };
  EXPECT_TRUE(loss_grad(3.0).isApprox(3.0 * loss_grad(1.0), 1e-14));
}

// Per-sample NTK trace against an explicit finite-difference Jacobian.
TEST(Ntk, TraceMatchesFiniteDifferenceJacobian) {
  nets::NetworkConfig cfg;
  cfg.depth = 1;
  cfg.width = 4;
  nets::Network net = nets::make_network(cfg, 2);
  Matrix x = Matrix::Random(2, 6);
  ad::Tape tape;
  nets::ParamBinding bind(tape, net.params);
  ad::Var u = nets::forward_jets(net, bind, x, {});
  const double tr = weighting::ntk_trace(tape, u);
  double fd = 0.0;
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < net.params.size(); ++k) {
    ad::ParamVector p = net.params, m = net.params;
    p.flat()(k) += h;
    m.flat()(k) -= h;
    Matrix d = (nets::forward(net, p, x) - nets::forward(net, m, x)) / (2 * h);
    fd += d.squaredNorm();
  }
  EXPECT_NEAR(tr, fd, 1e-7 * fd);
}

TEST(Ntk, EmptyBatchThrows) {
  ad::Tape tape;
  try {
    weighting::ntk_trace(tape, tape.constant(Matrix(1, 0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::empty_batch);
  }
}

}  // namespace
}  // namespace pinnkit

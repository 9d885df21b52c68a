// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "pinnkit/oracle/oracle.hpp"

namespace pinnkit {
namespace {

using oracle::GridSolution;

constexpr double kPi = std::numbers::pi;

// Every second column of a 2N grid lands on the N grid.
Eigen::MatrixXd every_other_column(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out(m.rows(), m.cols() / 2);
  for (Eigen::Index j = 0; j < out.cols(); ++j) out.col(j) = m.col(2 * j);
  return out;
}

TEST(Advection, InitialSliceIsIc) {
  auto xs = oracle::uniform_periodic_grid(0, 2 * kPi, 64);
  GridSolution s = oracle::advection_exact([](double x) { return std::sin(x); }, 80.0, {0.0, 0.5}, xs);
  for (std::size_t j = 0; j < xs.size(); ++j) EXPECT_EQ(s.values(0, j), std::sin(xs[j]));
}

TEST(Advection, KnownValue) {
  GridSolution s = oracle::advection_exact([](double x) { return std::sin(x); }, 80.0, {0.1}, {0.0});
  EXPECT_NEAR(s.values(0, 0), std::sin(-8.0), 1e-12);
  EXPECT_NEAR(s.values(0, 0), -0.98936, 1e-5);
}

TEST(Advection, ZeroSpeedIsSteady) {
  auto xs = oracle::uniform_periodic_grid(0, 2 * kPi, 32);
  GridSolution s = oracle::advection_exact([](double x) { return std::cos(3 * x); }, 0.0, {0.0, 0.3, 0.9}, xs);
  EXPECT_EQ(s.values.row(0), s.values.row(2));
}

// u_t by central differences in time, u_x from the trigonometric
// interpolant; the residual u_t + c u_x shrinks like dt^2.
TEST(Advection, SatisfiesResidualThroughInterpolation) {
  const double c = 80.0;
  auto xs = oracle::uniform_periodic_grid(0, 2 * kPi, 64);
  double prev = 0.0;
  for (double dt : {1e-4, 5e-5}) {
    GridSolution s = oracle::advection_exact([](double x) { return std::sin(x); }, c, {0.3 - dt, 0.3, 0.3 + dt}, xs);
    std::vector<double> mid(xs.size());
    for (std::size_t j = 0; j < xs.size(); ++j) mid[j] = s.values(1, j);
    oracle::PeriodicInterpolant I(mid, 0.0, 2 * kPi);
    double worst = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      const double ut = (s.values(2, j) - s.values(0, j)) / (2 * dt);
      worst = std::max(worst, std::abs(problems::advection_residual(ut, I.derivative(xs[j]), c)));
    }
    EXPECT_LT(worst / c, 1e-3);
    if (prev > 0.0) {
      EXPECT_NEAR(prev / worst, 4.0, 0.4);
    }
    prev = worst;
  }
}

TEST(Spectral, ZeroInitialConditionStaysZero) {
  for (auto p : {problems::allen_cahn(), problems::kuramoto_sivashinsky(0.2)}) {
    p.ic = [](double) { return 0.0; };
    GridSolution s = oracle::spectral_solve(p, 128, 1e-3, 10);
    EXPECT_EQ(s.values.cwiseAbs().maxCoeff(), 0.0) << p.name;
  }
}

TEST(Spectral, AllenCahnSelfConvergence) {
  auto p = problems::allen_cahn();
  GridSolution a = oracle::spectral_solve(p, 1024, 1e-3, 10);
  GridSolution b = oracle::spectral_solve(p, 2048, 5e-4, 10);
  Eigen::MatrixXd last_a = a.values.bottomRows(1);
  Eigen::MatrixXd last_b = every_other_column(b.values.bottomRows(1));
  EXPECT_LT(oracle::relative_l2(last_a, last_b), 1e-6);
}

TEST(Spectral, AllenCahnStaysBounded) {
  GridSolution s = oracle::spectral_solve(problems::allen_cahn(), 512, 1e-3, 100);
  EXPECT_LE(s.values.cwiseAbs().maxCoeff(), 1.05);
  // Even initial data stays even: u(t, x) = u(t, -x), grid index j <-> N - j.
  const Eigen::Index N = s.values.cols();
  double asym = 0.0;
  for (Eigen::Index j = 1; j < N; ++j) asym = std::max(asym, std::abs(s.values(100, j) - s.values(100, N - j)));
  EXPECT_LT(asym, 1e-10);
}

TEST(Spectral, KsSelfConvergence) {
  auto p = problems::kuramoto_sivashinsky(0.4);
  GridSolution a = oracle::spectral_solve(p, 256, 2.5e-4, 4);
  GridSolution b = oracle::spectral_solve(p, 512, 1.25e-4, 4);
  EXPECT_LT(oracle::relative_l2(a.values, every_other_column(b.values)), 1e-6);
}

// Finite-difference residual of the oracle output drops under refinement.
TEST(Spectral, AllenCahnResidualDecreasesUnderRefinement) {
  auto p = problems::allen_cahn();
  p.T = 0.2;
  auto residual_at = [&](int N, int snaps) {
    GridSolution s = oracle::spectral_solve(p, N, 1e-3, snaps);
    const double dt = s.times[1] - s.times[0];
    const double dx = s.xs[1] - s.xs[0];
    const int i = snaps / 2;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      const Eigen::Index jl = (j + N - 1) % N, jr = (j + 1) % N;
      const double u = s.values(i, j);
      const double ut = (s.values(i + 1, j) - s.values(i - 1, j)) / (2 * dt);
      const double uxx = (s.values(i, jr) - 2 * u + s.values(i, jl)) / (dx * dx);
      acc += std::pow(problems::allen_cahn_residual(ut, uxx, u), 2);
    }
    return std::sqrt(acc / N);
  };
  const double coarse = residual_at(128, 20);
  const double fine = residual_at(256, 40);
  EXPECT_LT(fine, coarse / 2.0);
}

TEST(Spectral, BlowUpIsReported) {
  auto p = problems::allen_cahn();
  p.constants["d"] = -1e-2;  // anti-diffusion
  p.ic = [](double x) { return 0.5 * std::cos(20 * kPi * x); };
  try {
    oracle::spectral_solve(p, 128, 1e-3, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::solver_diverged);
  }
}

TEST(Grid, SubsampleKeepsEveryStrideColumn) {
  GridSolution s = oracle::spectral_solve(problems::allen_cahn(), 128, 1e-3, 2);
  GridSolution t = oracle::subsample(s, 4, 2);
  ASSERT_EQ(t.xs.size(), 32u);
  ASSERT_EQ(t.times.size(), 2u);
  EXPECT_EQ(t.xs[3], s.xs[12]);
  EXPECT_EQ(t.values(1, 3), s.values(2, 12));
}

TEST(RelativeL2, Cases) {
  Eigen::MatrixXd ref = Eigen::MatrixXd::Random(10, 20);
  EXPECT_EQ(oracle::relative_l2(ref, ref), 0.0);
  EXPECT_NEAR(oracle::relative_l2(2.0 * ref, ref), 1.0, 1e-15);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd big = Eigen::MatrixXd::Random(200, 200);
  const double rms = std::sqrt(big.squaredNorm() / big.size());
  Eigen::MatrixXd noisy = big;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy(i) += 0.01 * rms * n(rng);
  EXPECT_NEAR(oracle::relative_l2(noisy, big), 0.01, 5e-4);
  try {
    oracle::relative_l2(ref, Eigen::MatrixXd::Zero(10, 20));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_reference);
  }
}

TEST(Interpolant, ReproducesBandLimitedSignal) {
  auto xs = oracle::uniform_periodic_grid(-1, 1, 32);
  std::vector<double> v;
  for (double x : xs) v.push_back(std::cos(kPi * x) + 0.3 * std::sin(3 * kPi * x));
  oracle::PeriodicInterpolant I(v, -1.0, 2.0);
  for (double x : {-0.77, 0.1, 0.52}) {
    EXPECT_NEAR(I(x), std::cos(kPi * x) + 0.3 * std::sin(3 * kPi * x), 1e-13);
    EXPECT_NEAR(I.derivative(x), -kPi * std::sin(kPi * x) + 0.9 * kPi * std::cos(3 * kPi * x), 1e-12);
  }
}

TEST(GridFile, RoundTripAndRejectsGarbage) {
  auto dir = std::filesystem::temp_directory_path() / "pinnkit_oracle_test";
  std::filesystem::create_directories(dir);
  auto xs = oracle::uniform_periodic_grid(0, 2 * kPi, 16);
  GridSolution s = oracle::advection_exact([](double x) { return std::sin(x); }, 3.0, {0.0, 0.1, 0.2}, xs);
  oracle::write_grid(dir / "a.grid", s);
  EXPECT_EQ(oracle::read_grid(dir / "a.grid"), s);
  {
    std::ofstream bad(dir / "bad.grid", std::ios::binary);
    bad << "not a grid";
  }
  try {
    oracle::read_grid(dir / "bad.grid");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::checkpoint_error);
  }
}

TEST(Cache, SecondCallReadsFile) {
  auto dir = std::filesystem::temp_directory_path() / "pinnkit_cache_test";
  std::filesystem::remove_all(dir);
  setenv("PINNKIT_CACHE_DIR", dir.c_str(), 1);
  auto p = problems::allen_cahn();
  p.T = 0.05;
  GridSolution a = oracle::cached_spectral_solve(p, 128, 1e-3, 5);
  ASSERT_EQ(std::distance(std::filesystem::directory_iterator(dir), {}), 1);
  GridSolution b = oracle::cached_spectral_solve(p, 128, 1e-3, 5);
  EXPECT_EQ(a, b);
  unsetenv("PINNKIT_CACHE_DIR");
}

}  // namespace
}  // namespace pinnkit

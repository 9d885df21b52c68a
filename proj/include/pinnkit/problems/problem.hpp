// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Benchmark PDEs on (t, x) in [0, T] x [x_lo, x_hi]. Coordinates are
// stacked as rows (t, x) of a 2 x n matrix; network input axis 0 is time.

#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pinnkit/autodiff/tape.hpp"
#include "pinnkit/error.hpp"
#include "pinnkit/nets/network.hpp"
#include "pinnkit/weighting/weights.hpp"

namespace pinnkit::problems {

using ad::Matrix;
using ad::Var;
using Constants = std::map<std::string, double>;

enum class BcKind { periodic_hard, loss_term };

/// Network output and its derivatives on a batch, each a 1 x n row.
/// Entries not requested are invalid Vars.
struct Derivs {
  Var u, u_t, u_x, u_xx, u_xxxx;
  Eigen::Index n = 0;
};

struct ProblemSpec {
  std::string name;
  double x_lo = 0.0;
  double x_hi = 1.0;
  double T = 1.0;
  std::function<double(double)> ic;
  BcKind bc = BcKind::periodic_hard;
  /// Dirichlet data u(t, x_lo), u(t, x_hi) for BcKind::loss_term.
  std::function<double(double)> bc_lo;
  std::function<double(double)> bc_hi;
  Constants constants;
  int order_t = 1;
  int order_x = 2;
  std::function<Var(const Derivs&, const Constants&)> residual;
  /// Closed-form solution when one exists.
  std::function<double(double, double)> exact;

  double length() const { return x_hi - x_lo; }
  double constant(const std::string& key) const {
    auto it = constants.find(key);
    if (it == constants.end()) throw Error(Errc::invalid_config, "problem " + name + " has no constant " + key);
    return it->second;
  }

  void validate() const {
    if (!(T > 0.0) || !(x_hi > x_lo)) throw Error(Errc::invalid_config, "problem domain is empty");
    if (order_t < 1 || order_x < 1 || !ad::supported_order(order_x))
      throw Error(Errc::invalid_config, "unsupported derivative order");
    if (!ic || !residual) throw Error(Errc::invalid_config, "problem lacks an initial condition or residual");
    if (bc == BcKind::loss_term && (!bc_lo || !bc_hi))
      throw Error(Errc::invalid_config, "loss-term boundary needs boundary data");
  }
};

// ---------------------------------------------------------------------------
// Residual functionals, generic over double and tape nodes

/// u_t - d u_xx + k u^3 - k u.
template <class T>
T allen_cahn_residual(const T& u_t, const T& u_xx, const T& u, double d = 1e-4, double k = 5.0) {
  return u_t - d * u_xx + k * (u * u * u) - k * u;
}

/// u_t + c u_x.
template <class T>
T advection_residual(const T& u_t, const T& u_x, double c) {
  return u_t + c * u_x;
}

/// u_t + alpha u u_x + beta u_xx + gamma u_xxxx.
template <class T>
T ks_residual(const T& u_t, const T& u_x, const T& u_xx, const T& u_xxxx, const T& u, double alpha,
              double beta, double gamma) {
  return u_t + alpha * (u * u_x) + beta * u_xx + gamma * u_xxxx;
}

/// u_t - kappa u_xx.
template <class T>
T heat_residual(const T& u_t, const T& u_xx, double kappa) {
  return u_t - kappa * u_xx;
}

// ---------------------------------------------------------------------------
// Benchmarks

/// Allen-Cahn on [-1, 1], T = 1, IC x^2 cos(pi x), periodic.
/// Constants: d (diffusion 1e-4), k (nonlinearity 5).
inline ProblemSpec allen_cahn() {
  ProblemSpec p;
  p.name = "allen_cahn";
  p.x_lo = -1.0;
  p.x_hi = 1.0;
  p.T = 1.0;
  p.ic = [](double x) { return x * x * std::cos(std::numbers::pi * x); };
  p.constants = {{"d", 1e-4}, {"k", 5.0}};
  p.order_x = 2;
  p.residual = [](const Derivs& D, const Constants& c) {
    return allen_cahn_residual(D.u_t, D.u_xx, D.u, c.at("d"), c.at("k"));
  };
  return p;
}

/// Advection on [0, 2 pi], T = 1, IC sin x, periodic. Constant: c.
inline ProblemSpec advection(double c = 80.0) {
  ProblemSpec p;
  p.name = "advection";
  p.x_lo = 0.0;
  p.x_hi = 2.0 * std::numbers::pi;
  p.T = 1.0;
  p.ic = [](double x) { return std::sin(x); };
  p.constants = {{"c", c}};
  p.order_x = 1;
  p.residual = [](const Derivs& D, const Constants& k) { return advection_residual(D.u_t, D.u_x, k.at("c")); };
  p.exact = [c](double t, double x) { return std::sin(x - c * t); };
  return p;
}

/// Kuramoto-Sivashinsky on [0, 2 pi], IC cos x (1 + sin x), periodic.
/// Constants: alpha = 100/16, beta = 100/16^2, gamma = 100/16^4.
inline ProblemSpec kuramoto_sivashinsky(double T = 1.0) {
  ProblemSpec p;
  p.name = "ks";
  p.x_lo = 0.0;
  p.x_hi = 2.0 * std::numbers::pi;
  p.T = T;
  p.ic = [](double x) { return std::cos(x) * (1.0 + std::sin(x)); };
  p.constants = {{"alpha", 100.0 / 16.0}, {"beta", 100.0 / 256.0}, {"gamma", 100.0 / 65536.0}};
  p.order_x = 4;
  p.residual = [](const Derivs& D, const Constants& k) {
    return ks_residual(D.u_t, D.u_x, D.u_xx, D.u_xxxx, D.u, k.at("alpha"), k.at("beta"), k.at("gamma"));
  };
  return p;
}

/// Heat equation on [0, 1] with homogeneous Dirichlet data enforced as a
/// loss term; exact solution exp(-kappa pi^2 t) sin(pi x).
inline ProblemSpec heat_dirichlet(double kappa = 1.0, double T = 1.0) {
  ProblemSpec p;
  p.name = "heat";
  p.x_lo = 0.0;
  p.x_hi = 1.0;
  p.T = T;
  p.ic = [](double x) { return std::sin(std::numbers::pi * x); };
  p.bc = BcKind::loss_term;
  p.bc_lo = [](double) { return 0.0; };
  p.bc_hi = [](double) { return 0.0; };
  p.constants = {{"kappa", kappa}};
  p.order_x = 2;
  p.residual = [](const Derivs& D, const Constants& k) { return heat_residual(D.u_t, D.u_xx, k.at("kappa")); };
  p.exact = [kappa](double t, double x) {
    const double pi = std::numbers::pi;
    return std::exp(-kappa * pi * pi * t) * std::sin(pi * x);
  };
  return p;
}

inline ProblemSpec make_problem(const std::string& name) {
  if (name == "allen_cahn") return allen_cahn();
  if (name == "advection") return advection();
  if (name == "ks") return kuramoto_sivashinsky();
  if (name == "heat") return heat_dirichlet();
  throw Error(Errc::invalid_config, "unknown problem " + name);
}

// ---------------------------------------------------------------------------
// Evaluation on a network

/// Records the network at `coords` (2 x n) with jets of order problem.order_t
/// in t and problem.order_x in x.
inline Derivs eval_derivs(const nets::Network& net, nets::ParamBinding& bind, const Matrix& coords,
                          int order_t, int order_x) {
  std::shared_ptr<const ad::JetLayout> L;
  nets::JetRequest req;
  if (order_t > 0) {
    req.axes.push_back(0);
    req.orders.push_back(order_t);
  }
  if (order_x > 0) {
    req.axes.push_back(1);
    req.orders.push_back(order_x);
  }
  Var out = nets::forward_jets(net, bind, coords, req, &L);
  const Eigen::Index n = coords.cols();
  auto coeff = [&](int dir, int k) { return ad::block(out, 0, L->block(dir, k) * n, 1, n); };
  Derivs D;
  D.n = n;
  D.u = coeff(0, 0);
  int dir = 0;
  if (order_t > 0) D.u_t = coeff(dir++, 1);
  if (order_x > 0) {
    D.u_x = coeff(dir, 1);
    if (order_x >= 2) D.u_xx = 2.0 * coeff(dir, 2);
    if (order_x >= 4) D.u_xxxx = 24.0 * coeff(dir, 4);
  }
  return D;
}

/// Residual values R[u] at coords, a 1 x n row.
inline Var residual_values(const nets::Network& net, nets::ParamBinding& bind, const ProblemSpec& p,
                           const Matrix& coords) {
  return p.residual(eval_derivs(net, bind, coords, p.order_t, p.order_x), p.constants);
}

/// u(0, x) - g(x) at the given spatial samples, a 1 x n row.
inline Var ic_mismatch(const nets::Network& net, nets::ParamBinding& bind, const std::vector<double>& xs,
                       const std::function<double(double)>& g) {
  if (xs.empty()) throw Error(Errc::empty_batch, "initial-condition batch is empty");
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  Matrix coords(2, n);
  Matrix target(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    coords(0, i) = 0.0;
    coords(1, i) = xs[static_cast<std::size_t>(i)];
    target(0, i) = g(xs[static_cast<std::size_t>(i)]);
  }
  Var u = nets::forward_jets(net, bind, coords, {});
  return u - bind.tape().constant(target);
}

/// (1/N) sum |u(0, x_i) - g(x_i)|^2.
inline Var ic_loss(const nets::Network& net, nets::ParamBinding& bind, const std::vector<double>& xs,
                   const std::function<double(double)>& g) {
  return ad::mean(ad::square(ic_mismatch(net, bind, xs, g)));
}

/// Boundary mismatch at times ts on both ends, a 1 x 2n row.
inline Var bc_mismatch(const nets::Network& net, nets::ParamBinding& bind, const ProblemSpec& p,
                       const std::vector<double>& ts) {
  if (ts.empty()) throw Error(Errc::empty_batch, "boundary batch is empty");
  const Eigen::Index n = static_cast<Eigen::Index>(ts.size());
  Matrix coords(2, 2 * n);
  Matrix target(1, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = ts[static_cast<std::size_t>(i)];
    coords(0, i) = t;
    coords(1, i) = p.x_lo;
    target(0, i) = p.bc_lo(t);
    coords(0, n + i) = t;
    coords(1, n + i) = p.x_hi;
    target(0, n + i) = p.bc_hi(t);
  }
  Var u = nets::forward_jets(net, bind, coords, {});
  return u - bind.tape().constant(target);
}

inline Var bc_loss(const nets::Network& net, nets::ParamBinding& bind, const ProblemSpec& p,
                   const std::vector<double>& ts) {
  return ad::mean(ad::square(bc_mismatch(net, bind, p, ts)));
}

enum class Term { ic, bc, residual };

/// Trace of the empirical NTK of one loss term on a batch: the per-sample
/// outputs are u(0, x) for ic, u on the boundary for bc and R[u] for the
/// residual. `samples` holds x values (ic), t values (bc) or is ignored in
/// favour of `coords` (residual).
inline double ntk_trace(const nets::Network& net, const ad::ParamVector& params, const ProblemSpec& p, Term term,
                        const std::vector<double>& samples, const Matrix& coords = Matrix()) {
  ad::Tape tape;
  nets::ParamBinding bind(tape, params);
  Var out;
  switch (term) {
    case Term::ic: out = ic_mismatch(net, bind, samples, p.ic); break;
    case Term::bc: out = bc_mismatch(net, bind, p, samples); break;
    case Term::residual:
      if (coords.cols() == 0) throw Error(Errc::empty_batch, "residual batch is empty");
      out = residual_values(net, bind, p, coords);
      break;
  }
  return weighting::ntk_trace(tape, out);
}

// ---------------------------------------------------------------------------
// Non-dimensionalization

/// Characteristic scales: length L, velocity U and kinematic viscosity nu.
struct ScalingRecord {
  double L = 1.0;
  double U = 1.0;
  double nu = 1.0;

  ScalingRecord() = default;
  ScalingRecord(double length, double velocity, double viscosity) : L(length), U(velocity), nu(viscosity) {
    if (!(L > 0.0) || !(U > 0.0) || !(nu > 0.0))
      throw Error(Errc::invalid_scale, "characteristic scales must be positive");
  }

  double time_scale() const { return L / U; }
  double reynolds() const { return U * L / nu; }

  double x_to_dimensionless(double x) const { return x / L; }
  double x_to_physical(double xs) const { return xs * L; }
  double t_to_dimensionless(double t) const { return t / time_scale(); }
  double t_to_physical(double ts) const { return ts * time_scale(); }
  double u_to_dimensionless(double u) const { return u / U; }
  double u_to_physical(double us) const { return us * U; }
  double p_to_dimensionless(double p) const { return p * L / (nu * U); }
  double p_to_physical(double ps) const { return ps * nu * U / L; }
};

/// 1D advection-diffusion u_t + c u_x = nu u_xx in physical units.
struct PhysicalAdvectionDiffusion {
  double x_lo = 0.0;
  double x_hi = 1.0;
  double T = 1.0;
  double c = 1.0;
  double nu = 1.0;
  std::function<double(double)> ic;
  bool periodic = true;
};

/// Dimensionless form u_t + c* u_x = (1/Re) u_xx with c* = c/U and
/// Re = U L / nu; coordinates and the initial condition are rescaled.
inline ProblemSpec nondimensionalize(const ScalingRecord& s, const PhysicalAdvectionDiffusion& phys) {
  if (!(s.L > 0.0) || !(s.U > 0.0) || !(s.nu > 0.0))
    throw Error(Errc::invalid_scale, "characteristic scales must be positive");
  ScalingRecord rec = s;
  rec.nu = phys.nu;
  ProblemSpec p;
  p.name = "advection_diffusion";
  p.x_lo = rec.x_to_dimensionless(phys.x_lo);
  p.x_hi = rec.x_to_dimensionless(phys.x_hi);
  p.T = rec.t_to_dimensionless(phys.T);
  auto g = phys.ic;
  p.ic = [g, rec](double xs) { return rec.u_to_dimensionless(g(rec.x_to_physical(xs))); };
  p.constants = {{"c", phys.c / rec.U}, {"Re", rec.reynolds()}};
  p.bc = phys.periodic ? BcKind::periodic_hard : BcKind::loss_term;
  p.order_x = 2;
  p.residual = [](const Derivs& D, const Constants& k) {
    return D.u_t + k.at("c") * D.u_x - (1.0 / k.at("Re")) * D.u_xx;
  };
  return p;
}

}  // namespace pinnkit::problems

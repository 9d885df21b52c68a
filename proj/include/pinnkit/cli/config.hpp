// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration. A config file is one JSON object with the sections
// below; every key is optional and unknown keys are rejected. The schema
// is documented in README.md.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pinnkit/error.hpp"
#include "pinnkit/nets/serialize.hpp"
#include "pinnkit/problems/problem.hpp"
#include "pinnkit/train/march.hpp"
#include "pinnkit/train/trainer.hpp"
#include "pinnkit/weighting/weights.hpp"

namespace pinnkit::cli {

using Json = nlohmann::json;
using nets::reject_unknown;

enum class Curriculum { none, time_march, continuation };

struct ProblemConfig {
  std::string name = "advection";
  std::optional<double> T;
  std::map<std::string, double> constants;  // overrides
};

struct WeightingConfig {
  weighting::Scheme scheme = weighting::Scheme::grad_norm;
  bool causal = true;
  double eps = 1.0;
  double alpha = 0.9;
  int f = 1000;
  int M = 32;
  int ntk_samples = 64;
};

struct OptimizerConfig {
  double eta0 = 1e-3;
  double rate = 0.9;
  std::int64_t decay_steps = 5000;
  std::int64_t iterations = 10000;
  int n_ic = 128;
  int n_bc = 64;
  int n_r = 256;
};

struct CurriculumConfig {
  Curriculum kind = Curriculum::none;
  int windows = 1;
  int ic_grid = 512;
  std::string constant;
  std::vector<train::ContinuationStage> schedule;
};

struct EvalConfig {
  int nx = 256;          // evaluation grid points in x
  int nt = 100;          // evaluation time intervals
  int oracle_N = 1024;   // spectral modes of the reference solver
  double oracle_dt = 1e-3;
  int eval_every = 0;    // rel-L2 in the metrics stream every k steps
};

struct RunConfig {
  ProblemConfig problem;
  nets::NetworkConfig network;
  WeightingConfig weighting;
  OptimizerConfig optimizer;
  CurriculumConfig curriculum;
  EvalConfig eval;
  std::uint64_t seed = 0;
  std::string output = "runs/default";
  int log_every = 100;
};

inline std::string to_string(Curriculum c) {
  switch (c) {
    case Curriculum::none: return "none";
    case Curriculum::time_march: return "time_march";
    case Curriculum::continuation: return "continuation";
  }
  return "none";
}

inline weighting::Scheme parse_scheme(const std::string& s) {
  if (s == "none") return weighting::Scheme::none;
  if (s == "grad_norm") return weighting::Scheme::grad_norm;
  if (s == "ntk") return weighting::Scheme::ntk;
  throw Error(Errc::invalid_config, "weighting.scheme: unknown value '" + s + "'");
}

inline Curriculum parse_curriculum(const std::string& s) {
  if (s == "none") return Curriculum::none;
  if (s == "time_march") return Curriculum::time_march;
  if (s == "continuation") return Curriculum::continuation;
  throw Error(Errc::invalid_config, "curriculum.kind: unknown value '" + s + "'");
}

/// Problem instance with overrides applied.
inline problems::ProblemSpec build_problem(const ProblemConfig& c) {
  problems::ProblemSpec p = problems::make_problem(c.name);
  for (const auto& [k, v] : c.constants) p.constant(k);  // throws for unknown keys
  auto get = [&](const std::string& k) {
    auto it = c.constants.find(k);
    return it == c.constants.end() ? p.constant(k) : it->second;
  };
  const double T = c.T.value_or(p.T);
  // Rebuild so closed-form solutions see the overridden constants.
  if (p.name == "advection") p = problems::advection(get("c"));
  if (p.name == "heat") p = problems::heat_dirichlet(get("kappa"), T);
  for (const auto& [k, v] : c.constants) p.constants[k] = v;
  p.T = T;
  p.validate();
  return p;
}

inline void check(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw Error(Errc::invalid_config, field + ": " + why);
}

/// Field-level validation beyond parsing.
inline void validate(const RunConfig& c) {
  build_problem(c.problem);
  c.network.validate();
  const auto& w = c.weighting;
  check(w.eps > 0.0, "weighting.eps", "must be positive");
  check(w.alpha >= 0.0 && w.alpha <= 1.0, "weighting.alpha", "must lie in [0, 1]");
  check(w.f >= 1, "weighting.f", "must be at least 1");
  check(w.M >= 1, "weighting.M", "must be at least 1");
  check(w.ntk_samples >= 1, "weighting.ntk_samples", "must be at least 1");
  const auto& o = c.optimizer;
  check(o.eta0 > 0.0, "optimizer.eta0", "must be positive");
  check(o.rate > 0.0 && o.rate <= 1.0, "optimizer.rate", "must lie in (0, 1]");
  check(o.decay_steps >= 1, "optimizer.decay_steps", "must be at least 1");
  check(o.iterations >= 0, "optimizer.iterations", "must be non-negative");
  check(o.n_ic >= 1 && o.n_bc >= 1 && o.n_r >= 1, "optimizer.n_*", "batch sizes must be positive");
  const auto& k = c.curriculum;
  if (k.kind == Curriculum::time_march) check(k.windows >= 1, "curriculum.windows", "must be at least 1");
  if (k.kind == Curriculum::continuation) {
    check(!k.schedule.empty(), "curriculum.schedule", "must not be empty");
    problems::make_problem(c.problem.name).constant(k.constant);
  }
  check(c.eval.nx >= 2 && c.eval.nt >= 1, "eval", "grid must have nx >= 2 and nt >= 1");
  check(c.eval.oracle_N >= 8 && c.eval.oracle_dt > 0.0, "eval", "bad oracle resolution");
  check(c.log_every >= 0, "log_every", "must be non-negative");
}

inline RunConfig config_from_json(const Json& j) {
  RunConfig c;
  reject_unknown(j, {"problem", "network", "weighting", "optimizer", "curriculum", "eval", "seed", "output", "log_every"},
                 "config");
  try {
    if (j.contains("problem")) {
      const auto& p = j["problem"];
      reject_unknown(p, {"name", "T", "constants"}, "problem");
      c.problem.name = p.value("name", c.problem.name);
      if (p.contains("T")) c.problem.T = p["T"].get<double>();
      if (p.contains("constants")) c.problem.constants = p["constants"].get<std::map<std::string, double>>();
    }
    if (j.contains("network")) c.network = nets::network_config_from_json(j["network"]);
    if (j.contains("weighting")) {
      const auto& w = j["weighting"];
      reject_unknown(w, {"scheme", "causal", "eps", "alpha", "f", "M", "ntk_samples"}, "weighting");
      if (w.contains("scheme")) c.weighting.scheme = parse_scheme(w["scheme"].get<std::string>());
      c.weighting.causal = w.value("causal", c.weighting.causal);
      c.weighting.eps = w.value("eps", c.weighting.eps);
      c.weighting.alpha = w.value("alpha", c.weighting.alpha);
      c.weighting.f = w.value("f", c.weighting.f);
      c.weighting.M = w.value("M", c.weighting.M);
      c.weighting.ntk_samples = w.value("ntk_samples", c.weighting.ntk_samples);
    }
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      reject_unknown(o, {"eta0", "rate", "decay_steps", "iterations", "n_ic", "n_bc", "n_r"}, "optimizer");
      c.optimizer.eta0 = o.value("eta0", c.optimizer.eta0);
      c.optimizer.rate = o.value("rate", c.optimizer.rate);
      c.optimizer.decay_steps = o.value("decay_steps", c.optimizer.decay_steps);
      c.optimizer.iterations = o.value("iterations", c.optimizer.iterations);
      c.optimizer.n_ic = o.value("n_ic", c.optimizer.n_ic);
      c.optimizer.n_bc = o.value("n_bc", c.optimizer.n_bc);
      c.optimizer.n_r = o.value("n_r", c.optimizer.n_r);
    }
    if (j.contains("curriculum")) {
      const auto& k = j["curriculum"];
      reject_unknown(k, {"kind", "windows", "ic_grid", "constant", "schedule"}, "curriculum");
      if (k.contains("kind")) c.curriculum.kind = parse_curriculum(k["kind"].get<std::string>());
      c.curriculum.windows = k.value("windows", c.curriculum.windows);
      c.curriculum.ic_grid = k.value("ic_grid", c.curriculum.ic_grid);
      c.curriculum.constant = k.value("constant", c.curriculum.constant);
      if (k.contains("schedule"))
        for (const auto& s : k["schedule"]) {
          reject_unknown(s, {"value", "iterations"}, "curriculum.schedule[]");
          c.curriculum.schedule.push_back({s.at("value").get<double>(), s.at("iterations").get<std::int64_t>()});
        }
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      reject_unknown(e, {"nx", "nt", "oracle_N", "oracle_dt", "eval_every"}, "eval");
      c.eval.nx = e.value("nx", c.eval.nx);
      c.eval.nt = e.value("nt", c.eval.nt);
      c.eval.oracle_N = e.value("oracle_N", c.eval.oracle_N);
      c.eval.oracle_dt = e.value("oracle_dt", c.eval.oracle_dt);
      c.eval.eval_every = e.value("eval_every", c.eval.eval_every);
    }
    c.seed = j.value("seed", c.seed);
    c.output = j.value("output", c.output);
    c.log_every = j.value("log_every", c.log_every);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("config type error: ") + e.what());
  }
  validate(c);
  return c;
}

inline Json to_json(const RunConfig& c) {
  Json j;
  j["problem"] = {{"name", c.problem.name}, {"constants", c.problem.constants}};
  if (c.problem.T) j["problem"]["T"] = *c.problem.T;
  j["network"] = nets::to_json(c.network);
  j["weighting"] = {{"scheme", weighting::to_string(c.weighting.scheme)},
                    {"causal", c.weighting.causal},
                    {"eps", c.weighting.eps},
                    {"alpha", c.weighting.alpha},
                    {"f", c.weighting.f},
                    {"M", c.weighting.M},
                    {"ntk_samples", c.weighting.ntk_samples}};
  j["optimizer"] = {{"eta0", c.optimizer.eta0},       {"rate", c.optimizer.rate}, {"decay_steps", c.optimizer.decay_steps},
                    {"iterations", c.optimizer.iterations}, {"n_ic", c.optimizer.n_ic}, {"n_bc", c.optimizer.n_bc},
                    {"n_r", c.optimizer.n_r}};
  Json sched = Json::array();
  for (const auto& s : c.curriculum.schedule) sched.push_back({{"value", s.value}, {"iterations", s.iterations}});
  j["curriculum"] = {{"kind", to_string(c.curriculum.kind)}, {"windows", c.curriculum.windows},
                     {"ic_grid", c.curriculum.ic_grid},     {"constant", c.curriculum.constant},
                     {"schedule", sched}};
  j["eval"] = {{"nx", c.eval.nx},
               {"nt", c.eval.nt},
               {"oracle_N", c.eval.oracle_N},
               {"oracle_dt", c.eval.oracle_dt},
               {"eval_every", c.eval.eval_every}};
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["log_every"] = c.log_every;
  return j;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::invalid_config, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(is, nullptr, true, true);  // comments allowed
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

/// Training settings of a run.
inline train::TrainConfig train_config(const RunConfig& c) {
  train::TrainConfig t;
  t.iterations = c.optimizer.iterations;
  t.n_ic = c.optimizer.n_ic;
  t.n_bc = c.optimizer.n_bc;
  t.n_r = c.optimizer.n_r;
  t.M = c.weighting.M;
  t.causal = c.weighting.causal;
  t.eps = c.weighting.eps;
  t.scheme = c.weighting.scheme;
  t.f = c.weighting.f;
  t.alpha = c.weighting.alpha;
  t.ntk_samples = c.weighting.ntk_samples;
  t.lr = train::LrSchedule{c.optimizer.eta0, c.optimizer.rate, c.optimizer.decay_steps};
  t.log_every = c.log_every;
  t.eval_every = c.eval.eval_every;
  return t;
}

// ---------------------------------------------------------------------------
// Metrics records: one JSON object per line.

inline Json to_json(const train::MetricsRecord& r) {
  Json j = {{"type", "metrics"},   {"step", r.step},         {"L_ic", r.L_ic},     {"L_bc", r.L_bc},
            {"L_r", r.L_r},        {"loss", r.loss},         {"lambda_ic", r.lambda_ic},
            {"lambda_bc", r.lambda_bc}, {"lambda_r", r.lambda_r}, {"w_min", r.w_min}, {"w_mean", r.w_mean},
            {"lr", r.lr},          {"wall", r.wall},         {"tag", r.tag}};
  j["rel_l2"] = r.rel_l2 ? Json(*r.rel_l2) : Json(nullptr);
  return j;
}

inline train::MetricsRecord metrics_from_json(const Json& j) {
  train::MetricsRecord r;
  r.step = j.at("step").get<std::int64_t>();
  r.L_ic = j.at("L_ic").get<double>();
  r.L_bc = j.at("L_bc").get<double>();
  r.L_r = j.at("L_r").get<double>();
  r.loss = j.at("loss").get<double>();
  r.lambda_ic = j.at("lambda_ic").get<double>();
  r.lambda_bc = j.at("lambda_bc").get<double>();
  r.lambda_r = j.at("lambda_r").get<double>();
  r.w_min = j.at("w_min").get<double>();
  r.w_mean = j.at("w_mean").get<double>();
  r.lr = j.at("lr").get<double>();
  r.wall = j.at("wall").get<double>();
  r.tag = j.at("tag").get<std::string>();
  if (!j.at("rel_l2").is_null()) r.rel_l2 = j["rel_l2"].get<double>();
  return r;
}

}  // namespace pinnkit::cli

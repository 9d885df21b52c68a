// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// The CLI verbs as library calls: train, eval, ablate, diagnose, oracle.
// Each run writes into its output directory:
//   config.json     resolved configuration
//   metrics.jsonl   one JSON record per line (metrics, then a summary)
//   final.ckpt      end state (window<k>.ckpt per window when marching)
//   error.ckpt      state at the failing step when training aborts

#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pinnkit/cli/config.hpp"
#include "pinnkit/diag/diag.hpp"
#include "pinnkit/oracle/oracle.hpp"
#include "pinnkit/train/checkpoint.hpp"
#include "pinnkit/train/march.hpp"

namespace pinnkit::cli {

namespace fs = std::filesystem;
using ad::Matrix;
using ad::ParamVector;

// ---------------------------------------------------------------------------
// Ablation toggles

enum class Toggle { fourier, rwf, weighting, causal, modified_mlp, time_period };

inline constexpr Toggle kAllToggles[] = {Toggle::fourier, Toggle::rwf,          Toggle::weighting,
                                         Toggle::causal,  Toggle::modified_mlp, Toggle::time_period};

inline Toggle parse_toggle(const std::string& s) {
  if (s == "fourier") return Toggle::fourier;
  if (s == "rwf") return Toggle::rwf;
  if (s == "grad_norm" || s == "ntk" || s == "weighting") return Toggle::weighting;
  if (s == "causal") return Toggle::causal;
  if (s == "modified_mlp") return Toggle::modified_mlp;
  if (s == "time_period") return Toggle::time_period;
  throw Error(Errc::invalid_config, "unknown toggle '" + s + "'");
}

inline std::string to_string(Toggle t) {
  switch (t) {
    case Toggle::fourier: return "fourier";
    case Toggle::rwf: return "rwf";
    case Toggle::weighting: return "weighting";
    case Toggle::causal: return "causal";
    case Toggle::modified_mlp: return "modified_mlp";
    case Toggle::time_period: return "time_period";
  }
  return "";
}

/// Whether a component is switched on in a configuration.
inline bool enabled(const RunConfig& c, Toggle t) {
  switch (t) {
    case Toggle::fourier: return c.network.fourier.has_value();
    case Toggle::rwf: return c.network.rwf.has_value();
    case Toggle::weighting: return c.weighting.scheme != weighting::Scheme::none;
    case Toggle::causal: return c.weighting.causal;
    case Toggle::modified_mlp: return c.network.arch == nets::Arch::modified;
    case Toggle::time_period: return c.network.periodic_axis(0) != nullptr;
  }
  return false;
}

inline RunConfig disable(RunConfig c, Toggle t) {
  switch (t) {
    case Toggle::fourier: c.network.fourier.reset(); break;
    case Toggle::rwf: c.network.rwf.reset(); break;
    case Toggle::weighting: c.weighting.scheme = weighting::Scheme::none; break;
    case Toggle::causal: c.weighting.causal = false; break;
    case Toggle::modified_mlp: c.network.arch = nets::Arch::plain; break;
    case Toggle::time_period:
      std::erase_if(c.network.periodic, [](const nets::PeriodicAxis& p) { return p.axis == 0; });
      break;
  }
  return c;
}

/// Conventional PINN: every component off. Spatial periodicity stays hard.
inline RunConfig plain(RunConfig c) {
  for (Toggle t : kAllToggles) c = disable(c, t);
  return c;
}

// ---------------------------------------------------------------------------
// Metrics stream

class MetricsWriter {
 public:
  explicit MetricsWriter(const fs::path& path) : os_(path, std::ios::trunc) {
    if (!os_) throw Error(Errc::invalid_config, "cannot write " + path.string());
  }
  void write(const Json& j) {
    std::lock_guard<std::mutex> lock(mu_);
    os_ << j.dump() << '\n';
    os_.flush();
  }

 private:
  std::ofstream os_;
  std::mutex mu_;
};

inline std::vector<Json> read_jsonl(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(Errc::invalid_argument, "cannot read " + path.string());
  std::vector<Json> out;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(Json::parse(line));
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct RunSummary {
  double final_loss = 0.0;
  double rel_l2 = 0.0;
  double seconds = 0.0;
  std::int64_t iterations = 0;
};

inline Json to_json(const RunSummary& s) {
  return {{"type", "summary"},
          {"final_loss", s.final_loss},
          {"rel_l2", s.rel_l2},
          {"seconds", s.seconds},
          {"iterations", s.iterations}};
}

/// Problem the trained network finally represents: the last continuation
/// value when continuing.
inline problems::ProblemSpec final_problem(const RunConfig& c) {
  ProblemConfig pc = c.problem;
  if (c.curriculum.kind == Curriculum::continuation)
    pc.constants[c.curriculum.constant] = c.curriculum.schedule.back().value;
  return build_problem(pc);
}

/// Reference solution on the evaluation grid (nt + 1 times, nx points).
inline oracle::GridSolution eval_reference(const RunConfig& c) {
  const problems::ProblemSpec p = final_problem(c);
  if (p.name == "advection" || p.exact) return oracle::reference(p, c.eval.nx, c.eval.oracle_dt, c.eval.nt);
  if (c.eval.oracle_N % c.eval.nx != 0)
    throw Error(Errc::invalid_config, "eval.oracle_N must be a multiple of eval.nx");
  return oracle::subsample(oracle::cached_spectral_solve(p, c.eval.oracle_N, c.eval.oracle_dt, c.eval.nt),
                           c.eval.oracle_N / c.eval.nx);
}

/// A trained network: one parameter set per time window.
struct TrainedModel {
  nets::Network net;
  train::MarchResult windows;

  Matrix predict(const std::vector<double>& times, const std::vector<double>& xs) const {
    return windows.predict(net, times, xs);
  }
};

struct RunResult {
  TrainedModel model;
  RunSummary summary;
  std::vector<train::MetricsRecord> metrics;
};

using StateSaver = std::function<void(const nets::Network&, const train::TrainState&, const std::string& tag,
                                      bool failed)>;

/// Trains per the configuration's curriculum and evaluates the result
/// against the reference. `save` sees every window or stage end state.
inline RunResult run_training(const RunConfig& c, const train::MetricsSink& sink = nullptr,
                              const StateSaver& save = nullptr) {
  validate(c);
  const problems::ProblemSpec p = build_problem(c.problem);
  const train::TrainConfig tc = train_config(c);
  const oracle::GridSolution ref = eval_reference(c);

  RunResult out;
  out.model.net = nets::make_network(c.network, c.seed);
  const nets::Network& net = out.model.net;
  train::StageObserver observe;
  if (save) observe = [&](const train::TrainState& s, const std::string& tag, bool failed) { save(net, s, tag, failed); };

  switch (c.curriculum.kind) {
    case Curriculum::none: {
      auto evaluate = [&](const ParamVector& ps) {
        return oracle::relative_l2(train::predict_grid(net, ps, ref.times, ref.xs), ref.values);
      };
      train::TrainState state = train::TrainState::fresh(net.params, tc, c.seed);
      train::WindowResult r = train::observed_window(p, net, state, tc, sink, evaluate, "", observe);
      out.model.windows.dt_window = p.T;
      out.model.windows.window_params = {state.params};
      out.model.windows.metrics = r.metrics;
      out.model.windows.seconds = r.seconds;
      out.summary.iterations = tc.iterations;
      break;
    }
    case Curriculum::time_march: {
      train::WindowPlan plan;
      plan.windows = c.curriculum.windows;
      plan.iterations_per_window = tc.iterations;
      plan.ic_grid = c.curriculum.ic_grid;
      out.model.windows = train::time_march(p, net, tc, plan, c.seed, sink, nullptr, observe);
      out.summary.iterations = tc.iterations * plan.windows;
      break;
    }
    case Curriculum::continuation: {
      auto r = train::continue_parameter(p, c.curriculum.constant, c.curriculum.schedule, net, tc, c.seed, sink,
                                         nullptr, observe);
      out.model.windows.dt_window = p.T;
      out.model.windows.window_params = {r.stage_params.back()};
      out.model.windows.metrics = r.metrics;
      out.model.windows.seconds = r.seconds;
      for (const auto& s : c.curriculum.schedule) out.summary.iterations += s.iterations;
      break;
    }
  }
  out.metrics = out.model.windows.metrics;
  out.summary.final_loss = out.metrics.empty() ? 0.0 : out.metrics.back().loss;
  out.summary.seconds = out.model.windows.seconds;
  out.summary.rel_l2 = oracle::relative_l2(out.model.predict(ref.times, ref.xs), ref.values);
  return out;
}

/// Runs a training job into `dir`. Returns the summary; rethrows training
/// errors after writing error.ckpt.
inline RunSummary train_to_dir(const RunConfig& c, const fs::path& dir, std::ostream* log = nullptr) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "config.json");
    os << std::setw(2) << to_json(c) << '\n';
  }
  MetricsWriter metrics(dir / "metrics.jsonl");
  auto sink = [&](const train::MetricsRecord& r) {
    metrics.write(to_json(r));
    if (log) {
      *log << (r.tag.empty() ? "" : r.tag + " ") << "step " << r.step << " loss " << r.loss << " L_ic " << r.L_ic
           << " L_r " << r.L_r << " w_min " << r.w_min;
      if (r.rel_l2) *log << " rel_l2 " << *r.rel_l2;
      *log << '\n';
    }
  };
  const bool march = c.curriculum.kind == Curriculum::time_march;
  auto save = [&](const nets::Network& net, const train::TrainState& s, const std::string& tag, bool failed) {
    if (failed) {
      train::save_checkpoint(dir / "error.ckpt", net, s);
      return;
    }
    if (march) train::save_checkpoint(dir / (tag + ".ckpt"), net, s);
    train::save_checkpoint(dir / "final.ckpt", net, s);
  };
  RunResult r = run_training(c, sink, save);
  metrics.write(to_json(r.summary));
  std::ofstream(dir / "summary.json") << std::setw(2) << to_json(r.summary) << '\n';
  return r.summary;
}

inline int cmd_train(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    RunSummary s = train_to_dir(c, c.output, &out);
    out << std::setprecision(6) << "final rel_l2 " << s.rel_l2 << " loss " << s.final_loss << " seconds "
        << s.seconds << '\n';
    return 0;
  } catch (const Error& e) {
    err << "train failed: " << e.what() << '\n';
    return 2;
  }
}

// ---------------------------------------------------------------------------
// Evaluation of a finished run

/// The trained model stored in a run directory.
inline TrainedModel load_model(const fs::path& dir, const RunConfig& c) {
  TrainedModel m;
  const problems::ProblemSpec p = build_problem(c.problem);
  if (c.curriculum.kind == Curriculum::time_march) {
    m.windows.dt_window = p.T / c.curriculum.windows;
    for (int k = 0; k < c.curriculum.windows; ++k) {
      train::Checkpoint ck = train::load_checkpoint(dir / ("window" + std::to_string(k) + ".ckpt"));
      if (k == 0) m.net = ck.net;
      m.windows.window_params.push_back(ck.state.params);
    }
  } else {
    train::Checkpoint ck = train::load_checkpoint(dir / "final.ckpt");
    m.net = ck.net;
    m.windows.dt_window = p.T;
    m.windows.window_params = {ck.state.params};
  }
  return m;
}

inline RunConfig load_run_config(const fs::path& dir) { return load_config(dir / "config.json"); }

/// Writes prediction.grid, reference.grid and error.grid into `dir`;
/// returns the relative L2 error of the prediction.
inline double eval_run(const fs::path& dir) {
  const RunConfig c = load_run_config(dir);
  const TrainedModel m = load_model(dir, c);
  const oracle::GridSolution ref = eval_reference(c);
  oracle::GridSolution pred = ref, error = ref;
  pred.provenance = "network";
  pred.values = m.predict(ref.times, ref.xs);
  error.provenance = "error";
  error.values = pred.values - ref.values;
  oracle::write_grid(dir / "prediction.grid", pred);
  oracle::write_grid(dir / "reference.grid", ref);
  oracle::write_grid(dir / "error.grid", error);
  return oracle::relative_l2(pred, ref);
}

inline int cmd_eval(const fs::path& dir, std::ostream& out, std::ostream& err) {
  try {
    out << std::setprecision(6) << "rel_l2 " << eval_run(dir) << '\n';
    return 0;
  } catch (const Error& e) {
    err << "eval failed: " << e.what() << '\n';
    return 2;
  }
}

// ---------------------------------------------------------------------------
// Ablation

struct AblationRow {
  std::string name;  // "full", "no_<toggle>" or "plain"
  RunConfig config;
  std::optional<RunSummary> summary;
  std::string error;
};

/// Rows: the base configuration, one row per toggle switched off, then
/// the conventional PINN. An empty toggle set gives the base row only.
inline std::vector<AblationRow> ablation_rows(const RunConfig& base, const std::vector<Toggle>& toggles) {
  std::vector<AblationRow> rows;
  rows.push_back({"full", base, std::nullopt, ""});
  if (toggles.empty()) return rows;
  for (Toggle t : toggles) rows.push_back({"no_" + to_string(t), disable(base, t), std::nullopt, ""});
  rows.push_back({"plain", plain(base), std::nullopt, ""});
  return rows;
}

inline Json to_json(const AblationRow& r, bool timing_reliable) {
  Json j;
  j["name"] = r.name;
  for (Toggle t : kAllToggles) j["settings"][to_string(t)] = enabled(r.config, t);
  if (r.summary) {
    j["rel_l2"] = r.summary->rel_l2;
    j["final_loss"] = r.summary->final_loss;
    j["seconds"] = r.summary->seconds;
  } else {
    j["rel_l2"] = nullptr;
    j["error"] = r.error;
  }
  j["timing_reliable"] = timing_reliable;
  return j;
}

/// Runs every row into `dir/<row name>` and writes dir/ablation.json.
/// Rows run one after another unless `parallel`, in which case their
/// timings are marked unreliable. A failed row is recorded, not fatal.
inline std::vector<AblationRow> run_ablation(const RunConfig& base, const std::vector<Toggle>& toggles,
                                             const fs::path& dir, bool parallel = false,
                                             std::ostream* log = nullptr) {
  std::vector<AblationRow> rows = ablation_rows(base, toggles);
  auto run_row = [&](AblationRow& row) {
    row.config.output = (dir / row.name).string();
    try {
      row.summary = train_to_dir(row.config, row.config.output);
    } catch (const Error& e) {
      row.error = e.what();
    }
  };
  if (parallel) {
    std::vector<std::future<void>> jobs;
    for (auto& row : rows) jobs.push_back(std::async(std::launch::async, [&row, &run_row] { run_row(row); }));
    for (auto& j : jobs) j.get();
  } else {
    for (auto& row : rows) {
      run_row(row);
      if (log) {
        *log << row.name << ' ';
        if (row.summary)
          *log << "rel_l2 " << row.summary->rel_l2 << " seconds " << row.summary->seconds << '\n';
        else
          *log << "failed: " << row.error << '\n';
      }
    }
  }
  Json table = Json::array();
  for (const auto& row : rows) table.push_back(to_json(row, !parallel));
  fs::create_directories(dir);
  std::ofstream(dir / "ablation.json") << std::setw(2) << table << '\n';
  return rows;
}

inline int cmd_ablate(const RunConfig& base, const std::vector<Toggle>& toggles, bool parallel, std::ostream& out) {
  auto rows = run_ablation(base, toggles, base.output, parallel, parallel ? nullptr : &out);
  out << std::left << std::setw(18) << "row" << std::setw(14) << "rel_l2" << "seconds\n";
  for (const auto& r : rows) {
    out << std::setw(18) << r.name;
    if (r.summary)
      out << std::setw(14) << r.summary->rel_l2 << r.summary->seconds << '\n';
    else
      out << "failed: " << r.error << '\n';
  }
  return std::any_of(rows.begin(), rows.end(), [](const AblationRow& r) { return !r.summary; }) ? 3 : 0;
}

// ---------------------------------------------------------------------------
// Diagnostics

enum class Diagnostic { ntk, grads, temporal };

inline Diagnostic parse_diagnostic(const std::string& s) {
  if (s == "ntk") return Diagnostic::ntk;
  if (s == "grads") return Diagnostic::grads;
  if (s == "temporal") return Diagnostic::temporal;
  throw Error(Errc::invalid_config, "unknown diagnostic '" + s + "'");
}

inline Json to_json(const diag::GradHistogram& h) {
  return {{"edges", h.edges},         {"counts", h.counts}, {"underflow", h.underflow},
          {"overflow", h.overflow},   {"norm", h.norm},     {"max_abs", h.max_abs}};
}

/// Diagnostic records for the network stored in a run directory, computed
/// on fixed random batches drawn from `seed`. A time-marched run is
/// diagnosed on its first window.
inline std::vector<Json> diagnose_run(const fs::path& dir, const std::vector<Diagnostic>& which,
                                      std::uint64_t seed = 0) {
  const RunConfig c = load_run_config(dir);
  problems::ProblemSpec p = build_problem(c.problem);
  fs::path ckpt = dir / "final.ckpt";
  if (c.curriculum.kind == Curriculum::time_march) {
    p.T /= c.curriculum.windows;
    ckpt = dir / "window0.ckpt";
  }
  if (c.curriculum.kind == Curriculum::continuation) p = final_problem(c);
  const train::Checkpoint ck = train::load_checkpoint(ckpt);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto xs_of = [&](int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    for (auto& x : xs) x = p.x_lo + p.length() * U(rng);
    return xs;
  };
  auto coords_of = [&](int n) {
    Matrix m(2, n);
    for (int i = 0; i < n; ++i) {
      m(0, i) = p.T * U(rng);
      m(1, i) = p.x_lo + p.length() * U(rng);
    }
    return m;
  };
  const bool has_bc = p.bc == problems::BcKind::loss_term;
  std::vector<Json> out;
  for (Diagnostic d : which) {
    switch (d) {
      case Diagnostic::ntk: {
        const std::vector<double> xs = xs_of(100);
        const Matrix coords = coords_of(100);
        auto emit = [&](const std::string& term, const Eigen::VectorXd& ev) {
          out.push_back({{"type", "ntk_spectrum"},
                         {"step", ck.state.step},
                         {"term", term},
                         {"eigenvalues", std::vector<double>(ev.data(), ev.data() + ev.size())}});
        };
        emit("ic", diag::ntk_spectrum(ck.net, ck.state.params, p, problems::Term::ic, xs));
        if (has_bc) {
          std::vector<double> ts(50);
          for (auto& t : ts) t = p.T * U(rng);
          emit("bc", diag::ntk_spectrum(ck.net, ck.state.params, p, problems::Term::bc, ts));
        }
        emit("r", diag::ntk_spectrum(ck.net, ck.state.params, p, problems::Term::residual, {}, coords));
        break;
      }
      case Diagnostic::grads: {
        const std::vector<double> xs = xs_of(c.optimizer.n_ic);
        const Matrix coords = coords_of(c.optimizer.n_r);
        std::vector<double> ts;
        if (has_bc)
          for (int i = 0; i < c.optimizer.n_bc; ++i) ts.push_back(p.T * U(rng));
        auto g = diag::term_gradients(ck.net, ck.state.params, p, xs, coords, ts);
        Json j = {{"type", "grad_histogram"}, {"step", ck.state.step}};
        j["ic"] = to_json(diag::grad_histogram(g.ic));
        j["r"] = to_json(diag::grad_histogram(g.r));
        if (g.bc.size() > 0) j["bc"] = to_json(diag::grad_histogram(g.bc));
        out.push_back(j);
        break;
      }
      case Diagnostic::temporal: {
        const int M = std::max(2, c.weighting.M);
        out.push_back({{"type", "temporal_residual"},
                       {"step", ck.state.step},
                       {"M", M},
                       {"loss", diag::temporal_residual_profile(ck.net, ck.state.params, p, M)}});
        break;
      }
    }
  }
  return out;
}

/// Appends the records to dir/diagnostics.jsonl.
inline int cmd_diagnose(const fs::path& dir, const std::vector<Diagnostic>& which, std::ostream& out,
                        std::ostream& err) {
  try {
    auto records = diagnose_run(dir, which);
    std::ofstream os(dir / "diagnostics.jsonl", std::ios::app);
    for (const auto& r : records) {
      os << r.dump() << '\n';
      out << r["type"].get<std::string>() << (r.contains("term") ? " " + r["term"].get<std::string>() : "")
          << '\n';
    }
    return 0;
  } catch (const Error& e) {
    err << "diagnose failed: " << e.what() << '\n';
    return 2;
  }
}

// ---------------------------------------------------------------------------
// Oracle cache

inline int cmd_oracle(const RunConfig& c, std::ostream& out, std::ostream& err) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    const oracle::GridSolution ref = eval_reference(c);
    out << "reference " << ref.problem << " (" << ref.provenance << ") " << ref.times.size() << " x "
        << ref.xs.size() << " in "
        << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s, cache "
        << oracle::cache_dir().string() << '\n';
    return 0;
  } catch (const Error& e) {
    err << "oracle failed: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace pinnkit::cli

// Copyright 2026 The pinnkit Authors
// SPDX-License-Identifier: Apache-2.0
//
// pinnkit command line: train, eval, ablate, diagnose, oracle.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pinnkit/cli/commands.hpp"
#include "pinnkit/runtime.hpp"

namespace {

using namespace pinnkit;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool dry_run = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "override the configured seed");
  cmd->add_option("--out", c.out, "override the output directory");
  cmd->add_flag("--dry-run", c.dry_run, "validate the configuration and exit");
}

cli::RunConfig resolve(const Common& c) {
  cli::RunConfig rc = cli::load_config(c.config);
  if (c.seed) rc.seed = *c.seed;
  if (!c.out.empty()) rc.output = c.out;
  return rc;
}

int dry_run(const cli::RunConfig& rc) {
  std::cout << "config ok\n" << cli::to_json(rc).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"pinnkit: physics-informed neural network training engine"};
  app.require_subcommand(1);

  Common train_opts;
  auto* train = app.add_subcommand("train", "train a network per a run configuration");
  add_common(train, train_opts);

  Common ablate_opts;
  std::vector<std::string> toggles;
  bool parallel = false;
  auto* ablate = app.add_subcommand("ablate", "full pipeline, single-component ablations and a plain PINN");
  add_common(ablate, ablate_opts);
  ablate->add_option("--toggle", toggles, "component to ablate (repeatable)")
      ->check(CLI::IsMember({"fourier", "rwf", "grad_norm", "ntk", "weighting", "causal", "modified_mlp",
                             "time_period"}));
  ablate->add_flag("--parallel", parallel, "run rows concurrently (timings marked unreliable)");

  Common oracle_opts;
  auto* oracle_cmd = app.add_subcommand("oracle", "pre-generate the reference solution cache");
  add_common(oracle_cmd, oracle_opts);

  std::string eval_dir;
  auto* eval = app.add_subcommand("eval", "evaluate a finished run and dump prediction/reference/error grids");
  eval->add_option("--run", eval_dir, "run output directory")->required()->check(CLI::ExistingDirectory);

  std::string diag_dir;
  std::vector<std::string> which{"ntk", "grads", "temporal"};
  auto* diagnose = app.add_subcommand("diagnose", "NTK spectra, gradient histograms and temporal residuals");
  diagnose->add_option("--run", diag_dir, "run output directory")->required()->check(CLI::ExistingDirectory);
  diagnose->add_option("--which", which, "subset of ntk, grads, temporal")
      ->check(CLI::IsMember({"ntk", "grads", "temporal"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto rc = resolve(train_opts);
      return train_opts.dry_run ? dry_run(rc) : cli::cmd_train(rc, std::cout, std::cerr);
    }
    if (*ablate) {
      auto rc = resolve(ablate_opts);
      std::vector<cli::Toggle> ts;
      for (const auto& t : toggles) ts.push_back(cli::parse_toggle(t));
      return ablate_opts.dry_run ? dry_run(rc) : cli::cmd_ablate(rc, ts, parallel, std::cout);
    }
    if (*oracle_cmd) {
      auto rc = resolve(oracle_opts);
      return oracle_opts.dry_run ? dry_run(rc) : cli::cmd_oracle(rc, std::cout, std::cerr);
    }
    if (*eval) return cli::cmd_eval(eval_dir, std::cout, std::cerr);
    if (*diagnose) {
      std::vector<cli::Diagnostic> ds;
      for (const auto& w : which) ds.push_back(cli::parse_diagnostic(w));
      return cli::cmd_diagnose(diag_dir, ds, std::cout, std::cerr);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

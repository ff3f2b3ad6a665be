// Copyright 2026 The RALMPC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: offline synthesis, single runs, horizon
// comparisons and property checks.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "ralmpc/harness.hpp"

namespace {

using namespace ralmpc;

void print_offline(const OfflineArtifacts& off) {
  std::cout << "tube polytope rows   " << off.P.rows() << '\n'
            << "rho0                 " << off.consts.rho << '\n'
            << "L_B                  " << off.consts.L_B << '\n'
            << "rho0 + eta0 L_B      " << off.consts.kappa0 << '\n'
            << "d_bar                " << off.consts.d_bar << '\n'
            << "s_steady             " << off.consts.s_steady << '\n'
            << "L_cost               " << off.consts.L_cost << '\n'
            << "steady cost          " << off.cost.steady << '\n'
            << "stability margin     " << off.report.stability_margin << '\n'
            << "initial horizon      " << off.initial_traj.horizon() << '\n'
            << "initial sample set   " << off.sample0.size() << " entries\n";
}

int run_verify(const ExperimentConfig& cfg) {
  const UncertainLinearSystem sys = make_system(cfg);
  const OfflineArtifacts off =
      build_offline(sys, cfg.K, cfg.P_lyap, cfg.Q, cfg.R, cfg.x_s, cfg.offline);
  const ExperimentResult res = run_experiment(cfg, sys, off, {false, true});
  bool ok = off.report.ok();
  for (const IterationRecord& r : res.iterations) {
    const bool it_ok = r.theta_star_contained && r.eta_monotone &&
                       r.max_constraint_margin <= 1e-7 &&
                       r.decrease_within_slack == r.decrease_checked;
    std::cout << "iteration " << r.h << ": cost " << r.cost << ", max constraint margin "
              << r.max_constraint_margin << ", cost decrease " << r.decrease_strict << '/'
              << r.decrease_checked << " strict, estimator "
              << (r.theta_star_contained && r.eta_monotone ? "ok" : "FAILED") << '\n';
    ok = ok && it_ok;
  }
  std::cout << (ok ? "verify: PASS" : "verify: FAIL") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust adaptive learning MPC toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  int horizon = 0, iterations = 0;
  bool frozen = false, verbose = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON experiment configuration");
    sub->add_option("--seed", seed, "disturbance seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--horizon", horizon, "prediction horizon N");
    sub->add_option("--iterations", iterations, "number of iterations H");
    sub->add_flag("--frozen", frozen, "keep the initial terminal set and cost");
    sub->add_flag("-v,--verbose", verbose, "progress on stderr");
  };
  CLI::App* offline = app.add_subcommand("offline", "build and verify offline artifacts");
  CLI::App* run = app.add_subcommand("run", "run one experiment");
  CLI::App* compare = app.add_subcommand("compare", "learning vs. frozen baseline over horizons");
  CLI::App* verify = app.add_subcommand("verify", "run the closed-loop property checks");
  for (CLI::App* sub : {offline, run, compare, verify}) add_common(sub);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_path.empty() ? msd_config() : load_config(config_path);
    if (seed != 0) cfg.disturbance.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (horizon > 0) cfg.N = horizon;
    if (iterations > 0) cfg.H = iterations;
    if (frozen) cfg.frozen = true;

    if (offline->parsed()) {
      const UncertainLinearSystem sys = make_system(cfg);
      const OfflineArtifacts off =
          build_offline(sys, cfg.K, cfg.P_lyap, cfg.Q, cfg.R, cfg.x_s, cfg.offline);
      print_offline(off);
      std::filesystem::create_directories(cfg.out_dir);
      save(off.sample0, (std::filesystem::path(cfg.out_dir) / "sampleset_0.txt").string());
      save_config(cfg, (std::filesystem::path(cfg.out_dir) / "config.json").string());
      return off.report.ok() ? 0 : 1;
    }
    if (run->parsed()) {
      const UncertainLinearSystem sys = make_system(cfg);
      const OfflineArtifacts off =
          build_offline(sys, cfg.K, cfg.P_lyap, cfg.Q, cfg.R, cfg.x_s, cfg.offline);
      if (verbose) print_offline(off);
      const ExperimentResult res = run_experiment(cfg, sys, off, {true, verbose});
      export_result(res, cfg, sys, cfg.out_dir);
      for (const SummaryRow& r : summarize(res))
        std::cout << "iteration " << r.h << " cost " << r.cost << " avg solve " << r.avg_solve_time
                  << " s\n";
      return 0;
    }
    if (compare->parsed()) {
      for (const CompareRow& r : run_compare(cfg, {false, verbose}))
        std::cout << r.mode << " N=" << r.N << " cost " << r.cost << " avg solve "
                  << r.avg_solve_time << " s\n";
      return 0;
    }
    if (verify->parsed()) return run_verify(cfg);
  } catch (const ralmpc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

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

#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ralmpc/controller.hpp"

namespace ralmpc {

enum class DisturbanceMode { kConstant, kUniform, kExtremal };

struct DisturbanceSpec {
  DisturbanceMode mode = DisturbanceMode::kConstant;
  Vector value;  ///< constant mode, already in model coordinates
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::string system = "msd";
  MsdParams msd;
  UncertainLinearSystem custom;  ///< used when system != "msd"

  Matrix Q, R, K, P_lyap;
  Vector x_s;
  OfflineOptions offline;

  int N = 12;
  int H = 20;
  int T_max = 100;
  int M = 10;
  double early_stop = 1e-3;
  /// Also stop once the state is stationary (a disturbed equilibrium off the
  /// origin); the remaining steps would repeat the last tube.
  double stationary_tol = 1e-8;
  DisturbanceSpec disturbance;
  Vector theta_star;
  bool frozen = false;
  int frozen_N = 25;                          ///< horizon of the frozen baseline in compare mode
  std::vector<int> compare_horizons{18, 12, 8, 6};
  QpSettings solver;
  std::string out_dir = "out";

  /// Throws kInvalidArgument on inconsistent fields.
  void validate(const UncertainLinearSystem& sys) const;
};

/// Benchmark defaults: the mass-spring-damper preset with its verified
/// feedback gain, Lyapunov matrix and contraction factor.
ExperimentConfig msd_config();

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

UncertainLinearSystem make_system(const ExperimentConfig& cfg);

std::vector<Vector> disturbance_sequence(const DisturbanceSpec& spec, int length,
                                         const HPolytope& D);

struct StepRecord {
  int t = 0;
  Vector x;
  Vector u;
  double stage = 0.0;
  double J_opt = 0.0;
  Vector theta_bar;
  double eta = 0.0;
  double solve_time = 0.0;  ///< seconds
  double constraint_margin = 0.0;  ///< max_j F_j x + G_j u - 1
};

struct IterationRecord {
  int h = 0;
  std::vector<StepRecord> steps;
  double cost = 0.0;
  double avg_solve_time = 0.0;
  Index ss_size = 0;  ///< after the update
  // Cost-decrease inequality bookkeeping.
  int decrease_checked = 0;
  int decrease_strict = 0;
  int decrease_within_slack = 0;
  double worst_decrease_excess = -std::numeric_limits<double>::infinity();
  // Estimator bookkeeping.
  bool theta_star_contained = true;
  bool eta_monotone = true;
  double max_constraint_margin = -std::numeric_limits<double>::infinity();
  // Assembled QPs whose size differs from the expected closed form.
  int structure_checked = 0;
  int structure_mismatches = 0;
};

/// One pass of the online algorithm from x_s. Updates `estimator` and, unless
/// frozen, appends the predicted trajectories to `ss`.
IterationRecord run_iteration(const ExperimentConfig& cfg, const UncertainLinearSystem& sys,
                              const OfflineArtifacts& offline, EstimatorState& estimator,
                              SampleSet& ss, int h, const std::vector<Vector>& disturbances);

double closed_loop_cost(const IterationRecord& record);

struct ExperimentResult {
  OfflineArtifacts offline;
  std::vector<IterationRecord> iterations;
  std::vector<SampleSet> sample_sets;  ///< snapshot after each iteration (only when kept)

  double final_cost() const { return iterations.back().cost; }
};

struct RunOptions {
  bool keep_sample_sets = false;
  bool verbose = false;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg, const UncertainLinearSystem& sys,
                                const OfflineArtifacts& offline, const RunOptions& options = {});

/// Writes summary.csv, iteration_<h>.csv, sampleset_<h>.txt (when kept),
/// fig2.csv and meta.txt into `dir`.
void export_result(const ExperimentResult& result, const ExperimentConfig& cfg,
                   const UncertainLinearSystem& sys, const std::string& dir);

struct SummaryRow {
  int h = 0;
  double cost = 0.0;
  double avg_solve_time = 0.0;
  int steps = 0;
  Index ss_size = 0;
  double eta = 0.0;
};

std::vector<SummaryRow> summarize(const ExperimentResult& result);
void write_summary(const std::vector<SummaryRow>& rows, const std::string& path);
std::vector<SummaryRow> read_summary(const std::string& path);

inline constexpr const char* kSummaryHeader = "iteration,cost,avg_solve_time_s,steps,sample_set_size,eta";

struct CompareRow {
  std::string mode;  ///< "ralmpc" or "frozen-baseline"
  int N = 0;
  double cost = 0.0;
  double avg_solve_time = 0.0;
};

/// Learning controller at each horizon of cfg.compare_horizons plus the frozen
/// baseline at cfg.frozen_N; writes table.csv into cfg.out_dir.
std::vector<CompareRow> run_compare(const ExperimentConfig& cfg, const RunOptions& options = {});

}  // namespace ralmpc

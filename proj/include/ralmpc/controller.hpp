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

#include <memory>
#include <optional>
#include <string>

#include "ralmpc/estimation.hpp"
#include "ralmpc/learning.hpp"
#include "ralmpc/optimization.hpp"
#include "ralmpc/tube.hpp"

namespace ralmpc {

struct VerifyReport {
  double stability_margin = 0.0;  ///< min over vertices of lambda_min(P - Acl' P Acl - Q - K' R K)
  double contraction_sum = 0.0;   ///< rho0 + eta0 L_B
  bool stability_ok = false;
  bool contraction_ok = false;

  bool ok() const { return stability_ok && contraction_ok; }
};

/// Quadratic stability of P_lyap at every vertex of Theta0.
VerifyReport offline_verify(const UncertainLinearSystem& sys, const Matrix& K,
                            const Matrix& P_lyap, const Matrix& Q, const Matrix& R);

/// As above, plus the contraction condition rho0 + eta0 L_B < 1 on P.
VerifyReport offline_verify(const UncertainLinearSystem& sys, const Matrix& K,
                            const Matrix& P_lyap, const Matrix& Q, const Matrix& R,
                            const HPolytope& P);

enum class TerminalMode {
  kSampleSet,  ///< terminal tube inside the convex hull of the sample set
  kOrigin,     ///< x_N = 0 and s_N <= s_cap (initial trajectory)
};

struct MpcData {
  const UncertainLinearSystem* sys = nullptr;
  const HPolytope* P = nullptr;
  const TubeConstants* consts = nullptr;  ///< L_B, d_bar, c, L_cost
  const WorstCaseCost* cost = nullptr;
};

struct AssemblyCounts {
  Index nominal_vars = 0;   ///< N m input corrections
  Index extra_vars = 0;     ///< tube sizes, multipliers and terminal cost epigraph
  Index epigraph_rows = 0;  ///< tube propagation rows
  Index tightened_rows = 0;
  Index terminal_rows = 0;  ///< containment, multiplier sign and simplex rows
};

/// Condensed QP: nominal states are eliminated by forward substitution, the
/// decision vector is [v_0..v_{N-1} | s_0..s_N | lambda | tau].
struct MpcProblem {
  QpProblem qp;
  double constant = 0.0;  ///< objective offset so that J = qp objective + constant
  AssemblyCounts counts;
  int N = 0;
  Index n = 0, m = 0, n_lambda = 0;
  TerminalMode mode = TerminalMode::kSampleSet;
  Vector x0;
  Matrix Acl, B;  ///< nominal closed loop at the current center
  ParameterHypercube theta;
  double rho = 0.0;

  Index v_offset() const { return 0; }
  Index s_offset() const { return N * m; }
  Index lambda_offset() const { return N * m + N + 1; }
  Index tau_offset() const { return lambda_offset() + n_lambda; }
};

struct AssembleOptions {
  TerminalMode mode = TerminalMode::kSampleSet;
  double s_cap = 0.0;       ///< terminal tube bound for kOrigin
  double backoff = 1e-8;    ///< margin subtracted from tightened rows
};

/// `rho` is the contraction rate at theta.center.
MpcProblem assemble(const MpcData& data, const Vector& x_t, const ParameterHypercube& theta,
                    double rho, const SampleSet* ss, int N, const AssembleOptions& options = {});

/// Throws Error(kInfeasible) when the QP is infeasible and kSolverFailure for
/// any other non-optimal status.
TubeTrajectory solve_mpc(const MpcData& data, const MpcProblem& problem,
                         const QpSolver& solver = InteriorPointSolver());

/// Largest violation of the trajectory invariants: initial condition,
/// tightened constraints, tube rows (with w recomputed from x and v) and
/// nominal dynamics. At most rounding error when valid.
double trajectory_violation(const MpcData& data, const MpcProblem& problem,
                            const TubeTrajectory& traj);

Vector control_input(const TubeTrajectory& traj, const Vector& x_t, const Matrix& K);

struct OfflineArtifacts {
  Matrix K;
  Matrix P_lyap;
  HPolytope P;
  TubeConstants consts;
  WorstCaseCost cost;
  SteadyPadding padding;
  TubeTrajectory initial_traj;
  SampleSet sample0;
  VerifyReport report;

  MpcData data(const UncertainLinearSystem& sys) const { return {&sys, &P, &consts, &cost}; }
};

/// Shortest origin-terminated robust trajectory from x_s at Theta0, found by
/// doubling and bisection on the horizon. Throws kInfeasibleInitializer when
/// no horizon up to N_bar_max works.
TubeTrajectory initial_trajectory(const MpcData& data, const SteadyPadding& padding,
                                  const Vector& x_s, int N_bar_max);

struct OfflineOptions {
  double lambda = 0.85;  ///< contraction factor of P
  /// Build P inside the largest origin-symmetric subset {|(F + G K) x| <= 1}
  /// of the constraint set instead of the constraint set itself.
  bool symmetric = true;
  int N_bar_max = 400;
  double padding_margin = 0.99;
  int max_iter = 200;
};

/// Builds P, the constants, the initial trajectory and the first sample set.
/// Throws kAssumptionViolated when verification fails.
OfflineArtifacts build_offline(const UncertainLinearSystem& sys, const Matrix& K,
                               const Matrix& P_lyap, const Matrix& Q, const Matrix& R,
                               const Vector& x_s, const OfflineOptions& options = {});

/// Caches the contraction rate per hypercube center.
class ContractionCache {
 public:
  ContractionCache(const UncertainLinearSystem& sys, const Matrix& K, const HPolytope& P)
      : sys_(&sys), K_(K), P_(&P) {}

  double operator()(const Vector& theta_bar);

 private:
  const UncertainLinearSystem* sys_;
  Matrix K_;
  const HPolytope* P_;
  std::optional<Vector> key_;
  double value_ = 0.0;
};

}  // namespace ralmpc

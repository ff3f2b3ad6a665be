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
#include <string_view>

#include "ralmpc/types.hpp"

namespace ralmpc {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kMaxIter };

std::string_view to_string(SolveStatus status);

/// Convex quadratic program
///
///   minimize    1/2 z' Pq z + q' z
///   subject to  G z <= g,  A z = b.
///
/// Only the lower triangle of Pq is read by the interior-point solver, but
/// `validate` checks the full matrix for symmetry.
struct QpProblem {
  SparseMatrix Pq;
  Vector q;
  SparseMatrix G;
  Vector g;
  SparseMatrix A;
  Vector b;

  Index n_vars() const { return q.size(); }
  Index n_ineq() const { return g.size(); }
  Index n_eq() const { return b.size(); }

  /// Throws kDimensionMismatch / kInvalidArgument when dimensions, symmetry or
  /// positive semidefiniteness (checked densely for n <= 400) fail.
  void validate() const;

  double objective(const Vector& z) const;
};

struct QpSolution {
  Vector z;
  double objective = 0.0;
  SolveStatus status = SolveStatus::kMaxIter;
  double kkt_residual = 0.0;
  int iterations = 0;
  Vector y;   ///< equality multipliers
  Vector mu;  ///< inequality multipliers (>= 0)

  bool optimal() const { return status == SolveStatus::kOptimal; }
};

struct QpSettings {
  double tol = 1e-9;
  /// Relative accuracy accepted when progress stalls before `tol` is met.
  double acceptable_tol = 1e-7;
  int stall_iterations = 15;
  int max_iter = 200;
  double static_reg = 1e-9;
  int refinement_steps = 3;
  bool verbose = false;  ///< per-iteration residuals on stderr
};

/// Pluggable solver interface. Implementations must be stateless across calls.
class QpSolver {
 public:
  virtual ~QpSolver() = default;
  virtual QpSolution solve(const QpProblem& problem) const = 0;
};

/// Reference solver: Mehrotra predictor-corrector interior point method on
/// the sparse quasi-definite KKT system.
class InteriorPointSolver final : public QpSolver {
 public:
  explicit InteriorPointSolver(QpSettings settings = {}) : settings_(settings) {}
  QpSolution solve(const QpProblem& problem) const override;
  const QpSettings& settings() const { return settings_; }

 private:
  QpSettings settings_;
};

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});

/// Dense linear program
///
///   minimize q' z  subject to  G z <= g,  A z = b,  z free.
///
/// Solved with a two-phase tableau simplex (Dantzig pricing, lowest index on
/// ties, Bland's rule after a run of degenerate pivots). Returns a basic optimal
/// solution. `A` and `b` may have zero rows.
QpSolution solve_lp(const Vector& q, const Matrix& G, const Vector& g, const Matrix& A,
                    const Vector& b);

/// Inequality-only convenience overload.
QpSolution solve_lp(const Vector& q, const Matrix& G, const Vector& g);

/// KKT residual of a QP at (z, y, mu): max of stationarity, primal
/// infeasibility and complementarity, all in the infinity norm.
double kkt_residual(const QpProblem& problem, const Vector& z, const Vector& y, const Vector& mu);

/// Max violation of G z <= g and |A z - b|, clipped at zero.
double primal_infeasibility(const QpProblem& problem, const Vector& z);

}  // namespace ralmpc

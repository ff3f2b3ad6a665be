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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "ralmpc/optimization.hpp"

namespace ralmpc {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kNotConverged: return "NotConverged";
    case ErrorCode::kEmptyResult: return "EmptyResult";
    case ErrorCode::kAssumptionViolated: return "AssumptionViolated";
    case ErrorCode::kInfeasibleIntersection: return "InfeasibleIntersection";
    case ErrorCode::kSimplexViolation: return "SimplexViolation";
    case ErrorCode::kMissingTerminalMultiplier: return "MissingTerminalMultiplier";
    case ErrorCode::kInfeasibleInitialTrajectory: return "InfeasibleInitialTrajectory";
    case ErrorCode::kInfeasibleInitializer: return "InfeasibleInitializer";
    case ErrorCode::kSteadyStateInfeasible: return "SteadyStateInfeasible";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kMalformed: return "Malformed";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
  }
  return "Unknown";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
    case SolveStatus::kMaxIter: return "MaxIter";
  }
  return "Unknown";
}

void QpProblem::validate() const {
  const Index n = n_vars();
  require_dim(Pq.rows(), n, "QpProblem: Pq rows");
  require_dim(Pq.cols(), n, "QpProblem: Pq cols");
  require_dim(G.cols(), n, "QpProblem: G cols");
  require_dim(G.rows(), g.size(), "QpProblem: G rows");
  require_dim(A.cols(), n, "QpProblem: A cols");
  require_dim(A.rows(), b.size(), "QpProblem: A rows");
  const SparseMatrix asym = SparseMatrix(Pq.transpose()) - Pq;
  double asym_norm = 0.0;
  for (Index k = 0; k < asym.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(asym, k); it; ++it) {
      asym_norm = std::max(asym_norm, std::abs(it.value()));
    }
  }
  require(asym_norm <= 1e-10, ErrorCode::kInvalidArgument, "QpProblem: Pq not symmetric");
  if (n > 0 && n <= 400 && Pq.nonZeros() > 0) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(Matrix(Pq), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-9, ErrorCode::kInvalidArgument,
            "QpProblem: Pq not positive semidefinite");
  }
}

double QpProblem::objective(const Vector& z) const { return 0.5 * z.dot(Pq * z) + q.dot(z); }

double primal_infeasibility(const QpProblem& problem, const Vector& z) {
  double viol = 0.0;
  if (problem.n_ineq() > 0) {
    viol = std::max(viol, (problem.G * z - problem.g).maxCoeff());
  }
  if (problem.n_eq() > 0) {
    viol = std::max(viol, (problem.A * z - problem.b).cwiseAbs().maxCoeff());
  }
  return std::max(viol, 0.0);
}

double kkt_residual(const QpProblem& problem, const Vector& z, const Vector& y, const Vector& mu) {
  Vector stat = problem.Pq * z + problem.q;
  if (problem.n_eq() > 0) stat += problem.A.transpose() * y;
  if (problem.n_ineq() > 0) stat += problem.G.transpose() * mu;
  double res = stat.size() ? stat.cwiseAbs().maxCoeff() : 0.0;
  res = std::max(res, primal_infeasibility(problem, z));
  if (problem.n_ineq() > 0) {
    const Vector slack = problem.g - problem.G * z;
    for (Index i = 0; i < slack.size(); ++i) {
      res = std::max(res, std::abs(mu(i) * std::max(slack(i), 0.0)));
      res = std::max(res, -mu(i));
    }
  }
  return res;
}

}  // namespace ralmpc

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

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>
#include <vector>

namespace ralmpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Primal feasibility slack shared by every module.
inline constexpr double kFeasibilityTol = 1e-6;

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kInfeasible,
  kUnbounded,
  kNotConverged,
  kEmptyResult,
  kAssumptionViolated,
  kInfeasibleIntersection,
  kSimplexViolation,
  kMissingTerminalMultiplier,
  kInfeasibleInitialTrajectory,
  kInfeasibleInitializer,
  kSteadyStateInfeasible,
  kSolverFailure,
  kIo,
  kMalformed,
  kVersionMismatch,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

inline void require_dim(Index actual, Index expected, const char* what) {
  if (actual != expected) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": expected " +
                                                   std::to_string(expected) + ", got " +
                                                   std::to_string(actual));
  }
}

}  // namespace ralmpc

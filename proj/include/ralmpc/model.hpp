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

#include <utility>
#include <vector>

#include "ralmpc/geometry.hpp"

namespace ralmpc {

/// Theta = center + radius * [-1, 1]^p.
struct ParameterHypercube {
  Vector center;
  double radius = 0.0;

  Index dim() const { return center.size(); }
  bool contains(const Vector& theta, double tol = 1e-9) const;
  std::vector<Vector> vertices() const;
};

/// x+ = A(theta) x + B(theta) u + d with A(theta) = A0 + sum_i theta_i A_i,
/// constraints F x + G u <= 1 and d in the polytope D.
struct UncertainLinearSystem {
  std::vector<Matrix> A;  ///< A0 ... Ap
  std::vector<Matrix> B;  ///< B0 ... Bp
  HPolytope D;
  Matrix F;
  Matrix G;
  ParameterHypercube theta0;

  Index n() const { return A.front().rows(); }
  Index m() const { return B.front().cols(); }
  int p() const { return static_cast<int>(A.size()) - 1; }
  Index q() const { return F.rows(); }

  /// Dimensional consistency, compact constraint set and non-empty D.
  void validate() const;
};

std::pair<Matrix, Matrix> eval_matrices(const UncertainLinearSystem& sys, const Vector& theta);

/// Columns A_i x + B_i u, i = 1..p.
Matrix d_matrix(const UncertainLinearSystem& sys, const Vector& x, const Vector& u);

Vector step_truth(const UncertainLinearSystem& sys, const Vector& x, const Vector& u,
                  const Vector& theta_star, const Vector& d);

struct MsdParams {
  double Ts = 0.1;
  double mass = 1.0;
  double c_lo = 0.1, c_hi = 0.3;
  double k_lo = 0.5, k_hi = 1.5;
  double d_max = 0.2;  ///< bound on the physical force disturbance
  double x1_lo = -0.2, x1_hi = 4.1;
  double x2_max = 5.0;
  double u_max = 15.0;
};

/// Forward-Euler mass-spring-damper with damping and stiffness normalized to
/// the unit hypercube.
UncertainLinearSystem msd_benchmark(const MsdParams& params = {});

/// Physical (c, k) mapped to normalized parameters.
Vector msd_theta(const MsdParams& params, double c, double k);

}  // namespace ralmpc

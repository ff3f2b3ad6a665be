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

#include <vector>

#include "ralmpc/model.hpp"

namespace ralmpc {

struct TubeConstants {
  double rho = 0.0;       ///< contraction rate at the current center
  double L_B = 0.0;       ///< parametric Lipschitz constant
  double d_bar = 0.0;     ///< disturbance bound in the tube metric
  Vector c;               ///< constraint tightening per row of F + G K
  double L_cost = 0.0;    ///< stage-cost Lipschitz constant w.r.t. the tube size
  double s_steady = 0.0;  ///< d_bar / (1 - rho0 - eta0 L_B)
  double kappa0 = 0.0;    ///< rho0 + eta0 L_B, fixed at construction

  double steady_cost() const { return L_cost * s_steady; }
};

/// Contraction rate max_i max_{x in P} H_i (A + B K)(theta_bar) x.
double contraction_rate(const UncertainLinearSystem& sys, const Matrix& K, const HPolytope& P,
                        const Vector& theta_bar);

/// max_{i,l} max_{x in P} H_i D(x, K x) e_l over hypercube vertices e_l.
double parametric_lipschitz(const UncertainLinearSystem& sys, const Matrix& K,
                            const HPolytope& P);

/// max_i max_{d in D} H_i d.
double disturbance_bound(const UncertainLinearSystem& sys, const HPolytope& P);

/// c_j = max_{x in P} (F + G K)_j x.
Vector tightening(const UncertainLinearSystem& sys, const Matrix& K, const HPolytope& P);

/// Gradient bound of x -> l(x, K x + v) over the constraint set times the
/// Euclidean radius of P.
double compute_Lcost(const UncertainLinearSystem& sys, const Matrix& K, const Matrix& Q,
                     const Matrix& R, const HPolytope& P);

/// All constants at (theta_bar, eta). Throws kAssumptionViolated unless
/// rho + eta L_B < 1.
TubeConstants compute_constants(const UncertainLinearSystem& sys, const Matrix& K,
                                const HPolytope& P, const Vector& theta_bar, double eta,
                                const Matrix& Q, const Matrix& R);

/// eta * max_{i,l} H_i D(z, K z + v) e_l.
double w_eta(const UncertainLinearSystem& sys, const Matrix& K, const Matrix& H, const Vector& z,
             const Vector& v, double eta);

struct TubeStep {
  Vector z;
  double s;
};

/// One step of the nominal state and tube size; `rho` must belong to
/// theta_bar.
TubeStep propagate(const TubeConstants& consts, const UncertainLinearSystem& sys,
                   const Matrix& K, const HPolytope& P, const Vector& z, double s,
                   const Vector& v, const Vector& theta_bar, double eta);

double stage_cost(const Matrix& Q, const Matrix& R, const Vector& x, const Vector& u);

/// l(x, K x + v) + L_cost s.
double stage_cost_max(const Vector& x, const Vector& v, double s, const Matrix& K,
                      const Matrix& Q, const Matrix& R, double L_cost);

double steady_cost(const TubeConstants& consts);

/// Worst-case stage cost l(x, K x + v) + L_cost s together with its steady
/// value, bundled for the learning and controller modules.
struct WorstCaseCost {
  Matrix K;
  Matrix Q;
  Matrix R;
  double L_cost = 0.0;
  double steady = 0.0;

  double operator()(const Vector& x, const Vector& v, double s) const {
    return stage_cost_max(x, v, s, K, Q, R, L_cost);
  }
  /// Stage cost in excess of the steady-state cost.
  double excess(const Vector& x, const Vector& v, double s) const {
    return (*this)(x, v, s) - steady;
  }
};

/// Predicted nominal tube over a horizon N.
struct TubeTrajectory {
  std::vector<Vector> x;  ///< N + 1 nominal states
  std::vector<double> s;  ///< N + 1 tube sizes, s[0] = 0
  std::vector<Vector> v;  ///< N input corrections
  std::vector<Vector> u;  ///< N inputs K x + v
  std::vector<double> w;  ///< N uncertainty magnitudes w_eta(x, v)
  Vector lambda;          ///< terminal multipliers (empty for a pinned terminal state)
  double J_opt = 0.0;

  int horizon() const { return static_cast<int>(v.size()); }
};

}  // namespace ralmpc

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

#include "ralmpc/tube.hpp"

#include <algorithm>
#include <cmath>

namespace ralmpc {

namespace {

double max_row_support(const HPolytope& P, const Matrix& M) {
  double best = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < M.rows(); ++i) best = std::max(best, support(P, M.row(i).transpose()));
  return best;
}

}  // namespace

double contraction_rate(const UncertainLinearSystem& sys, const Matrix& K, const HPolytope& P,
                        const Vector& theta_bar) {
  auto [A, B] = eval_matrices(sys, theta_bar);
  return max_row_support(P, P.H * (A + B * K));
}

double parametric_lipschitz(const UncertainLinearSystem& sys, const Matrix& K,
                            const HPolytope& P) {
  double best = 0.0;
  for (const Vector& e : hypercube_vertices(sys.p())) {
    Matrix M = Matrix::Zero(sys.n(), sys.n());
    for (int i = 0; i < sys.p(); ++i) M += e(i) * (sys.A[i + 1] + sys.B[i + 1] * K);
    best = std::max(best, max_row_support(P, P.H * M));
  }
  return best;
}

double disturbance_bound(const UncertainLinearSystem& sys, const HPolytope& P) {
  return std::max(0.0, max_row_support(sys.D, P.H));
}

Vector tightening(const UncertainLinearSystem& sys, const Matrix& K, const HPolytope& P) {
  return support_rows(P, sys.F + sys.G * K).cwiseMax(0.0);
}

double compute_Lcost(const UncertainLinearSystem& sys, const Matrix& K, const Matrix& Q,
                     const Matrix& R, const HPolytope& P) {
  const Index n = sys.n(), m = sys.m();
  Matrix FG(sys.q(), n + m);
  FG << sys.F, sys.G;
  const HPolytope Z = HPolytope::normalized(FG);

  // d/dx l(x, K x + v) = 2 Q x + 2 K' R u, bounded row by row over Z.
  Matrix grad(n, n + m);
  grad << 2.0 * Q, 2.0 * K.transpose() * R;
  double grad_sq = 0.0;
  for (Index k = 0; k < n; ++k) {
    if (grad.row(k).lpNorm<Eigen::Infinity>() == 0.0) continue;
    const Vector a = grad.row(k).transpose();
    const double bound = std::max(support(Z, a), support(Z, -a));
    grad_sq += bound * bound;
  }

  double radius_sq = 0.0;
  for (Index k = 0; k < n; ++k) {
    const Vector e = Vector::Unit(n, k);
    const double extent = std::max(support(P, e), support(P, -e));
    radius_sq += extent * extent;
  }
  return std::sqrt(grad_sq) * std::sqrt(radius_sq);
}

TubeConstants compute_constants(const UncertainLinearSystem& sys, const Matrix& K,
                                const HPolytope& P, const Vector& theta_bar, double eta,
                                const Matrix& Q, const Matrix& R) {
  require(P.is_normalized(), ErrorCode::kInvalidArgument,
          "compute_constants: tube polytope must be in canonical form");
  require(eta >= 0.0, ErrorCode::kInvalidArgument, "compute_constants: negative radius");
  TubeConstants out;
  out.rho = contraction_rate(sys, K, P, theta_bar);
  out.L_B = parametric_lipschitz(sys, K, P);
  out.d_bar = disturbance_bound(sys, P);
  out.c = tightening(sys, K, P);
  out.L_cost = compute_Lcost(sys, K, Q, R, P);
  out.kappa0 = out.rho + eta * out.L_B;
  if (!(out.kappa0 < 1.0)) {
    throw Error(ErrorCode::kAssumptionViolated,
                "compute_constants: rho + eta L_B = " + std::to_string(out.kappa0) + " >= 1");
  }
  out.s_steady = out.d_bar / (1.0 - out.kappa0);
  return out;
}

double w_eta(const UncertainLinearSystem& sys, const Matrix& K, const Matrix& H, const Vector& z,
             const Vector& v, double eta) {
  if (eta == 0.0) return 0.0;
  const Matrix HD = H * d_matrix(sys, z, K * z + v);
  // Over the symmetric vertex set, max_l h' e_l = ||h||_1 for each row h.
  return eta * HD.rowwise().lpNorm<1>().maxCoeff();
}

TubeStep propagate(const TubeConstants& consts, const UncertainLinearSystem& sys,
                   const Matrix& K, const HPolytope& P, const Vector& z, double s,
                   const Vector& v, const Vector& theta_bar, double eta) {
  require(s >= 0.0, ErrorCode::kInvalidArgument, "propagate: negative tube size");
  auto [A, B] = eval_matrices(sys, theta_bar);
  TubeStep out;
  out.z = (A + B * K) * z + B * v;
  out.s = (consts.rho + eta * consts.L_B) * s + consts.d_bar + w_eta(sys, K, P.H, z, v, eta);
  return out;
}

double stage_cost(const Matrix& Q, const Matrix& R, const Vector& x, const Vector& u) {
  return x.dot(Q * x) + u.dot(R * u);
}

double stage_cost_max(const Vector& x, const Vector& v, double s, const Matrix& K,
                      const Matrix& Q, const Matrix& R, double L_cost) {
  require(s >= 0.0, ErrorCode::kInvalidArgument, "stage_cost_max: negative tube size");
  return stage_cost(Q, R, x, K * x + v) + L_cost * s;
}

double steady_cost(const TubeConstants& consts) { return consts.steady_cost(); }

}  // namespace ralmpc

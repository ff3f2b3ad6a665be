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

#include "ralmpc/model.hpp"

#include <cmath>

namespace ralmpc {

bool ParameterHypercube::contains(const Vector& theta, double tol) const {
  require_dim(theta.size(), center.size(), "ParameterHypercube::contains");
  return (theta - center).lpNorm<Eigen::Infinity>() <= radius + tol;
}

std::vector<Vector> ParameterHypercube::vertices() const {
  std::vector<Vector> out = hypercube_vertices(static_cast<int>(dim()));
  for (Vector& v : out) v = center + radius * v;
  return out;
}

void UncertainLinearSystem::validate() const {
  require(!A.empty() && A.size() == B.size(), ErrorCode::kDimensionMismatch,
          "system: A and B lists must be non-empty and of equal length");
  const Index nx = n(), nu = m();
  for (std::size_t i = 0; i < A.size(); ++i) {
    require_dim(A[i].rows(), nx, "system: A rows");
    require_dim(A[i].cols(), nx, "system: A cols");
    require_dim(B[i].rows(), nx, "system: B rows");
    require_dim(B[i].cols(), nu, "system: B cols");
  }
  require_dim(D.dim(), nx, "system: disturbance set dimension");
  require_dim(F.cols(), nx, "system: F cols");
  require_dim(G.cols(), nu, "system: G cols");
  require_dim(G.rows(), F.rows(), "system: G rows");
  require_dim(theta0.dim(), p(), "system: theta0 dimension");
  require(theta0.radius >= 0.0, ErrorCode::kInvalidArgument, "system: negative radius");

  Matrix FG(F.rows(), nx + nu);
  FG << F, G;
  const HPolytope Z = HPolytope::normalized(FG);
  for (Index k = 0; k < nx + nu; ++k) {
    Vector e = Vector::Unit(nx + nu, k);
    support(Z, e);  // throws kUnbounded when the constraint set is not compact
    support(Z, -e);
  }
  support(D, Vector::Zero(nx));  // throws kInfeasible on empty D
}

std::pair<Matrix, Matrix> eval_matrices(const UncertainLinearSystem& sys, const Vector& theta) {
  require_dim(theta.size(), sys.p(), "eval_matrices: theta");
  Matrix A = sys.A[0];
  Matrix B = sys.B[0];
  for (int i = 0; i < sys.p(); ++i) {
    A += theta(i) * sys.A[i + 1];
    B += theta(i) * sys.B[i + 1];
  }
  return {std::move(A), std::move(B)};
}

Matrix d_matrix(const UncertainLinearSystem& sys, const Vector& x, const Vector& u) {
  require_dim(x.size(), sys.n(), "d_matrix: x");
  require_dim(u.size(), sys.m(), "d_matrix: u");
  Matrix D(sys.n(), sys.p());
  for (int i = 0; i < sys.p(); ++i) D.col(i) = sys.A[i + 1] * x + sys.B[i + 1] * u;
  return D;
}

Vector step_truth(const UncertainLinearSystem& sys, const Vector& x, const Vector& u,
                  const Vector& theta_star, const Vector& d) {
  require_dim(x.size(), sys.n(), "step_truth: x");
  require_dim(u.size(), sys.m(), "step_truth: u");
  require_dim(d.size(), sys.n(), "step_truth: d");
  require(sys.theta0.contains(theta_star), ErrorCode::kInvalidArgument,
          "step_truth: true parameter outside the prior hypercube");
  require(membership(sys.D, d, 1e-12), ErrorCode::kInvalidArgument,
          "step_truth: disturbance outside D");
  auto [A, B] = eval_matrices(sys, theta_star);
  return A * x + B * u + d;
}

Vector msd_theta(const MsdParams& p, double c, double k) {
  const double c_mid = 0.5 * (p.c_lo + p.c_hi), c_half = 0.5 * (p.c_hi - p.c_lo);
  const double k_mid = 0.5 * (p.k_lo + p.k_hi), k_half = 0.5 * (p.k_hi - p.k_lo);
  Vector theta(2);
  theta << (c - c_mid) / c_half, (k - k_mid) / k_half;
  return theta;
}

UncertainLinearSystem msd_benchmark(const MsdParams& p) {
  const double Ts = p.Ts, m = p.mass;
  const double c_mid = 0.5 * (p.c_lo + p.c_hi), c_half = 0.5 * (p.c_hi - p.c_lo);
  const double k_mid = 0.5 * (p.k_lo + p.k_hi), k_half = 0.5 * (p.k_hi - p.k_lo);

  UncertainLinearSystem sys;
  Matrix A0(2, 2), A1 = Matrix::Zero(2, 2), A2 = Matrix::Zero(2, 2);
  A0 << 1.0, Ts, -Ts * k_mid / m, 1.0 - Ts * c_mid / m;
  A1(1, 1) = -Ts * c_half / m;
  A2(1, 0) = -Ts * k_half / m;
  Matrix B0(2, 1);
  B0 << 0.0, Ts / m;
  sys.A = {A0, A1, A2};
  sys.B = {B0, Matrix::Zero(2, 1), Matrix::Zero(2, 1)};

  // Disturbance enters the velocity channel only: D = {0} x [-w, w].
  const double w = Ts * p.d_max / m;
  Matrix Hd(4, 2);
  Hd << 1, 0, -1, 0, 0, 1, 0, -1;
  Vector hd(4);
  hd << 0, 0, w, w;
  sys.D = HPolytope(Hd, hd);

  sys.F = Matrix::Zero(6, 2);
  sys.G = Matrix::Zero(6, 1);
  sys.F(0, 0) = 1.0 / p.x1_hi;
  sys.F(1, 0) = 1.0 / p.x1_lo;
  sys.F(2, 1) = 1.0 / p.x2_max;
  sys.F(3, 1) = -1.0 / p.x2_max;
  sys.G(4, 0) = 1.0 / p.u_max;
  sys.G(5, 0) = -1.0 / p.u_max;

  sys.theta0.center = Vector::Zero(2);
  sys.theta0.radius = 1.0;
  return sys;
}

}  // namespace ralmpc

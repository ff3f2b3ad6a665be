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

#include "ralmpc/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ralmpc/optimization.hpp"

namespace ralmpc {

NonFalsifiedSet nonfalsified(const UncertainLinearSystem& sys, const Vector& x_prev,
                             const Vector& u_prev, const Vector& x_next) {
  require_dim(x_next.size(), sys.n(), "nonfalsified: x_next");
  const Matrix D = d_matrix(sys, x_prev, u_prev);
  const Vector residual = x_next - sys.A[0] * x_prev - sys.B[0] * u_prev;
  NonFalsifiedSet out;
  out.G_theta = -sys.D.H * D;
  out.g_theta = sys.D.h - sys.D.H * residual;
  return out;
}

EstimatorState::EstimatorState(ParameterHypercube initial, int window_length)
    : current(std::move(initial)), M(window_length) {
  require(window_length >= 0, ErrorCode::kInvalidArgument, "EstimatorState: negative window");
}

std::pair<Vector, Vector> window_bounds(const ParameterHypercube& prev,
                                        const std::deque<NonFalsifiedSet>& window) {
  const Index p = prev.dim();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (const NonFalsifiedSet& delta : window) {
    require_dim(delta.G_theta.cols(), p, "window_bounds: Delta columns");
    for (Index i = 0; i < delta.G_theta.rows(); ++i) {
      const double scale = delta.G_theta.row(i).lpNorm<Eigen::Infinity>();
      const double g = delta.g_theta(i);
      // Rows with (numerically) zero normal carry no parameter information;
      // they are only checked for consistency.
      if (scale <= 1e-12 * (1.0 + std::abs(g))) {
        require(g >= -kFeasibilityTol, ErrorCode::kInfeasibleIntersection,
                "window_bounds: observed transition violates the disturbance bound");
        continue;
      }
      rows.push_back(delta.G_theta.row(i) / scale);
      rhs.push_back(g / scale);
    }
  }

  Matrix G(static_cast<Index>(rows.size()) + 2 * p, p);
  Vector g(G.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    G.row(static_cast<Index>(i)) = rows[i];
    g(static_cast<Index>(i)) = rhs[i];
  }
  const Index off = static_cast<Index>(rows.size());
  G.middleRows(off, p) = Matrix::Identity(p, p);
  G.bottomRows(p) = -Matrix::Identity(p, p);
  g.segment(off, p) = prev.center.array() + prev.radius;
  g.tail(p) = -(prev.center.array() - prev.radius);

  Vector lo(p), hi(p);
  if (rows.empty()) {
    lo = prev.center.array() - prev.radius;
    hi = prev.center.array() + prev.radius;
    return {lo, hi};
  }
  for (Index i = 0; i < p; ++i) {
    const Vector e = Vector::Unit(p, i);
    QpSolution up = solve_lp(-e, G, g);
    QpSolution down = solve_lp(e, G, g);
    if (!up.optimal() || !down.optimal()) {
      throw Error(ErrorCode::kInfeasibleIntersection,
                  "window_bounds: parameter hypercube and non-falsified sets do not intersect");
    }
    hi(i) = -up.objective;
    lo(i) = down.objective;
  }
  return {lo, hi};
}

ParameterHypercube hypercube_update(EstimatorState& state, const NonFalsifiedSet& new_delta) {
  state.window.push_back(new_delta);
  while (static_cast<int>(state.window.size()) > state.M + 2) state.window.pop_front();

  const ParameterHypercube& prev = state.current;
  auto [lo, hi] = window_bounds(prev, state.window);

  ParameterHypercube next;
  next.radius = std::min(prev.radius, 0.5 * (hi - lo).maxCoeff());
  next.radius = std::max(next.radius, 0.0);
  const double shift = prev.radius - next.radius;
  const Vector mid = 0.5 * (lo + hi);
  next.center = mid.array().max(prev.center.array() - shift).min(prev.center.array() + shift).matrix();
  state.current = next;
  return next;
}

}  // namespace ralmpc

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

#include "ralmpc/geometry.hpp"

#include <cmath>
#include <string>

#include "ralmpc/optimization.hpp"

namespace ralmpc {

HPolytope::HPolytope(Matrix H_, Vector h_) : H(std::move(H_)), h(std::move(h_)) {
  require_dim(h.size(), H.rows(), "HPolytope: h length");
  require(H.rows() >= 1, ErrorCode::kInvalidArgument, "HPolytope: needs at least one row");
  require(H.allFinite() && h.allFinite(), ErrorCode::kInvalidArgument,
          "HPolytope: non-finite entries");
}

HPolytope HPolytope::normalized(Matrix H_) {
  Vector ones = Vector::Ones(H_.rows());
  return HPolytope(std::move(H_), std::move(ones));
}

HPolytope HPolytope::box(const Vector& lo, const Vector& hi) {
  require_dim(hi.size(), lo.size(), "HPolytope::box");
  const Index n = lo.size();
  Matrix H(2 * n, n);
  H << Matrix::Identity(n, n), -Matrix::Identity(n, n);
  Vector h(2 * n);
  h << hi, -lo;
  return HPolytope(std::move(H), std::move(h));
}

bool HPolytope::is_normalized(double tol) const {
  return (h.array() - 1.0).abs().maxCoeff() <= tol;
}

namespace {

QpSolution maximize(const HPolytope& P, const Vector& a) {
  require_dim(a.size(), P.dim(), "support: direction");
  return solve_lp(-a, P.H, P.h);
}

void check_status(const QpSolution& sol) {
  if (sol.status == SolveStatus::kUnbounded)
    throw Error(ErrorCode::kUnbounded, "support: direction escapes polytope");
  if (sol.status == SolveStatus::kInfeasible)
    throw Error(ErrorCode::kInfeasible, "support: empty polytope");
  if (!sol.optimal()) throw Error(ErrorCode::kSolverFailure, "support: LP did not converge");
}

}  // namespace

double support(const HPolytope& P, const Vector& a) {
  QpSolution sol = maximize(P, a);
  check_status(sol);
  return -sol.objective;
}

Vector support_rows(const HPolytope& P, const Matrix& directions) {
  Vector out(directions.rows());
  for (Index i = 0; i < directions.rows(); ++i) out(i) = support(P, directions.row(i).transpose());
  return out;
}

Vector support_point(const HPolytope& P, const Vector& a) {
  QpSolution sol = maximize(P, a);
  check_status(sol);
  return sol.z;
}

bool membership(const HPolytope& P, const Vector& x, double tol) {
  require_dim(x.size(), P.dim(), "membership: point");
  return ((P.H * x - P.h).array() <= tol).all();
}

std::vector<Vector> hypercube_vertices(int p) {
  require(p >= 1 && p <= 16, ErrorCode::kInvalidArgument,
          "hypercube_vertices: p must lie in [1, 16], got " + std::to_string(p));
  const std::size_t count = std::size_t{1} << p;
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t l = 0; l < count; ++l) {
    Vector e(p);
    // Bit set at position (p-1-i) flips coordinate i to -1.
    for (int i = 0; i < p; ++i) e(i) = ((l >> (p - 1 - i)) & 1U) ? -1.0 : 1.0;
    out.push_back(std::move(e));
  }
  return out;
}

HPolytope remove_redundant(const HPolytope& P) {
  const Index n = P.dim();
  std::vector<Index> keep;
  for (Index i = 0; i < P.rows(); ++i) {
    // Zero rows are either vacuous or make the set empty.
    if (P.H.row(i).lpNorm<Eigen::Infinity>() == 0.0) {
      require(P.h(i) >= -kFeasibilityTol, ErrorCode::kInfeasible, "remove_redundant: empty set");
      continue;
    }
    keep.push_back(i);
  }
  require(!keep.empty(), ErrorCode::kUnbounded, "remove_redundant: no constraining rows");

  // Reject empty sets up front so that the per-row LPs below stay meaningful.
  {
    QpSolution probe = solve_lp(Vector::Zero(n), P.H, P.h);
    require(probe.status != SolveStatus::kInfeasible, ErrorCode::kInfeasible,
            "remove_redundant: empty set");
  }

  std::size_t j = 0;
  while (j < keep.size()) {
    const Index row = keep[j];
    Matrix G(static_cast<Index>(keep.size()), n);
    Vector g(G.rows());
    Index k = 0;
    for (Index other : keep) {
      if (other == row) continue;
      G.row(k) = P.H.row(other);
      g(k) = P.h(other);
      ++k;
    }
    // Relaxed copy of the tested row keeps the LP bounded.
    G.row(k) = P.H.row(row);
    g(k) = P.h(row) + 1.0;
    QpSolution sol = solve_lp(-P.H.row(row).transpose(), G, g);
    const bool redundant =
        sol.optimal() && -sol.objective <= P.h(row) + 1e-9 * (1.0 + std::abs(P.h(row)));
    if (redundant) {
      keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(j));
    } else {
      ++j;
    }
  }

  Matrix H(static_cast<Index>(keep.size()), n);
  Vector h(H.rows());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    H.row(static_cast<Index>(i)) = P.H.row(keep[i]);
    h(static_cast<Index>(i)) = P.h(keep[i]);
  }
  return HPolytope(std::move(H), std::move(h));
}

HPolytope max_contractive_set(const std::vector<Matrix>& vertices, const Matrix& Z_rows,
                              double lambda, const ContractiveSetOptions& options) {
  require(lambda > 0.0 && lambda < 1.0, ErrorCode::kInvalidArgument,
          "max_contractive_set: lambda must lie in (0, 1)");
  require(!vertices.empty(), ErrorCode::kInvalidArgument, "max_contractive_set: no vertices");
  const Index n = Z_rows.cols();
  for (const Matrix& A : vertices) {
    require_dim(A.rows(), n, "max_contractive_set: vertex rows");
    require_dim(A.cols(), n, "max_contractive_set: vertex cols");
  }

  HPolytope P;
  try {
    P = remove_redundant(HPolytope::normalized(Z_rows));
  } catch (const Error& e) {
    throw Error(ErrorCode::kEmptyResult, std::string("max_contractive_set: ") + e.what());
  }

  for (int it = 0; it < options.max_iter; ++it) {
    std::vector<Vector> added;
    for (const Matrix& A : vertices) {
      const Matrix cand = P.H * A / lambda;
      for (Index i = 0; i < cand.rows(); ++i) {
        if (cand.row(i).lpNorm<Eigen::Infinity>() == 0.0) continue;
        QpSolution sol = solve_lp(-cand.row(i).transpose(), P.H, P.h);
        if (sol.status == SolveStatus::kUnbounded || !sol.optimal() ||
            -sol.objective > 1.0 + options.tol) {
          added.push_back(cand.row(i).transpose());
        }
      }
    }
    if (added.empty()) return P;

    Matrix H(P.rows() + static_cast<Index>(added.size()), n);
    H.topRows(P.rows()) = P.H;
    for (std::size_t i = 0; i < added.size(); ++i)
      H.row(P.rows() + static_cast<Index>(i)) = added[i].transpose();
    P = remove_redundant(HPolytope::normalized(std::move(H)));
  }
  throw Error(ErrorCode::kNotConverged, "max_contractive_set: iteration cap reached after " +
                                            std::to_string(options.max_iter) + " sweeps");
}

}  // namespace ralmpc

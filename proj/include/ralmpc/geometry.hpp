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

#include "ralmpc/types.hpp"

namespace ralmpc {

/// Halfspace polytope {x : H x <= h}.
struct HPolytope {
  Matrix H;
  Vector h;

  HPolytope() = default;
  HPolytope(Matrix H_, Vector h_);

  /// Canonical polytope {x : H x <= 1}.
  static HPolytope normalized(Matrix H_);
  /// Axis-aligned box {x : lo <= x <= hi}.
  static HPolytope box(const Vector& lo, const Vector& hi);

  Index dim() const { return H.cols(); }
  Index rows() const { return H.rows(); }
  bool is_normalized(double tol = 1e-12) const;
};

/// max_{x in P} a' x. Throws kUnbounded / kInfeasible.
double support(const HPolytope& P, const Vector& a);

/// Support values for every row of `directions` in one call.
Vector support_rows(const HPolytope& P, const Matrix& directions);

/// A maximizer of a' x over P.
Vector support_point(const HPolytope& P, const Vector& a);

bool membership(const HPolytope& P, const Vector& x, double tol = kFeasibilityTol);

/// Vertices of the unit hypercube [-1, 1]^p: all sign patterns in
/// lexicographic order with +1 preceding -1.
std::vector<Vector> hypercube_vertices(int p);

/// Drops rows implied by the others (one LP per row) and exact duplicates.
HPolytope remove_redundant(const HPolytope& P);

struct ContractiveSetOptions {
  int max_iter = 200;
  double tol = 1e-9;
};

/// Largest set P in {x : Z x <= 1} with A P contained in lambda P for every
/// vertex matrix A. Returned in canonical form.
HPolytope max_contractive_set(const std::vector<Matrix>& vertices, const Matrix& Z_rows,
                              double lambda, const ContractiveSetOptions& options = {});

}  // namespace ralmpc

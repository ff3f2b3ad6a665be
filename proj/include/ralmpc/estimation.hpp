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

#include <deque>

#include "ralmpc/model.hpp"

namespace ralmpc {

/// Parameters consistent with one observed transition: {theta : G theta <= g}.
struct NonFalsifiedSet {
  Matrix G_theta;
  Vector g_theta;
};

NonFalsifiedSet nonfalsified(const UncertainLinearSystem& sys, const Vector& x_prev,
                             const Vector& u_prev, const Vector& x_next);

/// Moving-window hypercube estimator.
struct EstimatorState {
  std::deque<NonFalsifiedSet> window;  ///< at most M + 2 sets, oldest first
  ParameterHypercube current;
  int M = 10;

  EstimatorState() = default;
  EstimatorState(ParameterHypercube initial, int window_length);
};

/// Per-coordinate bounds of prev ∩ window, from 2p LPs. Throws
/// kInfeasibleIntersection when the intersection is empty.
std::pair<Vector, Vector> window_bounds(const ParameterHypercube& prev,
                                        const std::deque<NonFalsifiedSet>& window);

/// Pushes `new_delta` into the window and returns the updated hypercube, which
/// is also stored in `state.current`.
ParameterHypercube hypercube_update(EstimatorState& state, const NonFalsifiedSet& new_delta);

}  // namespace ralmpc

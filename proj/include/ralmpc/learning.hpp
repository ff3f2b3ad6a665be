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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ralmpc/tube.hpp"

namespace ralmpc {

/// Sparse convex weights over sample-set entries.
using Certificate = std::vector<std::pair<Index, double>>;

struct SampleEntry {
  Vector x;
  Vector v;
  double s = 0.0;
  double J_wc = 0.0;
  int h = 0;  ///< iteration (-1 for steady-state padding)
  int t = 0;  ///< closed-loop time
  int k = 0;  ///< prediction step
  /// Weights whose combination of entries contains the one-step successor of
  /// this entry's tube under input K x + v.
  Certificate successor;
};

/// Tube sizes and costs of the two steady-state padding entries at the origin.
struct SteadyPadding {
  double s_low = 0.0;   ///< s_steady, cost-to-go 0
  double s_high = 0.0;  ///< largest admissible size, cost-to-go J_high
  double J_high = 0.0;

  /// Cost-to-go of the origin with tube size s, interpolated between the two
  /// entries (0 below s_low).
  double value(double s) const;
  /// Padding weights (low, high) of the origin with tube size s <= s_high.
  std::pair<double, double> weights(double s) const;
};

/// Padding for the given constants: s_high = margin / max_j c_j and J_high =
/// L_cost (s_high - s_steady) / (1 - kappa0).
SteadyPadding make_padding(const TubeConstants& consts, double margin = 0.99);

struct SampleSet {
  std::vector<SampleEntry> entries;
  bool frozen = false;

  Index size() const { return static_cast<Index>(entries.size()); }
  bool empty() const { return entries.empty(); }
  Matrix states() const;  ///< n x |SS|
  Vector sizes() const;
  Vector costs() const;
};

/// Sample set from an initial trajectory ending at the origin, plus the two
/// padding entries. Validates the tube dynamics at Theta0 and the tightened
/// constraints; throws kInfeasibleInitialTrajectory otherwise.
SampleSet init_from_initial_trajectory(const TubeTrajectory& traj, const UncertainLinearSystem& sys,
                                       const HPolytope& P, const TubeConstants& consts,
                                       const WorstCaseCost& cost, const SteadyPadding& padding);

struct RecordedTrajectory {
  TubeTrajectory traj;
  int t = 0;
};

/// Adds the worst-case cost-to-go of every predicted trajectory of iteration
/// h. Terminal values use the multipliers stored in each trajectory, which
/// must refer to the current entries.
void append_iteration(SampleSet& ss, const std::vector<RecordedTrajectory>& predicted, int h,
                      const WorstCaseCost& cost);

/// sum_i lambda_i J_i for lambda in the simplex.
double terminal_cost(const SampleSet& ss, const Vector& lambda);

struct MembershipResult {
  bool member = false;
  Vector lambda;          ///< cheapest certificate when member
  double value = 0.0;     ///< terminal cost at lambda
};

/// Whether the tube (x, s) is contained in a convex combination of sample
/// tubes; returns the certificate minimizing the terminal cost.
MembershipResult robust_membership(const SampleSet& ss, const HPolytope& P, const Vector& x,
                                   double s, double tol = kFeasibilityTol);

/// Violation of the containment rows for a given certificate (<= 0 when
/// contained).
double containment_gap(const SampleSet& ss, const HPolytope& P, const Vector& x, double s,
                       const Vector& lambda);

void save(const SampleSet& ss, const std::string& path);
SampleSet load(const std::string& path);

inline constexpr int kSampleSetFormatVersion = 1;

}  // namespace ralmpc

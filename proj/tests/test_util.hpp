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

#include <initializer_list>

#include "ralmpc/model.hpp"

namespace testutil {

inline ralmpc::Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  ralmpc::Matrix M(static_cast<ralmpc::Index>(rows.size()),
                   static_cast<ralmpc::Index>(rows.begin()->size()));
  ralmpc::Index i = 0;
  for (const auto& r : rows) {
    ralmpc::Index j = 0;
    for (double v : r) M(i, j++) = v;
    ++i;
  }
  return M;
}

inline ralmpc::Vector vec(std::initializer_list<double> values) {
  ralmpc::Vector v(static_cast<ralmpc::Index>(values.size()));
  ralmpc::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

// x+ = (0.5 + 0.2 theta) x + u + d, |x| <= 1, |u| <= 1, |d| <= 0.1,
// theta in [-1, 1].
inline ralmpc::UncertainLinearSystem scalar_fixture() {
  ralmpc::UncertainLinearSystem sys;
  sys.A = {mat({{0.5}}), mat({{0.2}})};
  sys.B = {mat({{1.0}}), mat({{0.0}})};
  sys.D = ralmpc::HPolytope::box(vec({-0.1}), vec({0.1}));
  sys.F = mat({{1}, {-1}, {0}, {0}});
  sys.G = mat({{0}, {0}, {1}, {-1}});
  sys.theta0 = {vec({0.0}), 1.0};
  sys.validate();
  return sys;
}

}  // namespace testutil

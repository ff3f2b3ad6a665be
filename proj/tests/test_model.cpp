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

#include <random>

#include "doctest.h"
#include "ralmpc/model.hpp"
#include "test_util.hpp"

using namespace ralmpc;
using testutil::mat;
using testutil::scalar_fixture;
using testutil::vec;

TEST_CASE("eval_matrices: scalar fixture") {
  const UncertainLinearSystem sys = scalar_fixture();
  auto [A, B] = eval_matrices(sys, vec({0.0}));
  CHECK(A(0, 0) == doctest::Approx(0.5));
  CHECK(B(0, 0) == doctest::Approx(1.0));
  A = eval_matrices(sys, vec({1.0})).first;
  CHECK(A(0, 0) == doctest::Approx(0.7));
  CHECK_THROWS_AS(eval_matrices(sys, vec({1.0, 2.0})), Error);
}

TEST_CASE("eval_matrices: benchmark at the true parameters") {
  const UncertainLinearSystem sys = msd_benchmark();
  const Vector theta_star = msd_theta({}, 0.3, 0.5);
  CHECK(theta_star(0) == doctest::Approx(1.0));
  CHECK(theta_star(1) == doctest::Approx(-1.0));
  const auto [A, B] = eval_matrices(sys, theta_star);
  CHECK(A(0, 0) == doctest::Approx(1.0));
  CHECK(A(0, 1) == doctest::Approx(0.1));
  CHECK(A(1, 0) == doctest::Approx(-0.05));
  CHECK(A(1, 1) == doctest::Approx(0.97));
  CHECK(B(0, 0) == doctest::Approx(0.0));
  CHECK(B(1, 0) == doctest::Approx(0.1));
}

TEST_CASE("d_matrix: examples") {
  const UncertainLinearSystem s = scalar_fixture();
  CHECK(d_matrix(s, vec({0}), vec({0})).isZero());
  CHECK(d_matrix(s, vec({1}), vec({0}))(0, 0) == doctest::Approx(0.2));

  const UncertainLinearSystem msd = msd_benchmark();
  const Matrix D = d_matrix(msd, vec({1, 0}), vec({0}));
  REQUIRE(D.rows() == 2);
  REQUIRE(D.cols() == 2);
  CHECK(D(0, 0) == 0.0);
  CHECK(D(0, 1) == 0.0);
  CHECK(D(1, 0) == doctest::Approx(0.0));
  CHECK(D(1, 1) == doctest::Approx(-0.05));
  CHECK_THROWS_AS(d_matrix(msd, vec({1}), vec({0})), Error);
}

TEST_CASE("step_truth: examples") {
  const UncertainLinearSystem s = scalar_fixture();
  CHECK(step_truth(s, vec({0}), vec({0}), vec({0.3}), vec({0}))(0) == 0.0);
  CHECK(step_truth(s, vec({1}), vec({0}), vec({1.0}), vec({0.1}))(0) == doctest::Approx(0.8));
  CHECK_THROWS_AS(step_truth(s, vec({1}), vec({0}), vec({1.5}), vec({0})), Error);
  CHECK_THROWS_AS(step_truth(s, vec({1}), vec({0}), vec({0.0}), vec({0.5})), Error);

  const UncertainLinearSystem msd = msd_benchmark();
  const Vector x = step_truth(msd, vec({4, 0}), vec({0}), vec({1, -1}), vec({0, 0.01}));
  CHECK(x(0) == doctest::Approx(4.0));
  CHECK(x(1) == doctest::Approx(-0.19));
}

TEST_CASE("msd_benchmark: normalization") {
  const UncertainLinearSystem sys = msd_benchmark();
  CHECK(sys.n() == 2);
  CHECK(sys.m() == 1);
  CHECK(sys.p() == 2);
  CHECK(sys.theta0.center.isZero());
  CHECK(sys.theta0.radius == 1.0);
  // Row for x1 <= 4.1.
  bool found = false;
  for (Index j = 0; j < sys.q(); ++j) {
    if (std::abs(sys.F(j, 0) - 1.0 / 4.1) < 1e-12 && sys.F(j, 1) == 0.0 && sys.G(j, 0) == 0.0)
      found = true;
  }
  CHECK(found);
  // Flat disturbance set {0} x [-0.02, 0.02].
  CHECK(support(sys.D, vec({0, 1})) == doctest::Approx(0.02));
  CHECK(support(sys.D, vec({0, -1})) == doctest::Approx(0.02));
  CHECK(std::abs(support(sys.D, vec({1, 0}))) <= 1e-9);
  CHECK(std::abs(support(sys.D, vec({-1, 0}))) <= 1e-9);
}

TEST_CASE("parameter hypercube") {
  ParameterHypercube T{vec({0.5, -0.5}), 0.25};
  CHECK(T.contains(vec({0.75, -0.25})));
  CHECK_FALSE(T.contains(vec({0.8, -0.5})));
  const auto V = T.vertices();
  REQUIRE(V.size() == 4);
  CHECK(V[0] == vec({0.75, -0.25}));
  CHECK(V[3] == vec({0.25, -0.75}));
}

TEST_CASE("validate: rejects malformed systems") {
  UncertainLinearSystem sys = scalar_fixture();
  sys.B.pop_back();
  CHECK_THROWS_AS(sys.validate(), Error);
  sys = scalar_fixture();
  sys.F = mat({{1}, {0}, {0}, {0}});  // x unbounded below
  CHECK_THROWS_AS(sys.validate(), Error);
}

TEST_CASE("model: affinity and uncertainty identity") {
  const UncertainLinearSystem sys = msd_benchmark();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const Vector ta = vec({unif(rng), unif(rng)}), tb = vec({unif(rng), unif(rng)});
    const auto [Aa, Ba] = eval_matrices(sys, ta);
    const auto [Ab, Bb] = eval_matrices(sys, tb);
    const auto [Am, Bm] = eval_matrices(sys, 0.5 * ta + 0.5 * tb);
    CHECK((Am - (0.5 * Aa + 0.5 * Ab)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((Bm - (0.5 * Ba + 0.5 * Bb)).cwiseAbs().maxCoeff() <= 1e-15);

    const Vector x = vec({4 * unif(rng), 5 * unif(rng)}), u = vec({15 * unif(rng)});
    const Vector lhs = d_matrix(sys, x, u) * ta;
    const Vector rhs = (Aa - sys.A[0]) * x + (Ba - sys.B[0]) * u;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("step_truth: consistent with dense evaluation") {
  const UncertainLinearSystem sys = msd_benchmark();
  const Vector theta_star = vec({1, -1});
  const auto [A, B] = eval_matrices(sys, theta_star);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const Vector x = vec({2.15 + 2.15 * unif(rng), 5 * unif(rng)});
    const Vector u = vec({15 * unif(rng)});
    const Vector d = vec({0, 0.02 * unif(rng)});
    const Vector next = step_truth(sys, x, u, theta_star, d);
    CHECK(next.allFinite());
    CHECK((next - (A * x + B * u + d)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

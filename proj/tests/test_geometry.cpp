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
#include "ralmpc/geometry.hpp"
#include "test_util.hpp"

using namespace ralmpc;
using testutil::mat;
using testutil::vec;

namespace {

// Vertices of a bounded 2-D polytope: intersections of row pairs that satisfy
// every row.
std::vector<Vector> vertices_2d(const HPolytope& P) {
  std::vector<Vector> out;
  for (Index i = 0; i < P.rows(); ++i) {
    for (Index j = i + 1; j < P.rows(); ++j) {
      Eigen::Matrix2d M;
      M.row(0) = P.H.row(i);
      M.row(1) = P.H.row(j);
      if (std::abs(M.determinant()) < 1e-10) continue;
      Vector x = M.inverse() * Eigen::Vector2d(P.h(i), P.h(j));
      if (membership(P, x, 1e-9)) out.push_back(x);
    }
  }
  return out;
}

// Random bounded polytope around the origin: rows with random normals and
// offsets in [0.5, 2], plus a loose box so the set stays bounded.
HPolytope random_polytope_2d(std::mt19937_64& rng, int rows) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> off(0.5, 2.0);
  Matrix H(rows + 4, 2);
  Vector h(rows + 4);
  for (int i = 0; i < rows; ++i) {
    H.row(i) << gauss(rng), gauss(rng);
    h(i) = off(rng) * H.row(i).norm();
  }
  H.bottomRows(4) << 1, 0, -1, 0, 0, 1, 0, -1;
  h.tail(4).setConstant(5.0);
  return HPolytope(H, h);
}

}  // namespace

TEST_CASE("support: unit interval") {
  HPolytope P(mat({{1}, {-1}}), vec({1, 1}));
  CHECK(support(P, vec({1})) == doctest::Approx(1.0));
  CHECK(support(P, vec({0})) == doctest::Approx(0.0));
}

TEST_CASE("support: unit box in the plane") {
  HPolytope P = HPolytope::box(vec({-1, -1}), vec({1, 1}));
  CHECK(support(P, vec({1, 2})) == doctest::Approx(3.0));
  const Vector x = support_point(P, vec({1, 2}));
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(1.0));
}

TEST_CASE("support: unbounded and empty") {
  HPolytope half(mat({{1, 0}}), vec({1}));
  CHECK_THROWS_AS(support(half, vec({0, 1})), Error);
  try {
    support(half, vec({-1, 0}));
    FAIL("expected unbounded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnbounded);
  }
  HPolytope empty(mat({{1}, {-1}}), vec({-1, -1}));
  try {
    support(empty, vec({1}));
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInfeasible);
  }
}

TEST_CASE("support: matches vertex enumeration on random polygons") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + static_cast<int>(rng() % 4);  // at most 8 rows with the box
    const HPolytope P = random_polytope_2d(rng, rows);
    const std::vector<Vector> V = vertices_2d(P);
    REQUIRE(V.size() >= 3);
    for (int d = 0; d < 5; ++d) {
      const Vector a = vec({gauss(rng), gauss(rng)});
      double best = -1e300;
      for (const Vector& v : V) best = std::max(best, a.dot(v));
      CHECK(std::abs(support(P, a) - best) <= 1e-7);
    }
  }
}

TEST_CASE("membership: boundary and tolerance") {
  HPolytope P = HPolytope::box(vec({-1, -1}), vec({1, 1}));
  CHECK(membership(P, vec({0, 0})));
  CHECK_FALSE(membership(P, vec({1.0000001, 0}), 1e-9));
  CHECK(membership(P, vec({1, 1}), 0.0));
  CHECK_THROWS_AS(membership(P, vec({0, 0, 0})), Error);
}

TEST_CASE("polytope: construction checks") {
  CHECK_THROWS_AS(HPolytope(mat({{1, 0}}), vec({1, 2})), Error);
  CHECK(HPolytope::normalized(mat({{1}, {-1}})).is_normalized());
  CHECK_FALSE(HPolytope(mat({{1}, {-1}}), vec({1, 2})).is_normalized());
}

TEST_CASE("hypercube vertices") {
  const auto v1 = hypercube_vertices(1);
  REQUIRE(v1.size() == 2);
  CHECK(v1[0](0) == 1.0);
  CHECK(v1[1](0) == -1.0);
  const auto v2 = hypercube_vertices(2);
  REQUIRE(v2.size() == 4);
  bool found = false;
  for (const Vector& v : v2) found = found || (v(0) == 1.0 && v(1) == -1.0);
  CHECK(found);
  CHECK(v2[0] == vec({1, 1}));
  CHECK(v2[3] == vec({-1, -1}));
  CHECK(hypercube_vertices(3).size() == 8);
  for (const Vector& v : hypercube_vertices(5))
    for (Index i = 0; i < v.size(); ++i) CHECK(std::abs(v(i)) == 1.0);
  CHECK_THROWS_AS(hypercube_vertices(0), Error);
  CHECK_THROWS_AS(hypercube_vertices(17), Error);
}

TEST_CASE("remove_redundant: examples") {
  const HPolytope P = remove_redundant(HPolytope(mat({{1}, {1}, {-1}}), vec({1, 2, 1})));
  REQUIRE(P.rows() == 2);
  CHECK(support(P, vec({1})) == doctest::Approx(1.0));
  CHECK(support(P, vec({-1})) == doctest::Approx(1.0));

  const HPolytope box = HPolytope::box(vec({-1, -1}), vec({1, 1}));
  const HPolytope same = remove_redundant(box);
  CHECK(same.rows() == 4);
  CHECK(same.H == box.H);
  CHECK(same.h == box.h);

  Matrix H(8, 2);
  H << box.H, box.H;
  Vector h(8);
  h << box.h, box.h;
  CHECK(remove_redundant(HPolytope(H, h)).rows() == 4);

  CHECK_THROWS_AS(remove_redundant(HPolytope(mat({{1}, {-1}}), vec({-1, -1}))), Error);
}

TEST_CASE("remove_redundant: membership preserved") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-6.0, 6.0);
  for (int trial = 0; trial < 20; ++trial) {
    const HPolytope P = random_polytope_2d(rng, 10);
    const HPolytope R = remove_redundant(P);
    CHECK(R.rows() <= P.rows());
    for (int k = 0; k < 1000; ++k) {
      const Vector x = vec({unif(rng), unif(rng)});
      // Skip points within rounding distance of the boundary.
      const double margin = (P.H * x - P.h).maxCoeff();
      if (std::abs(margin) < 1e-9) continue;
      CHECK(membership(P, x, 0.0) == membership(R, x, 0.0));
    }
  }
}

TEST_CASE("max_contractive_set: scalar examples") {
  const Matrix Z = mat({{1}, {-1}});
  HPolytope P = max_contractive_set({mat({{0.5}})}, Z, 0.5);
  CHECK(support(P, vec({1})) == doctest::Approx(1.0));
  CHECK(support(P, vec({-1})) == doctest::Approx(1.0));
  CHECK(P.is_normalized());

  HPolytope N = max_contractive_set({mat({{0.0}})}, Z, 0.3);
  CHECK(support(N, vec({1})) == doctest::Approx(1.0));
  CHECK(support(N, vec({-1})) == doctest::Approx(1.0));

  // |x| <= 1 shrinks to nothing useful when A = 2 cannot contract: the only
  // contractive set is {0}, which has no interior.
  CHECK_THROWS_AS(max_contractive_set({mat({{2.0}})}, Z, 0.5, {20, 1e-9}), Error);
}

TEST_CASE("max_contractive_set: boundary points contract for every vertex") {
  const std::vector<Matrix> A = {mat({{0.9, 0.2}, {-0.1, 0.7}}), mat({{0.8, 0.3}, {-0.2, 0.75}})};
  const Matrix Z = mat({{1, 0}, {-1, 0}, {0, 0.5}, {0, -0.5}, {0.4, 0.4}});
  const double lambda = 0.95;
  const HPolytope P = max_contractive_set(A, Z, lambda);
  REQUIRE(P.is_normalized());
  for (Index j = 0; j < Z.rows(); ++j) {
    Vector z = Z.row(j).transpose();
    CHECK(support(P, z) <= 1.0 + 1e-7);
  }
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 1000; ++k) {
    Vector d = vec({gauss(rng), gauss(rng)});
    const Vector x = d / (P.H * d).maxCoeff();  // on the boundary
    for (const Matrix& Ai : A) CHECK((P.H * (Ai * x)).maxCoeff() <= lambda + 1e-7);
  }
}

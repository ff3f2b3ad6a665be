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

#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "msd_fixture.hpp"
#include "ralmpc/learning.hpp"
#include "test_util.hpp"

using namespace ralmpc;
using testutil::mat;
using testutil::scalar_fixture;
using testutil::vec;

namespace {

const HPolytope kUnit = HPolytope::normalized(mat({{1}, {-1}}));

// Scalar fixture with K = 0, Q = 1, R = 0: L_cost = 2, s_steady = 1/3.
struct ScalarSetup {
  UncertainLinearSystem sys = scalar_fixture();
  TubeConstants consts;
  WorstCaseCost cost;
  SteadyPadding padding;

  ScalarSetup() {
    consts = compute_constants(sys, mat({{0}}), kUnit, vec({0.0}), 1.0, mat({{1}}), mat({{0}}));
    cost = {mat({{0}}), mat({{1}}), mat({{0}}), consts.L_cost, consts.steady_cost()};
    padding = make_padding(consts);
  }
};

SampleEntry entry(std::initializer_list<double> x, double s, double J) {
  SampleEntry e;
  e.x = vec(x);
  e.v = Vector::Zero(1);
  e.s = s;
  e.J_wc = J;
  return e;
}

// Pure quadratic excess x' x with no tube or steady contribution.
WorstCaseCost quadratic_cost(Index n) {
  return {Matrix::Zero(1, n), Matrix::Identity(n, n), Matrix::Zero(1, 1), 0.0, 0.0};
}

std::string temp_path(const char* name) { return std::string("/tmp/ralmpc_test_") + name; }

Vector dense(const Certificate& c, Index size) {
  Vector out = Vector::Zero(size);
  for (const auto& [j, w] : c) out(j) += w;
  return out;
}

// Short learning run on the benchmark, shared by the property tests below.
const ExperimentResult& msd_run() {
  static const ExperimentResult result = [] {
    const auto& f = testutil::msd_fixture();
    ExperimentConfig cfg = f.cfg;
    cfg.N = 8;
    cfg.H = 3;
    return run_experiment(cfg, f.sys, f.offline, {true, false});
  }();
  return result;
}

}  // namespace

TEST_CASE("padding: values and weights") {
  ScalarSetup S;
  CHECK(S.padding.s_low == doctest::Approx(1.0 / 3.0));
  CHECK(S.padding.s_high == doctest::Approx(0.99));
  CHECK(S.padding.J_high == doctest::Approx(2.0 * (0.99 - 1.0 / 3.0) / 0.3));
  CHECK(S.padding.value(0.1) == 0.0);
  CHECK(S.padding.value(S.padding.s_high) == doctest::Approx(S.padding.J_high));
  const double mid = 0.5 * (S.padding.s_low + S.padding.s_high);
  CHECK(S.padding.value(mid) == doctest::Approx(0.5 * S.padding.J_high));
  auto [wl, wh] = S.padding.weights(mid);
  CHECK(wl == doctest::Approx(0.5));
  CHECK(wh == doctest::Approx(0.5));
  std::tie(wl, wh) = S.padding.weights(0.0);
  CHECK(wl == doctest::Approx(1.0));
  CHECK(wh == 0.0);
}

TEST_CASE("init: one transient step") {
  ScalarSetup S;
  TubeTrajectory tr;
  tr.x = {vec({0.5}), vec({0.0})};
  tr.v = {vec({-0.25})};
  tr.u = tr.v;
  tr.s = {0.0, 1.0 / 3.0};
  const SampleSet ss = init_from_initial_trajectory(tr, S.sys, kUnit, S.consts, S.cost, S.padding);
  REQUIRE(ss.size() == 3);
  // Recursion base: J = l_max(x0, v0, s0) - l_max,s.
  CHECK(ss.entries[0].J_wc == doctest::Approx(0.25 - 2.0 / 3.0));
  CHECK(ss.entries[0].J_wc == doctest::Approx(S.cost.excess(tr.x[0], tr.v[0], 0.0)));
  CHECK(ss.entries[1].x.isZero());
  CHECK(ss.entries[1].s == doctest::Approx(1.0 / 3.0));
  CHECK(ss.entries[1].J_wc == 0.0);
  CHECK(ss.entries[1].h == -1);
  CHECK(ss.entries[2].J_wc == doctest::Approx(S.padding.J_high));
  // The last step hands over to the low padding entry.
  const Vector succ = dense(ss.entries[0].successor, ss.size());
  CHECK(succ(1) == doctest::Approx(1.0));
  CHECK(succ(2) <= 1e-12);
}

TEST_CASE("init: a trajectory sitting at the origin costs nothing beyond its tube") {
  ScalarSetup S;
  TubeTrajectory tr;
  const int N = 4;
  double s = 0.0;
  for (int k = 0; k < N; ++k) {
    tr.x.push_back(vec({0.0}));
    tr.v.push_back(vec({0.0}));
    tr.s.push_back(s);
    s = S.consts.kappa0 * s + S.consts.d_bar;
  }
  tr.x.push_back(vec({0.0}));
  tr.s.push_back(s);
  const SampleSet ss = init_from_initial_trajectory(tr, S.sys, kUnit, S.consts, S.cost, S.padding);
  double J = 0.0;
  for (int k = N - 1; k >= 0; --k) {
    J += S.consts.L_cost * (tr.s[k] - S.consts.s_steady);
    CHECK(ss.entries[k].J_wc == doctest::Approx(J));
  }
}

TEST_CASE("init: infeasible trajectories are rejected") {
  ScalarSetup S;
  TubeTrajectory good;
  good.x = {vec({0.5}), vec({0.0})};
  good.v = {vec({-0.25})};
  good.s = {0.0, 1.0 / 3.0};
  auto expect_reject = [&](const TubeTrajectory& tr) {
    try {
      init_from_initial_trajectory(tr, S.sys, kUnit, S.consts, S.cost, S.padding);
      FAIL("expected rejection");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInfeasibleInitialTrajectory);
    }
  };
  TubeTrajectory bad = good;
  bad.s[0] = 0.1;
  expect_reject(bad);
  bad = good;
  bad.v[0] = vec({0.0});  // does not reach the origin
  expect_reject(bad);
  bad = good;
  bad.s[1] = 0.1;  // tube too small for the disturbance
  expect_reject(bad);
  bad = good;
  bad.x = {vec({1.0}), vec({0.0})};  // tube at the constraint bound
  bad.v = {vec({-0.5})};
  bad.s = {0.0, 0.5};
  CHECK_NOTHROW(init_from_initial_trajectory(bad, S.sys, kUnit, S.consts, S.cost, S.padding));
  bad.x = {vec({1.2}), vec({0.0})};
  bad.v = {vec({-0.6})};
  expect_reject(bad);
}

TEST_CASE("append_iteration: backward recursion") {
  SampleSet ss;
  ss.entries = {entry({0.0}, 0.0, 0.0)};
  TubeTrajectory tr;
  tr.x = {vec({std::sqrt(2.0)}), vec({1.0}), vec({0.0})};
  tr.v = {vec({0.0}), vec({0.0})};
  tr.s = {0.0, 0.0, 0.0};
  tr.lambda = vec({1.0});
  append_iteration(ss, {{tr, 3}}, 1, quadratic_cost(1));
  REQUIRE(ss.size() == 3);
  CHECK(ss.entries[1].J_wc == doctest::Approx(3.0));
  CHECK(ss.entries[2].J_wc == doctest::Approx(1.0));
  CHECK(ss.entries[1].h == 1);
  CHECK(ss.entries[1].t == 3);
  CHECK(ss.entries[2].k == 1);
  CHECK(ss.entries[1].successor == Certificate{{2, 1.0}});
  CHECK(ss.entries[2].successor == Certificate{{0, 1.0}});
}

TEST_CASE("append_iteration: terminal value only") {
  SampleSet ss;
  ss.entries = {entry({0.0}, 0.0, 5.0)};
  TubeTrajectory tr;
  tr.x = {vec({0.0}), vec({0.0})};
  tr.v = {vec({0.0})};
  tr.s = {0.0, 0.0};
  tr.lambda = vec({1.0});
  append_iteration(ss, {{tr, 0}}, 1, quadratic_cost(1));
  REQUIRE(ss.size() == 2);
  CHECK(ss.entries[1].J_wc == doctest::Approx(5.0));
}

TEST_CASE("append_iteration: frozen sets and missing multipliers") {
  SampleSet ss;
  ss.entries = {entry({0.0}, 0.0, 0.0)};
  TubeTrajectory tr;
  tr.x = {vec({1.0}), vec({0.0})};
  tr.v = {vec({0.0})};
  tr.s = {0.0, 0.0};
  try {
    append_iteration(ss, {{tr, 0}}, 1, quadratic_cost(1));
    FAIL("expected missing multiplier");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMissingTerminalMultiplier);
  }
  ss.frozen = true;
  tr.lambda = vec({1.0});
  append_iteration(ss, {{tr, 0}}, 1, quadratic_cost(1));
  CHECK(ss.size() == 1);
}

TEST_CASE("terminal_cost: examples") {
  SampleSet ss;
  ss.entries = {entry({0.0}, 0.0, 0.0), entry({1.0}, 0.0, 4.0)};
  CHECK(terminal_cost(ss, vec({0, 1})) == doctest::Approx(4.0));
  CHECK(terminal_cost(ss, vec({0.5, 0.5})) == doctest::Approx(2.0));
  CHECK_THROWS_AS(terminal_cost(ss, vec({0.7, 0.7})), Error);
  CHECK_THROWS_AS(terminal_cost(ss, vec({1.5, -0.5})), Error);
  SampleSet zero;
  zero.entries = {entry({0.0}, 0.0, 0.0), entry({1.0}, 0.0, 0.0)};
  CHECK(terminal_cost(zero, vec({0.3, 0.7})) == 0.0);
}

TEST_CASE("robust_membership: examples") {
  SampleSet one;
  one.entries = {entry({0.5}, 0.2, 1.0)};
  MembershipResult r = robust_membership(one, kUnit, vec({0.5}), 0.2);
  CHECK(r.member);
  CHECK(r.lambda(0) == doctest::Approx(1.0));
  CHECK(r.value == doctest::Approx(1.0));
  CHECK_FALSE(robust_membership(one, kUnit, vec({0.5}), 0.21).member);

  SampleSet two;
  two.entries = {entry({0.0}, 1.0, 0.0), entry({2.0}, 1.0, 2.0)};
  r = robust_membership(two, kUnit, vec({1.0}), 1.0);
  REQUIRE(r.member);
  CHECK(r.lambda(0) == doctest::Approx(0.5));
  CHECK(r.lambda(1) == doctest::Approx(0.5));
  // The cheapest certificate may use the full membership tolerance.
  CHECK(containment_gap(two, kUnit, vec({1.0}), 1.0, r.lambda) <= kFeasibilityTol + 1e-12);
  CHECK_THROWS_AS(robust_membership(two, kUnit, vec({1.0}), -1.0), Error);
}

TEST_CASE("save/load: round trip") {
  SampleSet ss;
  ss.frozen = true;
  SampleEntry a = entry({0.1, -1.0 / 3.0}, 0.123456789012345678, -2.5e-310);
  a.v = vec({std::nextafter(1.0, 2.0)});
  a.h = 2;
  a.t = 17;
  a.k = 4;
  a.successor = {{1, 0.25}, {0, 0.75}};
  SampleEntry b = entry({0.0, 0.0}, 0.0, 0.0);
  b.v = vec({0.0});
  b.h = -1;
  b.successor = {{1, 1.0}};
  ss.entries = {a, b};
  const std::string path = temp_path("ss.txt");
  save(ss, path);
  const SampleSet back = load(path);
  CHECK(back.frozen);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const SampleEntry& x = ss.entries[i];
    const SampleEntry& y = back.entries[i];
    CHECK(x.x == y.x);
    CHECK(x.v == y.v);
    CHECK(x.s == y.s);
    CHECK(x.J_wc == y.J_wc);
    CHECK(x.h == y.h);
    CHECK(x.t == y.t);
    CHECK(x.k == y.k);
    CHECK(x.successor == y.successor);
  }

  SampleSet empty;
  save(empty, path);
  CHECK(load(path).empty());
  std::remove(path.c_str());
}

TEST_CASE("save/load: malformed files") {
  const std::string path = temp_path("bad.txt");
  {
    std::ofstream os(path);
    os << "not-a-sampleset 1\n";
  }
  try {
    load(path);
    FAIL("expected malformed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMalformed);
  }
  {
    std::ofstream os(path);
    os << "ralmpc-sampleset 99\nfrozen 0\n";
  }
  try {
    load(path);
    FAIL("expected version mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVersionMismatch);
  }
  {
    std::ofstream os(path);
    os << "ralmpc-sampleset 1\nfrozen 0\ndims 1 1\nentries 2\n0 0 0 1 0 0.5 0 0\n";
  }
  CHECK_THROWS_AS(load(path), Error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load(temp_path("missing.txt")), Error);
}

TEST_CASE("sample set: stored entries satisfy the tightened constraints") {
  const auto& f = testutil::msd_fixture();
  const ExperimentResult& run = msd_run();
  const SampleSet& ss = run.sample_sets.back();
  CHECK(ss.size() > f.offline.sample0.size());
  for (const SampleEntry& e : ss.entries) {
    const Vector u = f.offline.K * e.x + e.v;
    const Vector row = f.sys.F * e.x + f.sys.G * u + f.offline.consts.c * e.s;
    CHECK(row.maxCoeff() <= 1.0 + 1e-6);
    CHECK(e.s >= 0.0);
  }
}

TEST_CASE("sample set: terminal value at fixed queries never increases") {
  const auto& f = testutil::msd_fixture();
  const ExperimentResult& run = msd_run();
  std::vector<const SampleSet*> sets = {&f.offline.sample0};
  for (const SampleSet& s : run.sample_sets) sets.push_back(&s);
  // Query points: every initial-trajectory entry, slightly shrunk.
  for (const SampleEntry& e : f.offline.sample0.entries) {
    double prev = std::numeric_limits<double>::infinity();
    for (const SampleSet* s : sets) {
      const MembershipResult r = robust_membership(*s, f.offline.P, e.x, 0.9 * e.s);
      REQUIRE(r.member);
      CHECK(r.value <= prev + 1e-6 * (1.0 + std::abs(prev)));
      prev = r.value;
    }
  }
}

TEST_CASE("sample set: convex successors stay in the safe set with decreasing cost") {
  const auto& f = testutil::msd_fixture();
  const ExperimentResult& run = msd_run();
  const SampleSet& ss = run.sample_sets.back();
  const StepRecord& last = run.iterations.back().steps.back();
  const Matrix& K = f.offline.K;
  const HPolytope& P = f.offline.P;
  const TubeConstants& c0 = f.offline.consts;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<Index> pick(0, ss.size() - 1);
  for (int member = 0; member < 50; ++member) {
    // Random convex combination of up to three entries.
    Vector lambda = Vector::Zero(ss.size());
    const int count = 1 + static_cast<int>(rng() % 3);
    for (int k = 0; k < count; ++k) lambda(pick(rng)) += unif(rng) + 1e-3;
    lambda /= lambda.sum();
    const Vector x = ss.states() * lambda;
    const double s = ss.sizes().dot(lambda);
    Vector v = Vector::Zero(1);
    Vector next = Vector::Zero(ss.size());
    for (Index i = 0; i < ss.size(); ++i) {
      if (lambda(i) == 0.0) continue;
      v += lambda(i) * ss.entries[i].v;
      next += lambda(i) * dense(ss.entries[i].successor, ss.size());
    }
    REQUIRE(containment_gap(ss, P, x, s, lambda) <= 1e-9);
    for (int cube = 0; cube < 5; ++cube) {
      // Hypercube nested in the last estimate, hence in every earlier one.
      const double eta = last.eta * unif(rng);
      Vector center = last.theta_bar;
      for (Index i = 0; i < center.size(); ++i) center(i) += (last.eta - eta) * (2 * unif(rng) - 1);
      const double rho = contraction_rate(f.sys, K, P, center);
      const auto [A, B] = eval_matrices(f.sys, center);
      const Vector xn = (A + B * K) * x + B * v;
      const double sn = (rho + eta * c0.L_B) * s + c0.d_bar + w_eta(f.sys, K, P.H, x, v, eta);
      CHECK(containment_gap(ss, P, xn, sn, next) <= 1e-6);
      CHECK(terminal_cost(ss, next) - terminal_cost(ss, lambda) <=
            -f.offline.cost(x, v, s) + f.offline.cost.steady + 1e-6);
    }
  }
}

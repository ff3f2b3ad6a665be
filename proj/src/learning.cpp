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

#include "ralmpc/learning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ralmpc/optimization.hpp"

namespace ralmpc {

double SteadyPadding::value(double s) const {
  if (s <= s_low) return 0.0;
  return weights(s).second * J_high;
}

std::pair<double, double> SteadyPadding::weights(double s) const {
  if (s <= s_low || s_high <= s_low) return {1.0, 0.0};
  const double hi = std::min(1.0, (s - s_low) / (s_high - s_low));
  return {1.0 - hi, hi};
}

SteadyPadding make_padding(const TubeConstants& consts, double margin) {
  const double cmax = consts.c.size() > 0 ? consts.c.maxCoeff() : 0.0;
  SteadyPadding out;
  out.s_low = consts.s_steady;
  require(cmax * consts.s_steady <= 1.0 + kFeasibilityTol, ErrorCode::kSteadyStateInfeasible,
          "make_padding: steady tube violates the tightened constraints");
  out.s_high = cmax > 0.0 ? margin / cmax : consts.s_steady;
  out.s_high = std::max(out.s_high, out.s_low);
  out.J_high = consts.L_cost * (out.s_high - out.s_low) / (1.0 - consts.kappa0);
  return out;
}

Matrix SampleSet::states() const {
  require(!entries.empty(), ErrorCode::kInvalidArgument, "SampleSet: empty");
  Matrix X(entries.front().x.size(), size());
  for (Index j = 0; j < size(); ++j) X.col(j) = entries[j].x;
  return X;
}

Vector SampleSet::sizes() const {
  Vector S(size());
  for (Index j = 0; j < size(); ++j) S(j) = entries[j].s;
  return S;
}

Vector SampleSet::costs() const {
  Vector J(size());
  for (Index j = 0; j < size(); ++j) J(j) = entries[j].J_wc;
  return J;
}

namespace {

Certificate sparsify(const Vector& lambda, double threshold = 1e-9) {
  Certificate out;
  double total = 0.0;
  for (Index j = 0; j < lambda.size(); ++j) {
    if (lambda(j) > threshold) {
      out.emplace_back(j, lambda(j));
      total += lambda(j);
    }
  }
  require(total > 0.0, ErrorCode::kSimplexViolation, "certificate has no positive weight");
  for (auto& [j, w] : out) w /= total;
  return out;
}

Certificate padding_certificate(const SteadyPadding& padding, Index low, Index high, double s) {
  auto [wl, wh] = padding.weights(s);
  Certificate out;
  if (wl > 0.0) out.emplace_back(low, wl);
  if (wh > 0.0) out.emplace_back(high, wh);
  return out;
}

}  // namespace

SampleSet init_from_initial_trajectory(const TubeTrajectory& traj, const UncertainLinearSystem& sys,
                                       const HPolytope& P, const TubeConstants& consts,
                                       const WorstCaseCost& cost, const SteadyPadding& padding) {
  const int Nbar = traj.horizon();
  const Index n = sys.n(), m = sys.m();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInfeasibleInitialTrajectory, what);
  };
  if (traj.x.size() != static_cast<std::size_t>(Nbar) + 1 ||
      traj.s.size() != static_cast<std::size_t>(Nbar) + 1) {
    fail("trajectory lengths are inconsistent");
  }

  const double tol = kFeasibilityTol;
  const ParameterHypercube& th = sys.theta0;
  auto [A, B] = eval_matrices(sys, th.center);
  const Matrix Acl = A + B * cost.K;
  if (traj.s.front() > tol) fail("initial tube size must be zero");
  for (int k = 0; k < Nbar; ++k) {
    const Vector& x = traj.x[k];
    const Vector& v = traj.v[k];
    const double s = traj.s[k];
    if (s < -tol) fail("negative tube size at step " + std::to_string(k));
    const Vector u = cost.K * x + v;
    const Vector row = sys.F * x + sys.G * u + consts.c * s;
    if (row.maxCoeff() > 1.0 + tol) fail("tightened constraint violated at step " + std::to_string(k));
    if ((Acl * x + B * v - traj.x[k + 1]).lpNorm<Eigen::Infinity>() > tol)
      fail("nominal dynamics violated at step " + std::to_string(k));
    const double s_min = (consts.rho + th.radius * consts.L_B) * s + consts.d_bar +
                         w_eta(sys, cost.K, P.H, x, v, th.radius);
    if (traj.s[k + 1] < s_min - tol) fail("tube dynamics violated at step " + std::to_string(k));
  }
  if (traj.x.back().lpNorm<Eigen::Infinity>() > tol)
    fail("trajectory must terminate at the origin");
  if (traj.s.back() > padding.s_high + tol) fail("terminal tube exceeds the padding range");

  SampleSet ss;
  const Index low = Nbar, high = Nbar + 1;
  double J = padding.value(traj.s.back());
  ss.entries.resize(static_cast<std::size_t>(Nbar) + 2);
  for (int k = Nbar - 1; k >= 0; --k) {
    J += cost.excess(traj.x[k], traj.v[k], traj.s[k]);
    SampleEntry& e = ss.entries[k];
    e.x = traj.x[k];
    e.v = traj.v[k];
    e.s = traj.s[k];
    e.J_wc = J;
    e.h = 0;
    e.t = 0;
    e.k = k;
    e.successor = k + 1 < Nbar ? Certificate{{k + 1, 1.0}}
                               : padding_certificate(padding, low, high, traj.s.back());
  }
  const double kappa = consts.kappa0;
  for (int i = 0; i < 2; ++i) {
    SampleEntry& e = ss.entries[Nbar + i];
    e.x = Vector::Zero(n);
    e.v = Vector::Zero(m);
    e.s = i == 0 ? padding.s_low : padding.s_high;
    e.J_wc = i == 0 ? 0.0 : padding.J_high;
    e.h = -1;
    e.t = 0;
    e.k = i;
    e.successor = padding_certificate(padding, low, high, kappa * e.s + consts.d_bar);
  }
  return ss;
}

void append_iteration(SampleSet& ss, const std::vector<RecordedTrajectory>& predicted, int h,
                      const WorstCaseCost& cost) {
  if (ss.frozen) return;
  const Vector J_prev = ss.costs();
  std::vector<SampleEntry> added;
  for (const RecordedTrajectory& rec : predicted) {
    const TubeTrajectory& tr = rec.traj;
    const int N = tr.horizon();
    if (tr.lambda.size() == 0)
      throw Error(ErrorCode::kMissingTerminalMultiplier,
                  "append_iteration: trajectory at t = " + std::to_string(rec.t) +
                      " has no terminal multipliers");
    require_dim(tr.lambda.size(), J_prev.size(), "append_iteration: multiplier length");
    const Index base = ss.size() + static_cast<Index>(added.size());
    std::vector<SampleEntry> block(static_cast<std::size_t>(N));
    double J = terminal_cost(ss, tr.lambda);
    for (int k = N - 1; k >= 0; --k) {
      J += cost.excess(tr.x[k], tr.v[k], tr.s[k]);
      SampleEntry& e = block[k];
      e.x = tr.x[k];
      e.v = tr.v[k];
      e.s = tr.s[k];
      e.J_wc = J;
      e.h = h;
      e.t = rec.t;
      e.k = k;
      e.successor = k + 1 < N ? Certificate{{base + k + 1, 1.0}} : sparsify(tr.lambda);
    }
    for (SampleEntry& e : block) added.push_back(std::move(e));
  }
  for (SampleEntry& e : added) ss.entries.push_back(std::move(e));
}

double terminal_cost(const SampleSet& ss, const Vector& lambda) {
  require_dim(lambda.size(), ss.size(), "terminal_cost: lambda");
  require((lambda.array() >= -1e-8).all() && std::abs(lambda.sum() - 1.0) <= 1e-8,
          ErrorCode::kSimplexViolation, "terminal_cost: lambda outside the simplex");
  return lambda.dot(ss.costs());
}

double containment_gap(const SampleSet& ss, const HPolytope& P, const Vector& x, double s,
                       const Vector& lambda) {
  require_dim(lambda.size(), ss.size(), "containment_gap: lambda");
  const Vector xs = ss.states() * lambda;
  const double sl = ss.sizes().dot(lambda);
  return (P.H * (x - xs)).maxCoeff() - (sl - s);
}

MembershipResult robust_membership(const SampleSet& ss, const HPolytope& P, const Vector& x,
                                   double s, double tol) {
  require(s >= 0.0, ErrorCode::kInvalidArgument, "robust_membership: negative tube size");
  require(!ss.empty(), ErrorCode::kInvalidArgument, "robust_membership: empty sample set");
  require_dim(x.size(), P.dim(), "robust_membership: x");
  const Index r = P.rows(), J = ss.size();
  // H x + s 1 <= (H X + 1 S') lambda,  lambda >= 0,  sum lambda = 1.
  Matrix G(r + J, J);
  Vector g(r + J);
  G.topRows(r) = -(P.H * ss.states() + Vector::Ones(r) * ss.sizes().transpose());
  g.head(r) = -(P.H * x + Vector::Constant(r, s)) + Vector::Constant(r, tol);
  G.bottomRows(J) = -Matrix::Identity(J, J);
  g.tail(J).setZero();
  const Matrix Aeq = Matrix::Ones(1, J);
  const Vector beq = Vector::Ones(1);
  QpSolution sol = solve_lp(ss.costs(), G, g, Aeq, beq);
  MembershipResult out;
  if (sol.status == SolveStatus::kInfeasible) return out;
  require(sol.optimal(), ErrorCode::kSolverFailure, "robust_membership: LP failed");
  out.member = true;
  out.lambda = sol.z.cwiseMax(0.0);
  out.lambda /= out.lambda.sum();
  out.value = sol.objective;
  return out;
}

namespace {

constexpr const char* kMagic = "ralmpc-sampleset";

void write_vector(std::ostream& os, const Vector& v) {
  for (Index i = 0; i < v.size(); ++i) os << ' ' << v(i);
}

// Token-based parsing: stream extraction rejects subnormal values.
bool read_double(std::istream& is, double& out) {
  std::string token;
  if (!(is >> token)) return false;
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size();
}

}  // namespace

void save(const SampleSet& ss, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::kIo, "save: cannot open " + path);
  os << std::setprecision(17);
  const Index n = ss.empty() ? 0 : ss.entries.front().x.size();
  const Index m = ss.empty() ? 0 : ss.entries.front().v.size();
  os << kMagic << ' ' << kSampleSetFormatVersion << '\n';
  os << "frozen " << (ss.frozen ? 1 : 0) << '\n';
  os << "dims " << n << ' ' << m << '\n';
  os << "entries " << ss.size() << '\n';
  for (const SampleEntry& e : ss.entries) {
    os << e.h << ' ' << e.t << ' ' << e.k;
    write_vector(os, e.x);
    write_vector(os, e.v);
    os << ' ' << e.s << ' ' << e.J_wc << ' ' << e.successor.size();
    for (const auto& [j, w] : e.successor) os << ' ' << j << ' ' << w;
    os << '\n';
  }
  os << "end\n";
  require(static_cast<bool>(os), ErrorCode::kIo, "save: write failed for " + path);
}

SampleSet load(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::kIo, "load: cannot open " + path);
  auto malformed = [&](const std::string& what) {
    throw Error(ErrorCode::kMalformed, "load: " + path + ": " + what);
  };
  auto expect = [&](const char* key) {
    std::string word;
    if (!(is >> word) || word != key) malformed(std::string("expected '") + key + "'");
  };

  std::string magic;
  int version = 0;
  if (!(is >> magic >> version) || magic != kMagic) malformed("bad header");
  if (version != kSampleSetFormatVersion)
    throw Error(ErrorCode::kVersionMismatch,
                "load: " + path + ": format version " + std::to_string(version));

  SampleSet ss;
  int frozen = 0;
  Index n = 0, m = 0, count = 0;
  expect("frozen");
  if (!(is >> frozen)) malformed("frozen flag");
  expect("dims");
  if (!(is >> n >> m) || n < 0 || m < 0) malformed("dimensions");
  expect("entries");
  if (!(is >> count) || count < 0) malformed("entry count");
  ss.frozen = frozen != 0;
  ss.entries.resize(static_cast<std::size_t>(count));
  for (SampleEntry& e : ss.entries) {
    e.x.resize(n);
    e.v.resize(m);
    std::size_t nsucc = 0;
    if (!(is >> e.h >> e.t >> e.k)) malformed("entry provenance");
    for (Index i = 0; i < n; ++i)
      if (!read_double(is, e.x(i))) malformed("entry state");
    for (Index i = 0; i < m; ++i)
      if (!read_double(is, e.v(i))) malformed("entry input");
    if (!read_double(is, e.s) || !read_double(is, e.J_wc) || !(is >> nsucc)) malformed("entry values");
    e.successor.resize(nsucc);
    for (auto& [j, w] : e.successor) {
      if (!(is >> j) || !read_double(is, w) || j < 0 || j >= count) malformed("successor certificate");
    }
  }
  expect("end");
  return ss;
}

}  // namespace ralmpc

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

#include "ralmpc/controller.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

namespace ralmpc {

VerifyReport offline_verify(const UncertainLinearSystem& sys, const Matrix& K,
                            const Matrix& P_lyap, const Matrix& Q, const Matrix& R) {
  require_dim(P_lyap.rows(), sys.n(), "offline_verify: P rows");
  require_dim(P_lyap.cols(), sys.n(), "offline_verify: P cols");
  VerifyReport report;
  report.stability_margin = std::numeric_limits<double>::infinity();
  const Matrix base = Q + K.transpose() * R * K;
  // A -> A' P A is matrix convex, so the vertices of Theta0 are the worst case.
  for (const Vector& theta : sys.theta0.vertices()) {
    auto [A, B] = eval_matrices(sys, theta);
    const Matrix Acl = A + B * K;
    Matrix residual = P_lyap - Acl.transpose() * P_lyap * Acl - base;
    residual = 0.5 * (residual + residual.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(residual, Eigen::EigenvaluesOnly);
    report.stability_margin = std::min(report.stability_margin, eig.eigenvalues().minCoeff());
  }
  report.stability_ok = report.stability_margin >= -1e-8;
  report.contraction_ok = true;
  return report;
}

VerifyReport offline_verify(const UncertainLinearSystem& sys, const Matrix& K,
                            const Matrix& P_lyap, const Matrix& Q, const Matrix& R,
                            const HPolytope& P) {
  VerifyReport report = offline_verify(sys, K, P_lyap, Q, R);
  report.contraction_sum = contraction_rate(sys, K, P, sys.theta0.center) +
                           sys.theta0.radius * parametric_lipschitz(sys, K, P);
  report.contraction_ok = report.contraction_sum < 1.0;
  return report;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Dense row `coef` over the v block plus scalar coefficients on other columns.
void push_row(Triplets& t, Index row, const Eigen::RowVectorXd& coef, Index col0 = 0) {
  for (Index j = 0; j < coef.size(); ++j)
    if (coef(j) != 0.0) t.emplace_back(row, col0 + j, coef(j));
}

SparseMatrix to_sparse(Index rows, Index cols, const Triplets& t) {
  SparseMatrix M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

}  // namespace

MpcProblem assemble(const MpcData& data, const Vector& x_t, const ParameterHypercube& theta,
                    double rho, const SampleSet* ss, int N, const AssembleOptions& options) {
  const UncertainLinearSystem& sys = *data.sys;
  const HPolytope& P = *data.P;
  const TubeConstants& cs = *data.consts;
  const WorstCaseCost& cost = *data.cost;
  require(N >= 1, ErrorCode::kInvalidArgument, "assemble: horizon must be positive");
  require_dim(x_t.size(), sys.n(), "assemble: state");
  require_dim(theta.dim(), sys.p(), "assemble: parameter center");
  const bool learned = options.mode == TerminalMode::kSampleSet;
  if (learned) {
    require(ss != nullptr && !ss->empty(), ErrorCode::kInvalidArgument,
            "assemble: empty sample set");
  }

  MpcProblem out;
  out.N = N;
  out.n = sys.n();
  out.m = sys.m();
  out.n_lambda = learned ? ss->size() : 0;
  out.mode = options.mode;
  out.x0 = x_t;
  out.theta = theta;
  out.rho = rho;
  const Index n = out.n, m = out.m, J = out.n_lambda, r = P.rows(), q = sys.q();
  const Index nv = N * m;
  const Index nz = out.tau_offset() + 1;
  const Matrix& K = cost.K;

  auto [A, B] = eval_matrices(sys, theta.center);
  out.Acl = A + B * K;
  out.B = B;

  // x_k = a[k] + M[k] v and u_k = K a[k] + U[k] v.
  std::vector<Vector> a(N + 1);
  std::vector<Matrix> M(N + 1), U(N);
  a[0] = x_t;
  M[0] = Matrix::Zero(n, nv);
  for (int k = 0; k < N; ++k) {
    U[k] = K * M[k];
    U[k].middleCols(k * m, m) += Matrix::Identity(m, m);
    a[k + 1] = out.Acl * a[k];
    M[k + 1] = out.Acl * M[k];
    M[k + 1].middleCols(k * m, m) += B;
  }

  // Objective: sum_k l(x_k, u_k) + L_cost s_k, plus tau.
  Matrix Pv = Matrix::Zero(nv, nv);
  Vector qv = Vector::Zero(nv);
  const Matrix& Q = cost.Q;
  const Matrix& R = cost.R;
  for (int k = 0; k < N; ++k) {
    const Vector ua = K * a[k];
    Pv += 2.0 * (M[k].transpose() * Q * M[k] + U[k].transpose() * R * U[k]);
    qv += 2.0 * (M[k].transpose() * Q * a[k] + U[k].transpose() * R * ua);
    out.constant += a[k].dot(Q * a[k]) + ua.dot(R * ua);
  }
  Pv = 0.5 * (Pv + Pv.transpose()).eval();
  {
    Triplets tp;
    for (Index j = 0; j < nv; ++j)
      for (Index i = 0; i < nv; ++i)
        if (Pv(i, j) != 0.0) tp.emplace_back(i, j, Pv(i, j));
    out.qp.Pq = to_sparse(nz, nz, tp);
  }
  out.qp.q = Vector::Zero(nz);
  out.qp.q.head(nv) = qv;
  for (int k = 0; k < N; ++k) out.qp.q(out.s_offset() + k) = cs.L_cost;
  out.qp.q(out.tau_offset()) = 1.0;

  const std::vector<Vector> verts = hypercube_vertices(sys.p());
  const double kappa = rho + theta.radius * cs.L_B;
  const Matrix FK = sys.F + sys.G * K;

  Triplets tg;
  std::vector<double> g;
  auto next_row = [&](double rhs) {
    g.push_back(rhs);
    return static_cast<Index>(g.size()) - 1;
  };

  // Tube rows: kappa s_k - s_{k+1} + eta H_i D(x_k, u_k) e_l <= -d_bar.
  for (int k = 0; k < N; ++k) {
    for (const Vector& e : verts) {
      Vector Dc = Vector::Zero(n);
      Matrix Dv = Matrix::Zero(n, nv);
      for (int i = 0; i < sys.p(); ++i) {
        if (e(i) == 0.0) continue;
        Dc += e(i) * (sys.A[i + 1] * a[k] + sys.B[i + 1] * (K * a[k]));
        Dv += e(i) * (sys.A[i + 1] * M[k] + sys.B[i + 1] * U[k]);
      }
      const Vector hc = theta.radius * (P.H * Dc);
      const Matrix hv = theta.radius * (P.H * Dv);
      for (Index i = 0; i < r; ++i) {
        const Index row = next_row(-cs.d_bar - hc(i));
        push_row(tg, row, hv.row(i));
        if (kappa != 0.0) tg.emplace_back(row, out.s_offset() + k, kappa);
        tg.emplace_back(row, out.s_offset() + k + 1, -1.0);
      }
    }
  }
  out.counts.epigraph_rows = static_cast<Index>(g.size());

  // Tightened constraints: (F + G K) x_k + G v_k + c s_k <= 1.
  for (int k = 0; k < N; ++k) {
    const Matrix coef = FK * M[k] + sys.G * (U[k] - K * M[k]);
    const Vector rhs = Vector::Constant(q, 1.0 - options.backoff) - FK * a[k];
    for (Index j = 0; j < q; ++j) {
      const Index row = next_row(rhs(j));
      push_row(tg, row, coef.row(j));
      if (cs.c(j) != 0.0) tg.emplace_back(row, out.s_offset() + k, cs.c(j));
    }
  }
  out.counts.tightened_rows = N * q;

  Triplets ta;
  std::vector<double> b;
  auto next_eq = [&](double rhs) {
    b.push_back(rhs);
    return static_cast<Index>(b.size()) - 1;
  };
  ta.emplace_back(next_eq(0.0), out.s_offset(), 1.0);  // s_0 = 0

  if (learned) {
    // H x_N + s_N <= (H X + 1 S') lambda, lambda >= 0, sum lambda = 1.
    const Matrix HX = P.H * ss->states();
    const Vector S = ss->sizes();
    const Matrix Hv = P.H * M[N];
    const Vector Hc = P.H * a[N];
    for (Index i = 0; i < r; ++i) {
      const Index row = next_row(-Hc(i));
      push_row(tg, row, Hv.row(i));
      tg.emplace_back(row, out.s_offset() + N, 1.0);
      for (Index j = 0; j < J; ++j) {
        const double val = -(HX(i, j) + S(j));
        if (val != 0.0) tg.emplace_back(row, out.lambda_offset() + j, val);
      }
    }
    for (Index j = 0; j < J; ++j) tg.emplace_back(next_row(0.0), out.lambda_offset() + j, -1.0);
    const Index sum_row = next_eq(1.0);
    for (Index j = 0; j < J; ++j) ta.emplace_back(sum_row, out.lambda_offset() + j, 1.0);
    out.counts.terminal_rows = r + J + 1;

    // tau = J_wc' lambda.
    const Vector Jwc = ss->costs();
    const Index tau_row = next_eq(0.0);
    ta.emplace_back(tau_row, out.tau_offset(), 1.0);
    for (Index j = 0; j < J; ++j)
      if (Jwc(j) != 0.0) ta.emplace_back(tau_row, out.lambda_offset() + j, -Jwc(j));
  } else {
    for (Index i = 0; i < n; ++i) {
      const Index row = next_eq(-a[N](i));
      push_row(ta, row, M[N].row(i));
    }
    tg.emplace_back(next_row(options.s_cap), out.s_offset() + N, 1.0);
    ta.emplace_back(next_eq(0.0), out.tau_offset(), 1.0);  // tau = 0
    out.counts.terminal_rows = n + 1;
  }

  out.qp.G = to_sparse(static_cast<Index>(g.size()), nz, tg);
  out.qp.g = Eigen::Map<const Vector>(g.data(), static_cast<Index>(g.size()));
  out.qp.A = to_sparse(static_cast<Index>(b.size()), nz, ta);
  out.qp.b = Eigen::Map<const Vector>(b.data(), static_cast<Index>(b.size()));
  out.counts.nominal_vars = nv;
  out.counts.extra_vars = nz - nv;
  return out;
}

namespace {

TubeTrajectory reconstruct(const MpcData& data, const MpcProblem& pb, const Vector& z) {
  const Matrix& K = data.cost->K;
  TubeTrajectory tr;
  tr.x.push_back(pb.x0);
  for (int k = 0; k < pb.N; ++k) {
    const Vector v = z.segment(pb.v_offset() + k * pb.m, pb.m);
    tr.v.push_back(v);
    tr.u.push_back(K * tr.x[k] + v);
    tr.w.push_back(w_eta(*data.sys, K, data.P->H, tr.x[k], v, pb.theta.radius));
    tr.x.push_back(pb.Acl * tr.x[k] + pb.B * v);
  }
  for (int k = 0; k <= pb.N; ++k) tr.s.push_back(z(pb.s_offset() + k));
  tr.s[0] = 0.0;
  if (pb.n_lambda > 0) {
    tr.lambda = z.segment(pb.lambda_offset(), pb.n_lambda).cwiseMax(0.0);
    tr.lambda /= tr.lambda.sum();
  }
  return tr;
}

}  // namespace

double trajectory_violation(const MpcData& data, const MpcProblem& pb,
                            const TubeTrajectory& tr) {
  const UncertainLinearSystem& sys = *data.sys;
  const TubeConstants& cs = *data.consts;
  const Matrix& K = data.cost->K;
  require(tr.x.size() == static_cast<std::size_t>(pb.N) + 1 &&
              tr.s.size() == static_cast<std::size_t>(pb.N) + 1 &&
              tr.v.size() == static_cast<std::size_t>(pb.N),
          ErrorCode::kDimensionMismatch, "trajectory_violation: horizon mismatch");
  const double kappa = pb.rho + pb.theta.radius * cs.L_B;
  double worst = std::max((tr.x.front() - pb.x0).lpNorm<Eigen::Infinity>(), tr.s.front());
  for (int k = 0; k < pb.N; ++k) {
    const Vector& x = tr.x[k];
    const Vector& v = tr.v[k];
    const Vector row = sys.F * x + sys.G * (K * x + v) + cs.c * tr.s[k];
    worst = std::max(worst, row.maxCoeff() - 1.0);
    const double w = w_eta(sys, K, data.P->H, x, v, pb.theta.radius);
    worst = std::max(worst, kappa * tr.s[k] + cs.d_bar + w - tr.s[k + 1]);
    const double scale = 1.0 + x.lpNorm<Eigen::Infinity>();
    worst = std::max(worst, (pb.Acl * x + pb.B * v - tr.x[k + 1]).lpNorm<Eigen::Infinity>() / scale);
  }
  return worst;
}

TubeTrajectory solve_mpc(const MpcData& data, const MpcProblem& pb, const QpSolver& solver) {
  QpSolution sol = solver.solve(pb.qp);
  if (sol.status == SolveStatus::kInfeasible)
    throw Error(ErrorCode::kInfeasible, "solve_mpc: problem is infeasible");
  if (!sol.optimal())
    throw Error(ErrorCode::kSolverFailure,
                std::string("solve_mpc: solver returned ") + std::string(to_string(sol.status)));
  TubeTrajectory tr = reconstruct(data, pb, sol.z);
  tr.J_opt = sol.objective + pb.constant;
  const double viol = trajectory_violation(data, pb, tr);
  require(viol <= kFeasibilityTol, ErrorCode::kSolverFailure,
          "solve_mpc: reconstructed trajectory violates constraints by " + std::to_string(viol));
  if (pb.mode == TerminalMode::kOrigin) tr.x.back().setZero();
  return tr;
}

Vector control_input(const TubeTrajectory& traj, const Vector& x_t, const Matrix& K) {
  require(!traj.v.empty(), ErrorCode::kInvalidArgument, "control_input: empty trajectory");
  return K * x_t + traj.v.front();
}

TubeTrajectory initial_trajectory(const MpcData& data, const SteadyPadding& padding,
                                  const Vector& x_s, int N_bar_max) {
  const UncertainLinearSystem& sys = *data.sys;
  const double rho0 = contraction_rate(sys, data.cost->K, *data.P, sys.theta0.center);
  AssembleOptions opt;
  opt.mode = TerminalMode::kOrigin;
  opt.s_cap = padding.s_high;

  auto attempt = [&](int N) -> std::optional<TubeTrajectory> {
    MpcProblem pb = assemble(data, x_s, sys.theta0, rho0, nullptr, N, opt);
    try {
      return solve_mpc(data, pb);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInfeasible) return std::nullopt;
      throw;
    }
  };

  // Feasibility is monotone in N (append steady steps), so bracket then bisect.
  int lo = 0, hi = 1;
  std::optional<TubeTrajectory> best;
  while (true) {
    best = attempt(hi);
    if (best) break;
    lo = hi;
    if (hi >= N_bar_max)
      throw Error(ErrorCode::kInfeasibleInitializer,
                  "initial_trajectory: no feasible horizon up to " + std::to_string(N_bar_max));
    hi = std::min(2 * hi, N_bar_max);
  }
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (auto tr = attempt(mid)) {
      hi = mid;
      best = std::move(tr);
    } else {
      lo = mid;
    }
  }
  return *best;
}

OfflineArtifacts build_offline(const UncertainLinearSystem& sys, const Matrix& K,
                               const Matrix& P_lyap, const Matrix& Q, const Matrix& R,
                               const Vector& x_s, const OfflineOptions& options) {
  sys.validate();
  OfflineArtifacts out;
  out.K = K;
  out.P_lyap = P_lyap;

  std::vector<Matrix> verts;
  for (const Vector& theta : sys.theta0.vertices()) {
    auto [A, B] = eval_matrices(sys, theta);
    verts.push_back(A + B * K);
  }
  ContractiveSetOptions cso;
  cso.max_iter = options.max_iter;
  const Matrix Z = sys.F + sys.G * K;
  Matrix rows = Z;
  if (options.symmetric) {
    rows.resize(2 * Z.rows(), Z.cols());
    rows << Z, -Z;
  }
  out.P = max_contractive_set(verts, rows, options.lambda, cso);

  out.report = offline_verify(sys, K, P_lyap, Q, R, out.P);
  require(out.report.stability_ok, ErrorCode::kAssumptionViolated,
          "build_offline: quadratic stability fails, margin " +
              std::to_string(out.report.stability_margin));
  require(out.report.contraction_ok, ErrorCode::kAssumptionViolated,
          "build_offline: rho0 + eta0 L_B = " + std::to_string(out.report.contraction_sum));

  out.consts = compute_constants(sys, K, out.P, sys.theta0.center, sys.theta0.radius, Q, R);
  out.cost.K = K;
  out.cost.Q = Q;
  out.cost.R = R;
  out.cost.L_cost = out.consts.L_cost;
  out.cost.steady = out.consts.steady_cost();
  out.padding = make_padding(out.consts, options.padding_margin);

  const MpcData data = out.data(sys);
  out.initial_traj = initial_trajectory(data, out.padding, x_s, options.N_bar_max);
  out.sample0 = init_from_initial_trajectory(out.initial_traj, sys, out.P, out.consts, out.cost,
                                             out.padding);
  return out;
}

double ContractionCache::operator()(const Vector& theta_bar) {
  if (!key_ || key_->size() != theta_bar.size() || *key_ != theta_bar) {
    value_ = contraction_rate(*sys_, K_, *P_, theta_bar);
    key_ = theta_bar;
  }
  return value_;
}

}  // namespace ralmpc

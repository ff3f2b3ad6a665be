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

#include "ralmpc/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

namespace ralmpc {

ExperimentConfig msd_config() {
  ExperimentConfig cfg;
  cfg.Q = Matrix::Zero(2, 2);
  cfg.Q.diagonal() << 1.0, 0.01;
  cfg.R = Matrix::Constant(1, 1, 0.1);
  // Riccati gain at the nominal parameters with the state weight scaled by
  // 100; verified at the vertices together with P_lyap.
  cfg.K.resize(1, 2);
  cfg.K << -19.740624615367555, -7.619599181404536;
  cfg.P_lyap.resize(2, 2);
  cfg.P_lyap << 377.19551849303025, 47.26277021851686, 47.26277021851686, 13.269680211442163;
  cfg.x_s.resize(2);
  cfg.x_s << 4.0, 0.0;
  cfg.offline.lambda = 0.85;
  cfg.theta_star = msd_theta(cfg.msd, 0.3, 0.5);
  cfg.disturbance.mode = DisturbanceMode::kConstant;
  cfg.disturbance.value.resize(2);
  cfg.disturbance.value << 0.0, cfg.msd.Ts * 0.1 / cfg.msd.mass;
  return cfg;
}

UncertainLinearSystem make_system(const ExperimentConfig& cfg) {
  UncertainLinearSystem sys = cfg.system == "msd" ? msd_benchmark(cfg.msd) : cfg.custom;
  sys.validate();
  return sys;
}

void ExperimentConfig::validate(const UncertainLinearSystem& sys) const {
  require(N >= 1, ErrorCode::kInvalidArgument, "config: N must be >= 1");
  require(H >= 1, ErrorCode::kInvalidArgument, "config: H must be >= 1");
  require(T_max >= 1, ErrorCode::kInvalidArgument, "config: T_max must be >= 1");
  require(M >= 0, ErrorCode::kInvalidArgument, "config: M must be >= 0");
  require_dim(Q.rows(), sys.n(), "config: Q");
  require_dim(R.rows(), sys.m(), "config: R");
  require_dim(K.rows(), sys.m(), "config: K rows");
  require_dim(K.cols(), sys.n(), "config: K cols");
  require_dim(x_s.size(), sys.n(), "config: x_s");
  require_dim(theta_star.size(), sys.p(), "config: theta_star");
  require(sys.theta0.contains(theta_star), ErrorCode::kInvalidArgument,
          "config: theta_star outside Theta0");
  if (disturbance.mode == DisturbanceMode::kConstant) {
    require_dim(disturbance.value.size(), sys.n(), "config: disturbance value");
    require(membership(sys.D, disturbance.value, 1e-12), ErrorCode::kInvalidArgument,
            "config: constant disturbance outside D");
  }
}

std::vector<Vector> disturbance_sequence(const DisturbanceSpec& spec, int length,
                                         const HPolytope& D) {
  require(length >= 0, ErrorCode::kInvalidArgument, "disturbance_sequence: negative length");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(length));
  const Index n = D.dim();
  std::mt19937_64 rng(spec.seed);
  switch (spec.mode) {
    case DisturbanceMode::kConstant: {
      require(membership(D, spec.value, 1e-12), ErrorCode::kInvalidArgument,
              "disturbance_sequence: value outside D");
      out.assign(static_cast<std::size_t>(length), spec.value);
      break;
    }
    case DisturbanceMode::kUniform: {
      Vector lo(n), hi(n);
      for (Index i = 0; i < n; ++i) {
        hi(i) = support(D, Vector::Unit(n, i));
        lo(i) = -support(D, -Vector::Unit(n, i));
      }
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      while (static_cast<int>(out.size()) < length) {
        Vector d(n);
        for (Index i = 0; i < n; ++i) d(i) = lo(i) + (hi(i) - lo(i)) * unit(rng);
        if (membership(D, d, 1e-12)) out.push_back(std::move(d));
      }
      break;
    }
    case DisturbanceMode::kExtremal: {
      // Basic optimal solutions of random linear objectives are vertices.
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int t = 0; t < length; ++t) {
        Vector a(n);
        for (Index i = 0; i < n; ++i) a(i) = gauss(rng);
        out.push_back(support_point(D, a));
      }
      break;
    }
  }
  return out;
}

namespace {

bool counts_match(const MpcProblem& pb, const UncertainLinearSystem& sys, Index r, Index S) {
  const AssemblyCounts& c = pb.counts;
  const Index N = pb.N;
  return c.nominal_vars == N * sys.m() && c.extra_vars == N + S + 2 &&
         c.epigraph_rows == N * r * (Index{1} << sys.p()) && c.terminal_rows == r + S + 1 &&
         c.tightened_rows == N * sys.q() && pb.qp.n_vars() == c.nominal_vars + c.extra_vars;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

IterationRecord run_iteration(const ExperimentConfig& cfg, const UncertainLinearSystem& sys,
                              const OfflineArtifacts& offline, EstimatorState& estimator,
                              SampleSet& ss, int h, const std::vector<Vector>& disturbances) {
  require(!ss.empty(), ErrorCode::kInvalidArgument, "run_iteration: empty sample set");
  require(static_cast<int>(disturbances.size()) >= cfg.T_max, ErrorCode::kInvalidArgument,
          "run_iteration: disturbance sequence too short");
  const MpcData data = offline.data(sys);
  const Matrix& K = offline.K;
  const InteriorPointSolver solver(cfg.solver);
  ContractionCache rho_of(sys, K, offline.P);
  const double steady = offline.cost.steady;

  IterationRecord rec;
  rec.h = h;
  std::vector<RecordedTrajectory> predicted;
  Vector x = cfg.x_s;
  Vector x_prev, u_prev;
  double J_prev = 0.0, stage_prev = 0.0;
  double eta_prev = estimator.current.radius;

  for (int t = 0; t < cfg.T_max; ++t) {
    if (t > 0) hypercube_update(estimator, nonfalsified(sys, x_prev, u_prev, x));
    const ParameterHypercube& theta = estimator.current;
    if (!theta.contains(cfg.theta_star, 1e-9)) rec.theta_star_contained = false;
    if (theta.radius > eta_prev) rec.eta_monotone = false;
    eta_prev = theta.radius;

    const auto start = std::chrono::steady_clock::now();
    const double rho = rho_of(theta.center);
    const MpcProblem pb = assemble(data, x, theta, rho, &ss, cfg.N);
    ++rec.structure_checked;
    if (!counts_match(pb, sys, offline.P.rows(), ss.size())) ++rec.structure_mismatches;
    TubeTrajectory tr;
    try {
      tr = solve_mpc(data, pb, solver);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "iteration " << h << ", t = " << t << ", x = " << x.transpose()
         << ", theta_bar = " << theta.center.transpose() << ", eta = " << theta.radius
         << ", |SS| = " << ss.size() << ": " << e.what();
      throw Error(e.code(), os.str());
    }
    const double elapsed = seconds_since(start);

    const Vector u = control_input(tr, x, K);
    StepRecord step;
    step.t = t;
    step.x = x;
    step.u = u;
    step.stage = stage_cost(cfg.Q, cfg.R, x, u);
    step.J_opt = tr.J_opt;
    step.theta_bar = theta.center;
    step.eta = theta.radius;
    step.solve_time = elapsed;
    step.constraint_margin = (sys.F * x + sys.G * u).maxCoeff() - 1.0;
    rec.max_constraint_margin = std::max(rec.max_constraint_margin, step.constraint_margin);

    if (t > 0) {
      const double excess = tr.J_opt - J_prev + stage_prev - steady;
      const double slack = 10.0 * kFeasibilityTol * (1.0 + std::abs(J_prev));
      ++rec.decrease_checked;
      if (excess <= 0.0) ++rec.decrease_strict;
      if (excess <= slack) ++rec.decrease_within_slack;
      rec.worst_decrease_excess = std::max(rec.worst_decrease_excess, excess);
    }
    J_prev = tr.J_opt;
    stage_prev = step.stage;
    rec.cost += step.stage;
    rec.steps.push_back(std::move(step));
    predicted.push_back({std::move(tr), t});

    x_prev = x;
    u_prev = u;
    x = step_truth(sys, x, u, cfg.theta_star, disturbances[static_cast<std::size_t>(t)]);
    if (x.norm() <= cfg.early_stop) break;
    if ((x - x_prev).norm() <= cfg.stationary_tol) break;
  }

  double total_time = 0.0;
  for (const StepRecord& s : rec.steps) total_time += s.solve_time;
  rec.avg_solve_time = total_time / static_cast<double>(rec.steps.size());
  append_iteration(ss, predicted, h, offline.cost);
  rec.ss_size = ss.size();
  return rec;
}

double closed_loop_cost(const IterationRecord& record) {
  double total = 0.0;
  for (const StepRecord& s : record.steps) total += s.stage;
  return total;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const UncertainLinearSystem& sys,
                                const OfflineArtifacts& offline, const RunOptions& options) {
  cfg.validate(sys);
  ExperimentResult result;
  result.offline = offline;
  EstimatorState estimator(sys.theta0, cfg.M);
  SampleSet ss = offline.sample0;
  ss.frozen = cfg.frozen;
  for (int h = 1; h <= cfg.H; ++h) {
    DisturbanceSpec spec = cfg.disturbance;
    spec.seed = cfg.disturbance.seed + static_cast<std::uint64_t>(h);
    const std::vector<Vector> d = disturbance_sequence(spec, cfg.T_max, sys.D);
    result.iterations.push_back(run_iteration(cfg, sys, offline, estimator, ss, h, d));
    if (options.keep_sample_sets) result.sample_sets.push_back(ss);
    if (options.verbose) {
      const IterationRecord& r = result.iterations.back();
      std::cerr << "N=" << cfg.N << (cfg.frozen ? " frozen" : "") << " h=" << h
                << " cost=" << r.cost << " steps=" << r.steps.size() << " |SS|=" << r.ss_size
                << " eta=" << estimator.current.radius << " avg_time=" << r.avg_solve_time
                << "s\n";
    }
  }
  return result;
}

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  std::vector<SummaryRow> rows;
  for (const IterationRecord& r : result.iterations) {
    SummaryRow row;
    row.h = r.h;
    row.cost = r.cost;
    row.avg_solve_time = r.avg_solve_time;
    row.steps = static_cast<int>(r.steps.size());
    row.ss_size = r.ss_size;
    row.eta = r.steps.empty() ? 0.0 : r.steps.back().eta;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path);
  os << std::setprecision(17);
  return os;
}

void write_matrix(std::ostream& os, const char* name, const Matrix& M) {
  os << name << ' ' << M.rows() << ' ' << M.cols();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) os << ' ' << M(i, j);
  os << '\n';
}

}  // namespace

void write_summary(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream os = open_out(path);
  os << kSummaryHeader << '\n';
  for (const SummaryRow& r : rows) {
    os << r.h << ',' << r.cost << ',' << r.avg_solve_time << ',' << r.steps << ',' << r.ss_size
       << ',' << r.eta << '\n';
  }
  require(static_cast<bool>(os), ErrorCode::kIo, "write failed for " + path);
}

std::vector<SummaryRow> read_summary(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path);
  std::string line;
  std::getline(is, line);
  require(line == kSummaryHeader, ErrorCode::kMalformed, "unexpected header in " + path);
  std::vector<SummaryRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream ls(line);
    for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
    require(f.size() == 6, ErrorCode::kMalformed, "bad row in " + path);
    SummaryRow r;
    r.h = std::stoi(f[0]);
    r.cost = std::strtod(f[1].c_str(), nullptr);
    r.avg_solve_time = std::strtod(f[2].c_str(), nullptr);
    r.steps = std::stoi(f[3]);
    r.ss_size = std::stol(f[4]);
    r.eta = std::strtod(f[5].c_str(), nullptr);
    rows.push_back(r);
  }
  return rows;
}

void export_result(const ExperimentResult& result, const ExperimentConfig& cfg,
                   const UncertainLinearSystem& sys, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto path = [&](const std::string& name) { return (std::filesystem::path(dir) / name).string(); };
  write_summary(summarize(result), path("summary.csv"));

  const Index n = sys.n(), m = sys.m();
  const int p = sys.p();
  for (const IterationRecord& r : result.iterations) {
    std::ofstream os = open_out(path("iteration_" + std::to_string(r.h) + ".csv"));
    os << 't';
    for (Index i = 0; i < n; ++i) os << ",x" << i + 1;
    for (Index i = 0; i < m; ++i) os << ",u" << i + 1;
    os << ",stage_cost,J_opt";
    for (int i = 0; i < p; ++i) os << ",theta_bar" << i + 1;
    os << ",eta,solve_time_s\n";
    for (const StepRecord& s : r.steps) {
      os << s.t;
      for (Index i = 0; i < n; ++i) os << ',' << s.x(i);
      for (Index i = 0; i < m; ++i) os << ',' << s.u(i);
      os << ',' << s.stage << ',' << s.J_opt;
      for (int i = 0; i < p; ++i) os << ',' << s.theta_bar(i);
      os << ',' << s.eta << ',' << s.solve_time << '\n';
    }
  }
  for (std::size_t i = 0; i < result.sample_sets.size(); ++i)
    save(result.sample_sets[i], path("sampleset_" + std::to_string(i + 1) + ".txt"));

  // First state component over time: initializer then every iteration.
  {
    std::ofstream os = open_out(path("fig2.csv"));
    os << "series,t,x1\n";
    const TubeTrajectory& init = result.offline.initial_traj;
    for (std::size_t t = 0; t < init.x.size(); ++t)
      os << "initial," << t << ',' << init.x[t](0) << '\n';
    for (const IterationRecord& r : result.iterations)
      for (const StepRecord& s : r.steps) os << "iteration_" << r.h << ',' << s.t << ',' << s.x(0) << '\n';
  }

  std::ofstream os = open_out(path("meta.txt"));
  const OfflineArtifacts& off = result.offline;
  os << "N " << cfg.N << "\nH " << cfg.H << "\nT_max " << cfg.T_max << "\nM " << cfg.M
     << "\nfrozen " << (cfg.frozen ? 1 : 0) << "\nseed " << cfg.disturbance.seed << '\n';
  for (int i = 0; i <= p; ++i) {
    write_matrix(os, ("A" + std::to_string(i)).c_str(), sys.A[i]);
    write_matrix(os, ("B" + std::to_string(i)).c_str(), sys.B[i]);
  }
  write_matrix(os, "F", sys.F);
  write_matrix(os, "G", sys.G);
  write_matrix(os, "D_H", sys.D.H);
  write_matrix(os, "D_h", sys.D.h);
  write_matrix(os, "K", off.K);
  write_matrix(os, "P_lyap", off.P_lyap);
  write_matrix(os, "P_H", off.P.H);
  write_matrix(os, "Q", cfg.Q);
  write_matrix(os, "R", cfg.R);
  os << "lambda " << cfg.offline.lambda << "\nrho0 " << off.consts.rho << "\nL_B "
     << off.consts.L_B << "\nd_bar " << off.consts.d_bar << "\nL_cost " << off.consts.L_cost
     << "\ns_steady " << off.consts.s_steady << "\nsteady_cost " << off.cost.steady
     << "\nkappa0 " << off.consts.kappa0 << '\n';
  write_matrix(os, "c", off.consts.c);
  os << "padding_s_high " << off.padding.s_high << "\npadding_J_high " << off.padding.J_high
     << "\ninitial_horizon " << off.initial_traj.horizon() << "\nstability_margin "
     << off.report.stability_margin << "\nfeasibility_tol " << kFeasibilityTol
     << "\nsolver_tol " << cfg.solver.tol << '\n';
}

std::vector<CompareRow> run_compare(const ExperimentConfig& cfg, const RunOptions& options) {
  const UncertainLinearSystem sys = make_system(cfg);
  const OfflineArtifacts offline =
      build_offline(sys, cfg.K, cfg.P_lyap, cfg.Q, cfg.R, cfg.x_s, cfg.offline);
  std::vector<CompareRow> rows;
  auto run = [&](int N, bool frozen) {
    ExperimentConfig c = cfg;
    c.N = N;
    c.frozen = frozen;
    const ExperimentResult res = run_experiment(c, sys, offline, options);
    const std::string name = (frozen ? "frozen_N" : "ralmpc_N") + std::to_string(N);
    export_result(res, c, sys, (std::filesystem::path(cfg.out_dir) / name).string());
    double time = 0.0;
    for (const IterationRecord& r : res.iterations) time += r.avg_solve_time;
    rows.push_back({frozen ? "frozen-baseline" : "ralmpc", N, res.final_cost(),
                    time / static_cast<double>(res.iterations.size())});
  };
  for (int N : cfg.compare_horizons) run(N, false);
  run(cfg.frozen_N, true);

  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream os = open_out((std::filesystem::path(cfg.out_dir) / "table.csv").string());
  os << "mode,N,final_cost,avg_solve_time_s\n";
  for (const CompareRow& r : rows)
    os << r.mode << ',' << r.N << ',' << r.cost << ',' << r.avg_solve_time << '\n';
  return rows;
}

}  // namespace ralmpc

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

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "ralmpc/optimization.hpp"

namespace ralmpc {
namespace {

using RowMajorSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Inequality rows split into simple bounds (one nonzero, folded into the
// primal diagonal) and general rows (kept in the augmented system).
struct RowSplit {
  std::vector<Index> kept;      // original index of every kept row
  std::vector<Index> general;   // positions into `kept`
  std::vector<Index> singleton; // positions into `kept`
  std::vector<Index> single_col;
  std::vector<double> single_coef;
  bool trivially_infeasible = false;
};

RowSplit split_rows(const RowMajorSparse& G, const Vector& g) {
  RowSplit split;
  for (Index i = 0; i < G.rows(); ++i) {
    Index nnz = 0, col = -1;
    double coef = 0.0;
    for (RowMajorSparse::InnerIterator it(G, i); it; ++it) {
      if (it.value() != 0.0) {
        ++nnz;
        col = it.col();
        coef = it.value();
      }
    }
    if (nnz == 0) {
      if (g(i) < -1e-12) split.trivially_infeasible = true;
      continue;
    }
    const Index pos = static_cast<Index>(split.kept.size());
    split.kept.push_back(i);
    if (nnz == 1) {
      split.singleton.push_back(pos);
      split.single_col.push_back(col);
      split.single_coef.push_back(coef);
    } else {
      split.general.push_back(pos);
    }
  }
  return split;
}

class KktSystem {
 public:
  KktSystem(const SparseMatrix& P, const SparseMatrix& A, const SparseMatrix& Gg, double reg)
      : n_(P.rows()), me_(A.rows()), mg_(Gg.rows()), reg_(reg) {
    const Index dim = n_ + me_ + mg_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(P.nonZeros() + A.nonZeros() + Gg.nonZeros() + dim);
    for (Index k = 0; k < P.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(P, k); it; ++it) {
        if (it.row() > it.col()) trip.emplace_back(it.row(), it.col(), it.value());
        if (it.row() == it.col()) p_diag_.emplace_back(it.row(), it.value());
      }
    }
    for (Index k = 0; k < A.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
        trip.emplace_back(n_ + it.row(), it.col(), it.value());
      }
    }
    for (Index k = 0; k < Gg.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(Gg, k); it; ++it) {
        trip.emplace_back(n_ + me_ + it.row(), it.col(), it.value());
      }
    }
    for (Index i = 0; i < dim; ++i) trip.emplace_back(i, i, 0.0);
    K_.resize(dim, dim);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();
    diag_pos_.resize(dim);
    for (Index j = 0; j < dim; ++j) {
      // Column-major lower triangle: the diagonal is the first entry of column j.
      const Index start = K_.outerIndexPtr()[j];
      diag_pos_[j] = start;
    }
    base_diag_ = Vector::Zero(n_);
    for (const auto& [i, v] : p_diag_) base_diag_(i) += v;
    solver_.analyzePattern(K_);
  }

  // primal_extra: added to diag(P); ineq_w: W for the general rows.
  bool factor(const Vector& primal_extra, const Vector& ineq_w) {
    exact_diag_.resize(K_.rows());
    for (Index i = 0; i < n_; ++i) exact_diag_(i) = base_diag_(i) + primal_extra(i);
    for (Index i = 0; i < me_; ++i) exact_diag_(n_ + i) = 0.0;
    for (Index i = 0; i < mg_; ++i) exact_diag_(n_ + me_ + i) = -ineq_w(i);
    for (Index i = 0; i < K_.rows(); ++i) {
      const double sign = i < n_ ? 1.0 : -1.0;
      K_.valuePtr()[diag_pos_[i]] = exact_diag_(i) + sign * reg_;
    }
    solver_.factorize(K_);
    return solver_.info() == Eigen::Success;
  }

  Vector solve(const Vector& rhs, int refinement_steps) const {
    Vector x = solver_.solve(rhs);
    for (int k = 0; k < refinement_steps; ++k) {
      const Vector r = rhs - apply_exact(x);
      if (inf_norm(r) <= 1e-14 * (1.0 + inf_norm(rhs))) break;
      x += solver_.solve(r);
    }
    return x;
  }

 private:
  Vector apply_exact(const Vector& x) const {
    Vector y = K_.selfadjointView<Eigen::Lower>() * x;
    for (Index i = 0; i < K_.rows(); ++i) {
      const double sign = i < n_ ? 1.0 : -1.0;
      y(i) -= sign * reg_ * x(i);
    }
    return y;
  }

  Index n_, me_, mg_;
  double reg_;
  SparseMatrix K_;
  std::vector<Index> diag_pos_;
  std::vector<std::pair<Index, double>> p_diag_;
  Vector base_diag_;
  Vector exact_diag_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> solver_;
};

}  // namespace

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings) {
  return InteriorPointSolver(settings).solve(problem);
}

QpSolution InteriorPointSolver::solve(const QpProblem& prob) const {
  prob.validate();
  const Index n = prob.n_vars();
  const Index me = prob.n_eq();

  QpSolution sol;
  sol.z = Vector::Zero(n);
  sol.y = Vector::Zero(me);
  sol.mu = Vector::Zero(prob.n_ineq());

  const RowMajorSparse Grow = prob.G;
  const RowSplit split = split_rows(Grow, prob.g);
  if (split.trivially_infeasible) {
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  const Index m = static_cast<Index>(split.kept.size());
  const Index mg = static_cast<Index>(split.general.size());
  const Index ms = static_cast<Index>(split.singleton.size());

  // Kept rows (all) and general rows as separate sparse matrices.
  SparseMatrix Gk(m, n), Gg(mg, n);
  Vector gk(m);
  {
    std::vector<Eigen::Triplet<double>> tk, tg;
    std::vector<Index> general_slot(m, -1);
    for (Index k = 0; k < mg; ++k) general_slot[split.general[k]] = k;
    for (Index r = 0; r < m; ++r) {
      const Index i = split.kept[r];
      gk(r) = prob.g(i);
      for (RowMajorSparse::InnerIterator it(Grow, i); it; ++it) {
        tk.emplace_back(r, it.col(), it.value());
        if (general_slot[r] >= 0) tg.emplace_back(general_slot[r], it.col(), it.value());
      }
    }
    Gk.setFromTriplets(tk.begin(), tk.end());
    Gg.setFromTriplets(tg.begin(), tg.end());
  }
  const SparseMatrix Gkt = Gk.transpose();
  const SparseMatrix At = prob.A.transpose();

  KktSystem kkt(prob.Pq, prob.A, Gg, settings_.static_reg);
  const Index dim = n + me + mg;

  // Assemble and solve the reduced Newton system for a given right-hand side
  // (r1, r2, r3) of  [P A' G'; A 0 0; G 0 -W] [dz dy dl] = [r1 r2 r3].
  auto newton = [&](const Vector& w, const Vector& r1, const Vector& r2, const Vector& r3,
                    Vector& dz, Vector& dy, Vector& dl) {
    Vector rhs(dim);
    rhs.head(n) = r1;
    for (Index k = 0; k < ms; ++k) {
      const Index r = split.singleton[k];
      rhs(split.single_col[k]) += split.single_coef[k] * r3(r) / w(r);
    }
    rhs.segment(n, me) = r2;
    for (Index k = 0; k < mg; ++k) rhs(n + me + k) = r3(split.general[k]);
    const Vector x = kkt.solve(rhs, settings_.refinement_steps);
    dz = x.head(n);
    dy = x.segment(n, me);
    dl.resize(m);
    for (Index k = 0; k < mg; ++k) dl(split.general[k]) = x(n + me + k);
    for (Index k = 0; k < ms; ++k) {
      const Index r = split.singleton[k];
      dl(r) = (split.single_coef[k] * dz(split.single_col[k]) - r3(r)) / w(r);
    }
  };
  auto factor = [&](const Vector& w) {
    Vector extra = Vector::Zero(n);
    for (Index k = 0; k < ms; ++k) {
      const Index r = split.singleton[k];
      const double a = split.single_coef[k];
      extra(split.single_col[k]) += a * a / w(r);
    }
    Vector wg(mg);
    for (Index k = 0; k < mg; ++k) wg(k) = w(split.general[k]);
    return kkt.factor(extra, wg);
  };

  Vector z(n), y(me), lam(m), s(m);
  {
    const Vector ones = Vector::Ones(m);
    if (!factor(ones)) {
      sol.status = SolveStatus::kMaxIter;
      return sol;
    }
    Vector dl;
    newton(ones, -prob.q, prob.b, gk, z, y, dl);
    s = -dl;
    lam = dl;
    if (m > 0) {
      const double ap = -s.minCoeff();
      if (ap >= -1e-8) s.array() += 1.0 + ap;
      const double ad = -lam.minCoeff();
      if (ad >= -1e-8) lam.array() += 1.0 + ad;
    }
  }

  const double scale_p = 1.0 + std::max(inf_norm(prob.b), inf_norm(gk));
  const double scale_d = 1.0 + inf_norm(prob.q);
  const double tol = settings_.tol;

  Vector z_prev = z;
  // Best iterate by relative merit, returned if progress stalls.
  double best_merit = std::numeric_limits<double>::infinity();
  Vector best_z = z, best_y = y, best_lam = lam;
  int best_it = 0;
  bool converged = false;
  for (int it = 0; it < settings_.max_iter; ++it) {
    sol.iterations = it;
    const Vector Pz = prob.Pq.selfadjointView<Eigen::Lower>() * z;
    // Pq is stored full; use the full product for the residuals.
    const Vector Pz_full = prob.Pq * z;
    (void)Pz;
    Vector rd = Pz_full + prob.q;
    if (me > 0) rd += At * y;
    if (m > 0) rd += Gkt * lam;
    const Vector rp = me > 0 ? Vector(prob.A * z - prob.b) : Vector(0);
    const Vector rg = m > 0 ? Vector(Gk * z + s - gk) : Vector(0);
    const double mu = m > 0 ? s.dot(lam) / static_cast<double>(m) : 0.0;

    const double pres = std::max(inf_norm(rp), inf_norm(rg));
    const double dres = inf_norm(rd);
    const double pobj = 0.5 * z.dot(Pz_full) + prob.q.dot(z);
    const double gap = m > 0 ? s.dot(lam) : 0.0;
    if (settings_.verbose) {
      std::fprintf(stderr, "ipm %3d  pres %.3e  dres %.3e  gap %.3e  obj % .9e  |y| %.2e  |lam| %.2e\n",
                   it, pres, dres, gap, pobj, inf_norm(y), m > 0 ? inf_norm(lam) : 0.0);
    }
    if (pres <= tol * scale_p && dres <= tol * scale_d && gap <= tol * (1.0 + std::abs(pobj))) {
      converged = true;
      break;
    }
    const double merit =
        std::max({pres / scale_p, dres / scale_d, gap / (1.0 + std::abs(pobj))});
    if (merit < 0.5 * best_merit) best_it = it;
    if (merit < best_merit) {
      best_merit = merit;
      best_z = z;
      best_y = y;
      best_lam = lam;
    }
    if (best_merit <= settings_.acceptable_tol && it - best_it > settings_.stall_iterations) break;

    // Farkas certificate for primal infeasibility: A'y + G'lam = 0 and
    // b'y + g'lam < 0, tested on the normalized duals while the primal
    // residual stalls.
    if (m + me > 0 && pres > tol * scale_p) {
      const double big = std::max(inf_norm(y), inf_norm(lam));
      if (big > 1e4 * scale_d) {
        const double cert = ((me ? prob.b.dot(y) : 0.0) + (m ? gk.dot(lam) : 0.0)) / big;
        Vector ray = Vector::Zero(n);
        if (me > 0) ray += At * y;
        if (m > 0) ray += Gkt * lam;
        if (cert < -1e-6 && inf_norm(ray) / big <= 1e-6) {
          sol.status = SolveStatus::kInfeasible;
          sol.z = z;
          return sol;
        }
      }
    }
    if (!std::isfinite(pres + dres + gap)) break;
    // Unboundedness: z diverging along a recession direction with q'd < 0.
    if (inf_norm(z) > 1e9 * scale_p) {
      Vector d = z - z_prev;
      const double dn = inf_norm(d);
      if (dn > 0) {
        d /= dn;
        const double qd = prob.q.dot(d);
        const double pd = inf_norm(prob.Pq * d);
        const double ad = me > 0 ? inf_norm(prob.A * d) : 0.0;
        const double gd = m > 0 ? std::max(0.0, (Gk * d).maxCoeff()) : 0.0;
        if (qd < -1e-9 && pd <= 1e-7 && ad <= 1e-7 && gd <= 1e-7) {
          sol.status = SolveStatus::kUnbounded;
          sol.z = z;
          return sol;
        }
      }
    }

    if (m == 0) {
      // Pure equality-constrained QP: one Newton step is exact.
      Vector dz, dy, dl;
      factor(Vector(0));
      newton(Vector(0), -rd, -rp, Vector(0), dz, dy, dl);
      z_prev = z;
      z += dz;
      y += dy;
      continue;
    }

    const Vector w = s.cwiseQuotient(lam);
    if (!factor(w)) {
      sol.status = SolveStatus::kMaxIter;
      break;
    }

    auto max_step = [&](const Vector& ds, const Vector& dl) {
      double a = 1.0;
      for (Index i = 0; i < m; ++i) {
        if (ds(i) < 0) a = std::min(a, -s(i) / ds(i));
        if (dl(i) < 0) a = std::min(a, -lam(i) / dl(i));
      }
      return a;
    };

    // Predictor.
    Vector dz, dy, dl;
    {
      const Vector r3 = -rg + s;  // r_c / lam with r_c = s.*lam
      newton(w, -rd, -rp, r3, dz, dy, dl);
    }
    Vector ds = -s - w.cwiseProduct(dl);
    const double a_aff = max_step(ds, dl);
    const double mu_aff =
        (s + a_aff * ds).dot(lam + a_aff * dl) / static_cast<double>(m);
    const double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector.
    const Vector rc = s.cwiseProduct(lam) + ds.cwiseProduct(dl) - Vector::Constant(m, sigma * mu);
    {
      const Vector r3 = -rg + rc.cwiseQuotient(lam);
      newton(w, -rd, -rp, r3, dz, dy, dl);
    }
    ds = -rc.cwiseQuotient(lam) - w.cwiseProduct(dl);
    const double alpha = std::min(1.0, 0.99 * max_step(ds, dl));

    z_prev = z;
    z += alpha * dz;
    y += alpha * dy;
    lam += alpha * dl;
    s += alpha * ds;
    sol.iterations = it + 1;
  }

  if (converged) {
    sol.status = SolveStatus::kOptimal;
  } else if (best_merit <= settings_.acceptable_tol) {
    sol.status = SolveStatus::kOptimal;
    z = best_z;
    y = best_y;
    lam = best_lam;
  }
  sol.z = z;
  sol.y = y;
  for (Index r = 0; r < m; ++r) sol.mu(split.kept[r]) = std::max(lam(r), 0.0);
  sol.objective = prob.objective(z);
  sol.kkt_residual = kkt_residual(prob, z, sol.y, sol.mu);
  return sol;
}

}  // namespace ralmpc

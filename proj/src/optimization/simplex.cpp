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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ralmpc/optimization.hpp"

namespace ralmpc {
namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kPriceTol = 1e-10;
constexpr double kZeroRowTol = 1e-14;
constexpr int kDegenerateRunBeforeBland = 50;

// Column of the standard-form problem: which original variable it stands for
// and with which sign (+1 / -1), or a slack / artificial.
struct Column {
  enum Kind { kStructural, kSlack, kArtificial } kind;
  Index var = -1;    // structural: original variable
  double sign = 1;   // structural: z_var contribution
  Index row = -1;    // slack / artificial: owning row
};

class Tableau {
 public:
  Tableau(Index rows, Index cols) : t_(Matrix::Zero(rows + 1, cols + 1)), basis_(rows, -1) {}

  Index rows() const { return t_.rows() - 1; }
  Index cols() const { return t_.cols() - 1; }
  double& at(Index i, Index j) { return t_(i, j); }
  double at(Index i, Index j) const { return t_(i, j); }
  double& rhs(Index i) { return t_(i, cols()); }
  double rhs(Index i) const { return t_(i, cols()); }
  double cost(Index j) const { return t_(rows(), j); }
  double& cost(Index j) { return t_(rows(), j); }
  double objective_value() const { return -t_(rows(), cols()); }
  std::vector<Index>& basis() { return basis_; }

  void pivot(Index r, Index c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Set the objective row to c - c_B' B^-1 a for the given cost vector.
  void price(const Vector& c) {
    t_.row(rows()).setZero();
    t_.row(rows()).head(cols()) = c.transpose();
    for (Index i = 0; i < rows(); ++i) {
      const Index b = basis_[i];
      if (b >= 0 && c(b) != 0.0) t_.row(rows()) -= c(b) * t_.row(i);
    }
  }

  void drop_row(Index r) {
    const Index last = t_.rows() - 1;  // objective row stays last
    Matrix nt(t_.rows() - 1, t_.cols());
    Index k = 0;
    for (Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      nt.row(k++) = t_.row(i);
    }
    (void)last;
    t_ = std::move(nt);
    basis_.erase(basis_.begin() + r);
  }

 private:
  Matrix t_;
  std::vector<Index> basis_;
};

enum class PhaseResult { kOptimal, kUnbounded, kIterationLimit };

PhaseResult run_simplex(Tableau& tab, const std::vector<bool>& allowed, int max_pivots) {
  int degenerate_run = 0;
  for (int it = 0; it < max_pivots; ++it) {
    const bool bland = degenerate_run >= kDegenerateRunBeforeBland;
    Index enter = -1;
    double best = -kPriceTol;
    for (Index j = 0; j < tab.cols(); ++j) {
      if (!allowed[j]) continue;
      const double d = tab.cost(j);
      if (d < best) {
        enter = j;
        if (bland) break;
        best = d;
      }
    }
    if (enter < 0) return PhaseResult::kOptimal;

    Index leave = -1;
    double ratio = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < tab.rows(); ++i) {
      const double a = tab.at(i, enter);
      if (a <= kPivotTol) continue;
      const double rt = std::max(tab.rhs(i), 0.0) / a;
      if (rt < ratio - 1e-12 ||
          (rt <= ratio + 1e-12 && leave >= 0 && tab.basis()[i] < tab.basis()[leave])) {
        ratio = std::min(ratio, rt);
        leave = i;
      }
    }
    if (leave < 0) return PhaseResult::kUnbounded;
    degenerate_run = ratio <= 1e-12 ? degenerate_run + 1 : 0;
    tab.pivot(leave, enter);
  }
  return PhaseResult::kIterationLimit;
}

bool is_zero_row(const Matrix& M, Index i) { return M.row(i).cwiseAbs().maxCoeff() <= kZeroRowTol; }

}  // namespace

QpSolution solve_lp(const Vector& q, const Matrix& G, const Vector& g) {
  return solve_lp(q, G, g, Matrix(0, q.size()), Vector(0));
}

QpSolution solve_lp(const Vector& q, const Matrix& G, const Vector& g, const Matrix& A,
                    const Vector& b) {
  const Index n = q.size();
  require_dim(G.cols(), n, "solve_lp: G columns");
  require_dim(g.size(), G.rows(), "solve_lp: g length");
  require_dim(A.cols(), n, "solve_lp: A columns");
  require_dim(b.size(), A.rows(), "solve_lp: b length");

  QpSolution sol;
  sol.z = Vector::Zero(n);
  sol.mu = Vector::Zero(G.rows());
  sol.y = Vector::Zero(A.rows());

  // Rows of the form -a z_j <= 0 (a > 0) become sign restrictions on z_j.
  std::vector<bool> nonneg(n, false);
  std::vector<Index> bound_row_of(n, -1);
  std::vector<Index> g_rows, a_rows;
  for (Index i = 0; i < G.rows(); ++i) {
    if (is_zero_row(G, i)) {
      if (g(i) < -1e-12) {
        sol.status = SolveStatus::kInfeasible;
        return sol;
      }
      continue;
    }
    Index nnz = 0, col = -1;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(G(i, j)) > kZeroRowTol) {
        ++nnz;
        col = j;
      }
    }
    if (nnz == 1 && g(i) == 0.0 && G(i, col) < 0.0 && !nonneg[col]) {
      nonneg[col] = true;
      bound_row_of[col] = i;
      continue;
    }
    g_rows.push_back(i);
  }
  for (Index i = 0; i < A.rows(); ++i) {
    if (is_zero_row(A, i)) {
      if (std::abs(b(i)) > 1e-12) {
        sol.status = SolveStatus::kInfeasible;
        return sol;
      }
      continue;
    }
    a_rows.push_back(i);
  }

  std::vector<Column> columns;
  for (Index j = 0; j < n; ++j) {
    columns.push_back({Column::kStructural, j, 1.0, -1});
    if (!nonneg[j]) columns.push_back({Column::kStructural, j, -1.0, -1});
  }
  const Index m = static_cast<Index>(g_rows.size() + a_rows.size());
  std::vector<double> row_sign(m, 1.0);
  Vector rhs(m);
  for (Index r = 0; r < m; ++r) {
    const bool ineq = r < static_cast<Index>(g_rows.size());
    rhs(r) = ineq ? g(g_rows[r]) : b(a_rows[r - g_rows.size()]);
    if (rhs(r) < 0) row_sign[r] = -1.0;
  }
  for (Index r = 0; r < static_cast<Index>(g_rows.size()); ++r) {
    columns.push_back({Column::kSlack, -1, 1.0, r});
  }
  std::vector<Index> initial_basis(m, -1);
  for (Index r = 0; r < m; ++r) {
    const bool ineq = r < static_cast<Index>(g_rows.size());
    if (ineq && row_sign[r] > 0) continue;
    columns.push_back({Column::kArtificial, -1, 1.0, r});
  }

  const Index ncols = static_cast<Index>(columns.size());
  // Standard-form matrix (kept for the final basis re-solve).
  Matrix M = Matrix::Zero(m, ncols);
  for (Index r = 0; r < m; ++r) {
    const bool ineq = r < static_cast<Index>(g_rows.size());
    const auto row = ineq ? G.row(g_rows[r]) : A.row(a_rows[r - g_rows.size()]);
    for (Index c = 0; c < ncols; ++c) {
      const Column& col = columns[c];
      switch (col.kind) {
        case Column::kStructural: M(r, c) = col.sign * row(col.var); break;
        case Column::kSlack: M(r, c) = col.row == r ? 1.0 : 0.0; break;
        case Column::kArtificial: M(r, c) = col.row == r ? 1.0 : 0.0; break;
      }
    }
    // Artificials are added after the sign flip so that they enter with +1.
    for (Index c = 0; c < ncols; ++c) {
      if (columns[c].kind != Column::kArtificial) M(r, c) *= row_sign[r];
    }
  }
  Vector srhs = rhs.cwiseProduct(Eigen::Map<const Vector>(row_sign.data(), m));

  Tableau tab(m, ncols);
  for (Index r = 0; r < m; ++r) {
    for (Index c = 0; c < ncols; ++c) tab.at(r, c) = M(r, c);
    tab.rhs(r) = srhs(r);
  }
  for (Index c = 0; c < ncols; ++c) {
    const Column& col = columns[c];
    if (col.kind == Column::kArtificial ||
        (col.kind == Column::kSlack && row_sign[col.row] > 0)) {
      tab.basis()[col.row] = c;
    }
  }

  const int max_pivots = static_cast<int>(50 * (m + ncols) + 1000);
  std::vector<bool> allowed(ncols, true);

  // Phase 1.
  bool has_artificial = false;
  Vector c1 = Vector::Zero(ncols);
  for (Index c = 0; c < ncols; ++c) {
    if (columns[c].kind == Column::kArtificial) {
      c1(c) = 1.0;
      has_artificial = true;
    }
  }
  if (has_artificial) {
    tab.price(c1);
    const PhaseResult p1 = run_simplex(tab, allowed, max_pivots);
    if (p1 == PhaseResult::kIterationLimit) {
      sol.status = SolveStatus::kMaxIter;
      return sol;
    }
    const double scale = 1.0 + (srhs.size() ? srhs.cwiseAbs().maxCoeff() : 0.0);
    if (tab.objective_value() > 1e-9 * scale) {
      sol.status = SolveStatus::kInfeasible;
      return sol;
    }
    // Drive artificials out of the basis; rows where that is impossible are
    // linearly dependent and get removed.
    for (Index r = 0; r < tab.rows();) {
      const Index bc = tab.basis()[r];
      if (columns[bc].kind != Column::kArtificial) {
        ++r;
        continue;
      }
      Index enter = -1;
      double best = kPivotTol;
      for (Index c = 0; c < ncols; ++c) {
        if (columns[c].kind == Column::kArtificial) continue;
        if (std::abs(tab.at(r, c)) > best) {
          best = std::abs(tab.at(r, c));
          enter = c;
        }
      }
      if (enter >= 0) {
        tab.pivot(r, enter);
        ++r;
      } else {
        tab.drop_row(r);
      }
    }
    for (Index c = 0; c < ncols; ++c) {
      if (columns[c].kind == Column::kArtificial) allowed[c] = false;
    }
  }

  // Phase 2.
  Vector c2 = Vector::Zero(ncols);
  for (Index c = 0; c < ncols; ++c) {
    if (columns[c].kind == Column::kStructural) c2(c) = columns[c].sign * q(columns[c].var);
  }
  tab.price(c2);
  const PhaseResult p2 = run_simplex(tab, allowed, max_pivots);
  if (p2 == PhaseResult::kUnbounded) {
    sol.status = SolveStatus::kUnbounded;
    return sol;
  }
  if (p2 == PhaseResult::kIterationLimit) {
    sol.status = SolveStatus::kMaxIter;
    return sol;
  }

  // Re-solve B x_B = rhs against the original columns to shed tableau drift.
  // Dropped (dependent) rows are skipped by solving in the least-squares sense.
  const auto& basis = tab.basis();
  const Index mb = static_cast<Index>(basis.size());
  Matrix B(m, mb);
  for (Index k = 0; k < mb; ++k) B.col(k) = M.col(basis[k]);
  Eigen::ColPivHouseholderQR<Matrix> qr(B);
  Vector xb = mb > 0 ? Vector(qr.solve(srhs)) : Vector(0);
  Vector y_std = Vector::Zero(ncols);
  for (Index k = 0; k < mb; ++k) y_std(basis[k]) = std::max(xb(k), 0.0);
  for (Index c = 0; c < ncols; ++c) {
    if (columns[c].kind == Column::kStructural) sol.z(columns[c].var) += columns[c].sign * y_std(c);
  }

  // Dual values: pi solves B' pi = c_B; multipliers follow from the sign flips.
  Vector cb(mb);
  for (Index k = 0; k < mb; ++k) cb(k) = c2(basis[k]);
  Vector pi = mb > 0 ? Vector(B.transpose().colPivHouseholderQr().solve(cb)) : Vector::Zero(m);
  if (pi.size() != m) pi = Vector::Zero(m);
  for (Index r = 0; r < static_cast<Index>(g_rows.size()); ++r) {
    sol.mu(g_rows[r]) = std::max(0.0, -row_sign[r] * pi(r));
  }
  for (Index r = static_cast<Index>(g_rows.size()); r < m; ++r) {
    sol.y(a_rows[r - g_rows.size()]) = -row_sign[r] * pi(r);
  }
  // Multipliers of sign-restriction rows: reduced cost of the variable.
  Vector reduced = q + G.transpose() * sol.mu + A.transpose() * sol.y;
  for (Index j = 0; j < n; ++j) {
    if (nonneg[j]) {
      const Index i = bound_row_of[j];
      sol.mu(i) = std::max(0.0, reduced(j) / -G(i, j));
    }
  }

  sol.status = SolveStatus::kOptimal;
  sol.objective = q.dot(sol.z);
  sol.iterations = 0;
  {
    QpProblem view;
    view.Pq = SparseMatrix(n, n);
    view.q = q;
    view.G = G.sparseView();
    view.g = g;
    view.A = A.sparseView();
    view.b = b;
    sol.kkt_residual = kkt_residual(view, sol.z, sol.y, sol.mu);
  }
  return sol;
}

}  // namespace ralmpc

// Copyright 2026 The qpopf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qpopf/lp_engine.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "qpopf/util.h"

namespace qpopf {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kPivotTol = 1e-9;

// Tableau for  min d'y  s.t.  A y = r, y >= 0,  with one artificial column
// per row. Row `rows_` holds reduced costs; the last column holds the rhs.
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& r)
      : rows_(static_cast<int>(A.rows())),
        structural_(static_cast<int>(A.cols())),
        a_(A),
        r_(r),
        t_(RowMatrix::Zero(rows_ + 1, structural_ + rows_ + 1)),
        basis_(rows_) {
    for (int i = 0; i < rows_; ++i) {
      const double sign = r(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(structural_) = sign * A.row(i);
      t_(i, structural_ + i) = 1.0;
      t_(i, rhs_col()) = sign * r(i);
      basis_[i] = structural_ + i;
    }
    // Phase-1 cost: sum of artificials.
    for (int i = 0; i < rows_; ++i) {
      t_.row(rows_).head(structural_) -= t_.row(i).head(structural_);
      t_(rows_, rhs_col()) -= t_(i, rhs_col());
    }
  }

  int rhs_col() const { return structural_ + rows_; }
  double objective() const { return -t_(rows_, rhs_col()); }
  const std::vector<int>& basis() const { return basis_; }

  enum class Outcome { kOptimal, kUnbounded, kPivotLimit };

  // Bland's rule over columns [0, num_cols).
  Outcome Run(int num_cols, double opt_tol, int& pivots, int max_pivots) {
    while (true) {
      int entering = -1;
      for (int j = 0; j < num_cols; ++j) {
        if (t_(rows_, j) < -opt_tol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return Outcome::kOptimal;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        const double a = t_(i, entering);
        if (a > kPivotTol) best = std::min(best, t_(i, rhs_col()) / a);
      }
      int leaving = -1;
      if (std::isfinite(best)) {
        const double tie = best + 1e-12 * (1.0 + std::abs(best));
        for (int i = 0; i < rows_; ++i) {
          const double a = t_(i, entering);
          if (a <= kPivotTol || t_(i, rhs_col()) / a > tie) continue;
          if (leaving < 0 || basis_[i] < basis_[leaving]) leaving = i;
        }
      }
      if (leaving < 0) return Outcome::kUnbounded;
      if (pivots >= max_pivots) return Outcome::kPivotLimit;
      Pivot(leaving, entering);
      ++pivots;
    }
  }

  bool IsOptimal(int num_cols, double opt_tol) const {
    return (t_.row(rows_).head(num_cols).array() >= -opt_tol).all();
  }

  // Pivots basic artificials out; false if some row has no structural entry.
  bool DriveOutArtificials() {
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < structural_) continue;
      int best = -1;
      for (int j = 0; j < structural_; ++j) {
        if (std::abs(t_(i, j)) > kPivotTol &&
            (best < 0 || std::abs(t_(i, j)) > std::abs(t_(i, best)))) {
          best = j;
        }
      }
      if (best < 0) return false;
      Pivot(i, best);
    }
    return true;
  }

  // Replaces the objective row by reduced costs of `cost` (structural only).
  void SetCost(const Eigen::VectorXd& cost) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(structural_) = cost.transpose();
    for (int i = 0; i < rows_; ++i) {
      const int b = basis_[i];
      const double cb = b < structural_ ? cost(b) : 0.0;
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  // Recomputes the tableau from the original data for the current basis,
  // discarding accumulated roundoff. False if the basis matrix is singular.
  bool Refactor(const Eigen::VectorXd& cost) {
    Eigen::MatrixXd B(rows_, rows_);
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] >= structural_) return false;
      B.col(i) = a_.col(basis_[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
    if (!lu.isInvertible()) return false;
    Eigen::MatrixXd body = lu.solve(a_);
    Eigen::VectorXd rhs = lu.solve(r_);
    t_.setZero();
    for (int i = 0; i < rows_; ++i) {
      t_.row(i).head(structural_) = body.row(i);
      t_(i, rhs_col()) = rhs(i);
    }
    SetCost(cost);
    return true;
  }

 private:
  void Pivot(int row, int col) {
    t_.row(row) /= t_(row, col);
    for (int i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    basis_[row] = col;
  }

  int rows_;
  int structural_;
  Eigen::MatrixXd a_;
  Eigen::VectorXd r_;
  RowMatrix t_;
  std::vector<int> basis_;
};

enum class DualResult { kOptimal, kDualInfeasible, kDualUnbounded };

struct DualSolve {
  DualResult result = DualResult::kOptimal;
  std::vector<int> basis;
  int pivots = 0;
};

// min b'y s.t. W'y = -c, y >= 0.
absl::StatusOr<DualSolve> SolveDual(const Eigen::MatrixXd& W,
                                    const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& c,
                                    const LpOptions& options) {
  const int n = static_cast<int>(W.cols());
  const int q = static_cast<int>(W.rows());
  const Eigen::MatrixXd A = W.transpose();
  const Eigen::VectorXd r = -c;
  Tableau tab(A, r);
  DualSolve out;
  const double scale_c = 1.0 + c.cwiseAbs().maxCoeff();

  auto outcome = tab.Run(q + n, 1e-12 * scale_c, out.pivots, options.max_pivots);
  if (outcome == Tableau::Outcome::kPivotLimit) {
    return absl::ResourceExhaustedError("LP phase 1 exceeded the pivot budget");
  }
  if (tab.objective() > 1e-9 * scale_c) {
    out.result = DualResult::kDualInfeasible;
    return out;
  }
  if (!tab.DriveOutArtificials()) {
    return absl::FailedPreconditionError(
        "LP constraint matrix does not have full column rank");
  }
  tab.SetCost(b);
  const double opt_tol = 0.1 * options.feasibility_tol;
  for (int attempt = 0;; ++attempt) {
    outcome = tab.Run(q, opt_tol, out.pivots, options.max_pivots);
    if (outcome == Tableau::Outcome::kPivotLimit) {
      return absl::ResourceExhaustedError(
          "LP phase 2 exceeded the pivot budget");
    }
    if (outcome == Tableau::Outcome::kUnbounded) {
      out.result = DualResult::kDualUnbounded;
      return out;
    }
    // Confirm optimality on a fresh factorization of the final basis.
    if (!tab.Refactor(b)) {
      return absl::InternalError("LP basis became singular");
    }
    if (tab.IsOptimal(q, opt_tol) || attempt == 3) break;
  }
  out.basis = tab.basis();
  std::sort(out.basis.begin(), out.basis.end());
  return out;
}

}  // namespace

const char* LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

int EffectiveRowCount(const std::vector<int>& rows,
                      const std::vector<int>& mirror_row) {
  int count = 0;
  for (int i : rows) {
    const int j = mirror_row.empty() ? -1 : mirror_row[i];
    if (j >= 0 && j < i && std::binary_search(rows.begin(), rows.end(), j)) {
      continue;
    }
    ++count;
  }
  return count;
}

absl::StatusOr<LpSolution> SolveDenseLp(const Eigen::MatrixXd& W,
                                        const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& c,
                                        const std::vector<int>& mirror_row,
                                        const LpOptions& options) {
  const int n = static_cast<int>(W.cols());
  if (W.rows() != b.size() || c.size() != n) {
    return absl::InvalidArgumentError("LP dimension mismatch");
  }
  LpSolution sol;
  QPOPF_ASSIGN_OR_RETURN(DualSolve dual, SolveDual(W, b, c, options));
  sol.pivots = dual.pivots;
  if (dual.result == DualResult::kDualUnbounded) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }
  if (dual.result == DualResult::kDualInfeasible) {
    // Primal is unbounded if it is feasible at all.
    QPOPF_ASSIGN_OR_RETURN(DualSolve feas,
                           SolveDual(W, b, Eigen::VectorXd::Zero(n), options));
    sol.pivots += feas.pivots;
    sol.status = feas.result == DualResult::kDualUnbounded
                     ? LpStatus::kInfeasible
                     : LpStatus::kUnbounded;
    return sol;
  }
  Eigen::MatrixXd WB(n, n);
  Eigen::VectorXd bB(n);
  for (int k = 0; k < n; ++k) {
    WB.row(k) = W.row(dual.basis[k]);
    bB(k) = b(dual.basis[k]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(WB);
  if (!lu.isInvertible()) return absl::InternalError("singular optimal basis");
  sol.status = LpStatus::kOptimal;
  sol.x = lu.solve(bB);
  sol.objective = c.dot(sol.x);
  sol.basis = dual.basis;
  const Eigen::VectorXd residual = b - W * sol.x;
  for (int i = 0; i < residual.size(); ++i) {
    if (std::abs(residual(i)) <= options.active_tol) sol.active_set.push_back(i);
  }
  sol.degenerate = EffectiveRowCount(sol.active_set, mirror_row) > n;
  return sol;
}

absl::StatusOr<LpSolution> SolveLp(const ParametricLp& lp,
                                   const Eigen::VectorXd& theta,
                                   const LpOptions& options) {
  if (theta.size() != lp.num_parameters()) {
    return absl::InvalidArgumentError("theta dimension mismatch");
  }
  return SolveDenseLp(lp.W, lp.Rhs(theta), lp.c, lp.mirror_row, options);
}

std::vector<int> ActiveSet(const LpSolution& solution, const ParametricLp& lp,
                           const Eigen::VectorXd& theta, double tol_active) {
  std::vector<int> rows;
  if (solution.status != LpStatus::kOptimal) return rows;
  const Eigen::VectorXd residual = lp.Rhs(theta) - lp.W * solution.x;
  for (int i = 0; i < residual.size(); ++i) {
    if (std::abs(residual(i)) <= tol_active) rows.push_back(i);
  }
  return rows;
}

double MaxViolation(const ParametricLp& lp, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& theta) {
  const Eigen::VectorXd excess = lp.W * x - lp.Rhs(theta);
  return std::max(0.0, excess.maxCoeff());
}

Eigen::VectorXd DualCertificate(const LpSolution& solution,
                                const ParametricLp& lp) {
  const int n = lp.num_variables();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(lp.num_constraints());
  if (solution.status != LpStatus::kOptimal ||
      static_cast<int>(solution.basis.size()) != n) {
    return y;
  }
  Eigen::MatrixXd WB(n, n);
  for (int k = 0; k < n; ++k) WB.row(k) = lp.W.row(solution.basis[k]);
  const Eigen::VectorXd yb = WB.transpose().fullPivLu().solve(-lp.c);
  for (int k = 0; k < n; ++k) y(solution.basis[k]) = yb(k);
  return y;
}

absl::StatusOr<Eigen::VectorXd> ProjectFeasible(const Eigen::VectorXd& x_tilde,
                                                const ParametricLp& lp,
                                                const Eigen::VectorXd& theta,
                                                const LpOptions& options) {
  const int n = lp.num_variables();
  const int q = lp.num_constraints();
  if (x_tilde.size() != n) {
    return absl::InvalidArgumentError("projection point dimension mismatch");
  }
  if (MaxViolation(lp, x_tilde, theta) <= options.feasibility_tol) {
    return x_tilde;
  }
  // Variables (x, t): W x <= b, x - t <= x~, -x - t <= -x~; min sum t.
  Eigen::MatrixXd W2 = Eigen::MatrixXd::Zero(q + 2 * n, 2 * n);
  Eigen::VectorXd b2(q + 2 * n);
  W2.topLeftCorner(q, n) = lp.W;
  b2.head(q) = lp.Rhs(theta);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  W2.block(q, 0, n, n) = I;
  W2.block(q, n, n, n) = -I;
  W2.block(q + n, 0, n, n) = -I;
  W2.block(q + n, n, n, n) = -I;
  b2.segment(q, n) = x_tilde;
  b2.segment(q + n, n) = -x_tilde;
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(2 * n);
  c2.tail(n).setOnes();
  std::vector<int> mirror(q + 2 * n, -1);
  for (int i = 0; i < q; ++i) mirror[i] = lp.mirror_row[i];
  QPOPF_ASSIGN_OR_RETURN(LpSolution aux,
                         SolveDenseLp(W2, b2, c2, mirror, options));
  if (aux.status != LpStatus::kOptimal) {
    return absl::FailedPreconditionError(
        "feasible set is empty at this parameter");
  }
  return Eigen::VectorXd(aux.x.head(n));
}

nlohmann::json ToJson(const LpSolution& solution) {
  nlohmann::json j;
  j["status"] = LpStatusName(solution.status);
  j["objective"] = solution.objective;
  j["x"] = ToJson(solution.x);
  j["active_set"] = solution.active_set;
  j["basis"] = solution.basis;
  j["degenerate"] = solution.degenerate;
  j["pivots"] = solution.pivots;
  return j;
}

}  // namespace qpopf

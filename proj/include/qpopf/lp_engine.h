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

// Dense LP solving with active-set extraction and L1 feasibility projection.

#ifndef QPOPF_LP_ENGINE_H_
#define QPOPF_LP_ENGINE_H_

#include <vector>

#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"
#include "qpopf/grid_model.h"

namespace qpopf {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* LpStatusName(LpStatus status);

struct LpOptions {
  double feasibility_tol = 1e-8;
  double active_tol = 1e-7;
  int max_pivots = 50000;
};

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  // Rows with |W_i x - b_i| <= active_tol, ascending.
  std::vector<int> active_set;
  // The n rows of the optimal basis (W_B x = b_B, W_B nonsingular), ascending.
  std::vector<int> basis;
  // More than n rows active, counting mirrored equality pairs once.
  bool degenerate = false;
  int pivots = 0;
};

// min c'x s.t. W x <= b with x free. W needs full column rank. Uses the
// two-phase tableau simplex on the dual standard form with Bland's rule, so
// the result is deterministic for fixed input. Infeasible and unbounded
// problems are reported through `status`; a numeric breakdown (pivot budget
// exhausted, rank-deficient W) is an error.
absl::StatusOr<LpSolution> SolveDenseLp(const Eigen::MatrixXd& W,
                                        const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& c,
                                        const std::vector<int>& mirror_row,
                                        const LpOptions& options = {});

absl::StatusOr<LpSolution> SolveLp(const ParametricLp& lp,
                                   const Eigen::VectorXd& theta,
                                   const LpOptions& options = {});

// Rows whose residual is within `tol_active`, ascending.
std::vector<int> ActiveSet(const LpSolution& solution, const ParametricLp& lp,
                           const Eigen::VectorXd& theta,
                           double tol_active = 1e-7);

// Number of rows in `rows`, counting a mirrored equality pair once.
int EffectiveRowCount(const std::vector<int>& rows,
                      const std::vector<int>& mirror_row);

// max_i (W_i x - S_i - T_i theta), clamped below at zero.
double MaxViolation(const ParametricLp& lp, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& theta);

// Multipliers y >= 0 supported on the basis with W_B' y_B = -c, so that
// c'x = -y'(S + T theta).
Eigen::VectorXd DualCertificate(const LpSolution& solution,
                                const ParametricLp& lp);

// argmin_x sum_i |x_i - x_tilde_i| over the feasible set at theta, solved as
// an auxiliary LP. Feasible inputs (within feasibility_tol) come back as is.
absl::StatusOr<Eigen::VectorXd> ProjectFeasible(const Eigen::VectorXd& x_tilde,
                                                const ParametricLp& lp,
                                                const Eigen::VectorXd& theta,
                                                const LpOptions& options = {});

nlohmann::json ToJson(const LpSolution& solution);

}  // namespace qpopf

#endif  // QPOPF_LP_ENGINE_H_

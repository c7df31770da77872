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
#include <limits>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "test_support.h"

namespace qpopf {
namespace {

using ::qpopf::testing::Case69Lp;
using ::qpopf::testing::DataPath;
using ::qpopf::testing::Theta1;
using ::qpopf::testing::ToyLp;

// Minimum of c'x over all vertices of {W x <= b}, by trying every n-subset of
// rows. Independent of the simplex code path.
double VertexEnumerationMin(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                            const Eigen::VectorXd& c) {
  const int q = static_cast<int>(W.rows()), n = static_cast<int>(W.cols());
  std::vector<bool> pick(q, false);
  std::fill(pick.begin(), pick.begin() + n, true);
  double best = std::numeric_limits<double>::infinity();
  do {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd rhs(n);
    for (int i = 0, k = 0; i < q; ++i) {
      if (!pick[i]) continue;
      A.row(k) = W.row(i);
      rhs(k++) = b(i);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(rhs);
    if (((W * x - b).array() > 1e-9).any()) continue;
    best = std::min(best, c.dot(x));
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

TEST(LpEngineTest, ToyLpPositiveTheta) {
  ASSERT_OK_AND_ASSIGN(LpSolution sol, SolveLp(ToyLp(), Theta1(0.5)));
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.x(0), 0.5, 1e-12);
  EXPECT_EQ(sol.active_set, std::vector<int>{0});
  EXPECT_FALSE(sol.degenerate);
}

TEST(LpEngineTest, ToyLpNegativeTheta) {
  ASSERT_OK_AND_ASSIGN(LpSolution sol, SolveLp(ToyLp(), Theta1(-0.5)));
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.x(0), 0.0, 1e-12);
  EXPECT_EQ(sol.active_set, std::vector<int>{1});
}

TEST(LpEngineTest, ToyLpTiePointIsDegenerate) {
  ASSERT_OK_AND_ASSIGN(LpSolution sol, SolveLp(ToyLp(), Theta1(0.0)));
  EXPECT_EQ(sol.active_set, (std::vector<int>{0, 1}));
  EXPECT_TRUE(sol.degenerate);
  EXPECT_EQ(ActiveSet(sol, ToyLp(), Theta1(0.0)), (std::vector<int>{0, 1}));
}

TEST(LpEngineTest, InfeasibleAndUnbounded) {
  Eigen::MatrixXd W(2, 1);
  W << 1, -1;
  Eigen::VectorXd b(2);
  b << -1, -1;  // x <= -1 and x >= 1
  ASSERT_OK_AND_ASSIGN(LpSolution inf,
                       SolveDenseLp(W, b, Eigen::VectorXd::Ones(1), {-1, -1}));
  EXPECT_EQ(inf.status, LpStatus::kInfeasible);
  Eigen::MatrixXd W1(1, 1);
  W1 << 1;
  ASSERT_OK_AND_ASSIGN(
      LpSolution unb,
      SolveDenseLp(W1, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), {-1}));
  EXPECT_EQ(unb.status, LpStatus::kUnbounded);
}

TEST(LpEngineTest, Case69SubLpMatchesVertexEnumeration) {
  // Six-generator economic dispatch built from the 69-bus data: generator
  // bounds plus one system balance, at the total generation of the full LP at
  // theta = 0.
  ASSERT_OK_AND_ASSIGN(GridCase grid, LoadCase(DataPath("case69_popf.json")));
  ASSERT_OK_AND_ASSIGN(ParametricLp lp, Case69Lp());
  ASSERT_OK_AND_ASSIGN(LpSolution full, SolveLp(lp, Eigen::VectorXd::Zero(3)));
  ASSERT_EQ(full.status, LpStatus::kOptimal);
  const int g = static_cast<int>(grid.generators.size());
  ASSERT_EQ(g, 6);
  const double demand = full.x.head(g).sum();

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(2 * g + 2, g);
  Eigen::VectorXd b(2 * g + 2), c(g);
  for (int i = 0; i < g; ++i) {
    W(2 * i, i) = 1.0;
    b(2 * i) = grid.generators[i].p_max_mw;
    W(2 * i + 1, i) = -1.0;
    b(2 * i + 1) = -grid.generators[i].p_min_mw;
    c(i) = grid.generators[i].cost;
  }
  W.row(2 * g).setOnes();
  b(2 * g) = demand;
  W.row(2 * g + 1).setConstant(-1.0);
  b(2 * g + 1) = -demand;
  std::vector<int> mirror(2 * g + 2, -1);
  mirror[2 * g] = 2 * g + 1;
  mirror[2 * g + 1] = 2 * g;

  ASSERT_OK_AND_ASSIGN(LpSolution sub, SolveDenseLp(W, b, c, mirror));
  ASSERT_EQ(sub.status, LpStatus::kOptimal);
  const double brute = VertexEnumerationMin(W, b, c);
  EXPECT_NEAR(sub.objective, brute, 1e-9 * std::max(1.0, std::abs(brute)));
}

TEST(LpEngineTest, RandomLpsMatchVertexEnumeration) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  int compared = 0;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3, q = 9;
    Eigen::MatrixXd W(q, n);
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < n; ++j) W(i, j) = normal(rng);
    Eigen::VectorXd b = W * Eigen::VectorXd::Constant(n, 0.3) +
                        Eigen::VectorXd::Constant(q, 1.0);
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) c(j) = normal(rng);
    ASSERT_OK_AND_ASSIGN(LpSolution sol,
                         SolveDenseLp(W, b, c, std::vector<int>(q, -1)));
    const double brute = VertexEnumerationMin(W, b, c);
    if (std::isinf(brute)) continue;  // no vertex: unbounded or degenerate
    if (sol.status != LpStatus::kOptimal) {
      // Unbounded LPs can still have vertices.
      EXPECT_EQ(sol.status, LpStatus::kUnbounded);
      continue;
    }
    EXPECT_NEAR(sol.objective, brute, 1e-9) << "trial " << trial;
    ++compared;
  }
  EXPECT_GE(compared, 10);
}

TEST(LpEngineTest, ActiveSetMatchesResidualScan) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    ParametricLp lp;
    lp.W = Eigen::MatrixXd(5, 3);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 3; ++j) lp.W(i, j) = normal(rng);
    // c inside -cone(W') keeps the LP bounded; S > W*0 keeps it feasible.
    Eigen::VectorXd lambda(5);
    for (int i = 0; i < 5; ++i) lambda(i) = std::abs(normal(rng));
    lp.c = -lp.W.transpose() * lambda;
    lp.S = Eigen::VectorXd::Constant(5, 1.0);
    lp.T = Eigen::MatrixXd::Zero(5, 1);
    lp.theta_box.lower = Eigen::VectorXd::Constant(1, -1.0);
    lp.theta_box.upper = Eigen::VectorXd::Constant(1, 1.0);
    lp.mirror_row.assign(5, -1);
    lp.variable_names = {"a", "b", "c"};
    lp.constraint_names = {"r0", "r1", "r2", "r3", "r4"};
    auto sol = SolveLp(lp, Theta1(0.0));
    if (!sol.ok()) continue;  // rank-deficient draw
    ASSERT_EQ(sol->status, LpStatus::kOptimal);
    std::vector<int> scan;
    const Eigen::VectorXd r = lp.W * sol->x - lp.S;
    for (int i = 0; i < 5; ++i) {
      if (std::abs(r(i)) <= 1e-7) scan.push_back(i);
    }
    EXPECT_EQ(ActiveSet(*sol, lp, Theta1(0.0), 1e-7), scan);
    EXPECT_EQ(sol->active_set, scan);
    EXPECT_LE(r.maxCoeff(), 1e-8);
    ++checked;
  }
  EXPECT_GE(checked, 15);
}

TEST(LpEngineTest, Case69FeasibilityAndStrongDuality) {
  ASSERT_OK_AND_ASSIGN(ParametricLp lp, Case69Lp());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd theta(3);
    for (int d = 0; d < 3; ++d) theta(d) = unit(rng);
    ASSERT_OK_AND_ASSIGN(LpSolution sol, SolveLp(lp, theta));
    ASSERT_EQ(sol.status, LpStatus::kOptimal);
    EXPECT_LE(MaxViolation(lp, sol.x, theta), 1e-8);
    for (int i : sol.active_set) {
      EXPECT_LE(std::abs(lp.W.row(i).dot(sol.x) - lp.Rhs(theta)(i)), 1e-7);
    }
    EXPECT_EQ(sol.degenerate,
              EffectiveRowCount(sol.active_set, lp.mirror_row) >
                  lp.num_variables());
    const Eigen::VectorXd y = DualCertificate(sol, lp);
    EXPECT_GE(y.minCoeff(), -1e-9);
    EXPECT_LE((lp.W.transpose() * y + lp.c).cwiseAbs().maxCoeff(), 1e-8);
    // Weak duality holds with equality at the optimum.
    EXPECT_NEAR(sol.objective, -y.dot(lp.Rhs(theta)),
                1e-8 * std::max(1.0, std::abs(sol.objective)));
    // Any other feasible point costs at least the dual bound.
    ASSERT_OK_AND_ASSIGN(
        Eigen::VectorXd proj,
        ProjectFeasible(sol.x + Eigen::VectorXd::Constant(sol.x.size(), 0.01),
                        lp, theta));
    EXPECT_GE(lp.c.dot(proj), -y.dot(lp.Rhs(theta)) - 1e-8);
  }
}

TEST(LpEngineTest, ProjectFeasibleToy) {
  ParametricLp lp = ToyLp();
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd same,
                       ProjectFeasible(Eigen::VectorXd::Constant(1, 0.7), lp,
                                       Theta1(0.5)));
  EXPECT_EQ(same(0), 0.7);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd clipped,
                       ProjectFeasible(Eigen::VectorXd::Constant(1, 2.0), lp,
                                       Theta1(0.5)));
  EXPECT_NEAR(clipped(0), 1.0, 1e-12);
}

// min sum t  s.t.  W x <= b,  x - t <= x~,  -x - t <= -x~, with the rows
// shuffled, solved directly.
double AuxiliaryL1(const ParametricLp& lp, const Eigen::VectorXd& theta,
                   const Eigen::VectorXd& x_tilde, uint64_t seed) {
  const int n = lp.num_variables(), q = lp.num_constraints();
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(q + 2 * n, 2 * n);
  Eigen::VectorXd b(q + 2 * n), c(2 * n);
  W.topLeftCorner(q, n) = lp.W;
  b.head(q) = lp.Rhs(theta);
  for (int j = 0; j < n; ++j) {
    W(q + 2 * j, j) = 1.0;
    W(q + 2 * j, n + j) = -1.0;
    b(q + 2 * j) = x_tilde(j);
    W(q + 2 * j + 1, j) = -1.0;
    W(q + 2 * j + 1, n + j) = -1.0;
    b(q + 2 * j + 1) = -x_tilde(j);
  }
  c.head(n).setZero();
  c.tail(n).setOnes();
  std::vector<int> order(q + 2 * n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd Wp(W.rows(), W.cols());
  Eigen::VectorXd bp(b.size());
  for (size_t i = 0; i < order.size(); ++i) {
    Wp.row(i) = W.row(order[i]);
    bp(i) = b(order[i]);
  }
  auto sol = SolveDenseLp(Wp, bp, c, std::vector<int>(order.size(), -1));
  if (!sol.ok() || sol->status != LpStatus::kOptimal) return -1.0;
  return sol->objective;
}

TEST(LpEngineTest, Case69ProjectionMatchesPermutedAuxiliaryLp) {
  ASSERT_OK_AND_ASSIGN(ParametricLp lp, Case69Lp());
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 0.05);
  for (int trial = 0; trial < 3; ++trial) {
    Eigen::VectorXd theta(3);
    for (int d = 0; d < 3; ++d) theta(d) = unit(rng);
    ASSERT_OK_AND_ASSIGN(LpSolution sol, SolveLp(lp, theta));
    Eigen::VectorXd x_tilde = sol.x;
    for (int j = 0; j < x_tilde.size(); ++j) x_tilde(j) += normal(rng);
    ASSERT_GT(MaxViolation(lp, x_tilde, theta), 1e-4);
    ASSERT_OK_AND_ASSIGN(Eigen::VectorXd proj, ProjectFeasible(x_tilde, lp, theta));
    EXPECT_LE(MaxViolation(lp, proj, theta), 1e-8);
    const double l1 = (proj - x_tilde).lpNorm<1>();
    const double oracle = AuxiliaryL1(lp, theta, x_tilde, 100 + trial);
    ASSERT_GE(oracle, 0.0);
    EXPECT_NEAR(l1, oracle, 1e-7 * std::max(1.0, oracle));
    // Idempotent: a projected point is already feasible.
    ASSERT_OK_AND_ASSIGN(Eigen::VectorXd again, ProjectFeasible(proj, lp, theta));
    EXPECT_EQ(again, proj);
  }
}

TEST(LpEngineTest, DeterministicPivoting) {
  ASSERT_OK_AND_ASSIGN(ParametricLp lp, Case69Lp());
  Eigen::VectorXd theta(3);
  theta << 0.2, -0.7, 0.4;
  ASSERT_OK_AND_ASSIGN(LpSolution a, SolveLp(lp, theta));
  ASSERT_OK_AND_ASSIGN(LpSolution b, SolveLp(lp, theta));
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.basis, b.basis);
  EXPECT_EQ(a.pivots, b.pivots);
}

}  // namespace
}  // namespace qpopf

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

// Empirical and analytic differential-privacy accounting for region
// selectors, plus the mis-selection cost bound.

#ifndef QPOPF_PRIVACY_AUDIT_H_
#define QPOPF_PRIVACY_AUDIT_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"
#include "qpopf/grid_model.h"
#include "qpopf/mechanism.h"
#include "qpopf/mplp_regions.h"
#include "qpopf/quantum_circuit.h"

namespace qpopf {

inline constexpr double kProbabilityFloor = 1e-300;

struct AdjacencySpec {
  double delta_theta = 0.05;
  int pair_count = 100;
  uint64_t seed = 0;
};

struct AdjacentPair {
  Eigen::VectorXd theta;
  Eigen::VectorXd theta_prime;
};

// theta uniform on the box, theta' = theta + delta * u with u uniform on the
// unit sphere. Pairs with theta' outside the box are re-drawn.
absl::StatusOr<std::vector<AdjacentPair>> MakeAdjacentPairs(
    const ThetaBox& box, const AdjacencySpec& spec);

struct PairEpsilon {
  double epsilon = 0.0;  // +inf when one side underflows and the other not
  int worst_class = 0;   // 1-based
};

// max_k |log p_k - log p'_k|. -inf on one side only saturates to +inf.
PairEpsilon EmpiricalEpsilonLog(const Eigen::VectorXd& log_p,
                                const Eigen::VectorXd& log_p_prime);
// Probability-domain form; nonzero entries are floored at kProbabilityFloor.
PairEpsilon EmpiricalEpsilon(const Eigen::VectorXd& p,
                             const Eigen::VectorXd& p_prime);

// Linear-interpolation quantile of the finite entries; NaN if none.
double EpsilonPercentile(const std::vector<double>& samples, double q = 0.95);

struct PrivacyReport {
  std::string model;
  double gamma = 0.0;
  double beta = 1.0;
  double delta_theta = 0.0;
  std::vector<double> epsilons;
  double eps95 = 0.0;
  double eps_max = 0.0;
  int saturated = 0;  // pairs with an infinite log-ratio
  int worst_pair = -1;
  int worst_class = 0;
  double eps_reg = std::numeric_limits<double>::quiet_NaN();
  bool bound_satisfied = true;
};

// Report over precomputed output distributions, one pair per index.
absl::StatusOr<PrivacyReport> AuditDistributions(
    const std::vector<Eigen::VectorXd>& p,
    const std::vector<Eigen::VectorXd>& p_prime);

absl::StatusOr<PrivacyReport> AuditLogDistributions(
    const std::vector<Eigen::VectorXd>& log_p,
    const std::vector<Eigen::VectorXd>& log_p_prime);

absl::StatusOr<PrivacyReport> AuditMechanism(
    const Mechanism& mechanism, const std::vector<AdjacentPair>& pairs,
    int threads = 1);

// Fills eps_reg and bound_satisfied.
void AttachBound(PrivacyReport& report, double eps_reg);

nlohmann::json ToJson(const PrivacyReport& report);

// Telescoped trace-distance bound for the Ry re-uploading encoding:
// L * (scale / 2) * ||c||_2, where c_i counts the qubits per layer that
// encode component i.
double EncodingLipschitz(const CircuitConfig& config, int theta_dim);

struct LipschitzEstimate {
  double max_ratio = 0.0;
  int pairs = 0;
};

// Largest observed trace-distance / ||theta - theta'||_2 over random pairs
// at distance `radius`. A sample statistic, not a bound.
absl::StatusOr<LipschitzEstimate> EstimateEncodingLipschitz(
    const CircuitConfig& config, const VqcParams& params, const ThetaBox& box,
    int num_pairs, double radius, uint64_t seed);

// max_k ||w_k||_1.
double HeadNorm(const Eigen::MatrixXd& W);

// 4 beta (1 - gamma) L_enc delta ||W||_{inf,1}.
double TheoreticalEpsilon(double beta, double gamma, double l_enc,
                          double delta_theta, const Eigen::MatrixXd& W);

absl::StatusOr<double> RequiredBeta(double eps_target, double gamma_assumed,
                                    double l_enc, double delta_theta,
                                    const Eigen::MatrixXd& W);

// Budget overshoot of a user who ignores noise level gamma.
double WastedBudget(double eps_target, double gamma_actual);

// 1 - p_{k*}.
double MisSelectionProbability(const Eigen::VectorXd& p, int true_id);

// (K - 1) exp(-beta m).
double MisSelectionBound(int num_classes, double beta, double margin);

// Cost of dispatching each region's map at theta (projected when infeasible)
// minus the optimal cost. Entry k-1 belongs to region k.
absl::StatusOr<Eigen::VectorXd> RegionRegrets(const RegionAtlas& atlas,
                                              const ParametricLp& lp,
                                              const Eigen::VectorXd& theta,
                                              int true_id);

struct TradeoffBound {
  double margin = 0.0;
  double delta_j_max = 0.0;
  double bound = 0.0;
  double p_err = 0.0;
  double expected_regret = 0.0;  // exact sum_k p_k regret_k
  // Same bound written through the clean margin, (1 - gamma) m0.
  double bound_noise_form = 0.0;
  // Same bound written through eps_reg.
  double bound_epsilon_form = 0.0;
};

// `clean_logits` are the noise-free logits; logits = (1 - gamma) clean for a
// bias-free head.
TradeoffBound ComputeTradeoffBound(const Eigen::VectorXd& clean_logits,
                                   double gamma, double beta, int true_id,
                                   const Eigen::VectorXd& regrets,
                                   double l_enc, double delta_theta,
                                   const Eigen::MatrixXd& W);

}  // namespace qpopf

#endif  // QPOPF_PRIVACY_AUDIT_H_

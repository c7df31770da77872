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

// Monte-Carlo evaluation of randomized region selection: dispatch metrics,
// (gamma, beta) sweeps, and the qubit-budget and runtime models.

#ifndef QPOPF_POPF_EVAL_H_
#define QPOPF_POPF_EVAL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"
#include "qpopf/classifier.h"
#include "qpopf/grid_model.h"
#include "qpopf/mechanism.h"
#include "qpopf/mplp_regions.h"

namespace qpopf {

struct ScenarioBatch {
  std::vector<Eigen::VectorXd> theta;
  uint64_t seed = 0;

  int size() const { return static_cast<int>(theta.size()); }
};

using ScenarioSampler = std::function<Eigen::VectorXd(Rng&)>;

// Uniform over the box unless `sampler` is given.
ScenarioBatch MakeScenarioBatch(const ThetaBox& box, int count, uint64_t seed,
                                const ScenarioSampler& sampler = nullptr);

// Per-scenario ground truth plus a cache of dispatched solutions keyed by
// (scenario, region), shared by every evaluation over the same batch.
class EvaluationContext {
 public:
  static absl::StatusOr<EvaluationContext> Create(const RegionAtlas& atlas,
                                                  const ParametricLp& lp,
                                                  const ScenarioBatch& batch,
                                                  int threads = 1);

  const RegionAtlas& atlas() const { return *atlas_; }
  const ParametricLp& lp() const { return *lp_; }
  const ScenarioBatch& batch() const { return *batch_; }
  int true_region(int s) const { return true_region_[s]; }
  const Eigen::VectorXd& optimum(int s) const { return x_star_[s]; }
  double optimal_cost(int s) const { return j_star_[s]; }
  int threads() const { return threads_; }

  // Safe to call concurrently for distinct scenarios.
  absl::StatusOr<const DispatchResult*> Dispatch(int s, int id);

 private:
  EvaluationContext() = default;

  const RegionAtlas* atlas_ = nullptr;
  const ParametricLp* lp_ = nullptr;
  const ScenarioBatch* batch_ = nullptr;
  int threads_ = 1;
  std::vector<int> true_region_;
  std::vector<Eigen::VectorXd> x_star_;
  std::vector<double> j_star_;
  std::vector<std::map<int, DispatchResult>> cache_;
};

struct MetricsReport {
  std::string model;
  double gamma = 0.0;
  double beta = 0.0;
  int samples = 0;
  std::vector<std::string> tracked_names;
  Eigen::VectorXd mae;  // MW, per tracked variable
  double mae_mean = 0.0;
  double cost_gap = 0.0;  // mean (J - J*) / J*
  double infeasibility_rate = 0.0;
  double stochastic_accuracy = 0.0;
  // Standard errors of the four means above, over scenarios.
  double mae_mean_se = 0.0;
  double cost_gap_se = 0.0;
  double infeasibility_se = 0.0;
  double accuracy_se = 0.0;
};

// Draws one region per scenario from `probabilities[s]` with the scenario's
// own stream of `seed`, dispatches it and aggregates the metrics.
absl::StatusOr<MetricsReport> EvaluateDistributions(
    EvaluationContext& context, const std::vector<Eigen::VectorXd>& probabilities,
    uint64_t seed);

absl::StatusOr<MetricsReport> Evaluate(EvaluationContext& context,
                                       const Mechanism& mechanism,
                                       uint64_t seed);

// Full factorial (gamma, beta) evaluation of a VQC. Circuit features are
// computed once per scenario.
absl::StatusOr<std::vector<MetricsReport>> Sweep(
    EvaluationContext& context, const VqcModel& model,
    const std::vector<double>& gammas, const std::vector<double>& betas,
    uint64_t seed);

// gamma,beta,infeasibility_pct,cost_gap_pct,accuracy
std::string HeatmapCsv(const std::vector<MetricsReport>& reports);

nlohmann::json ToJson(const MetricsReport& report);

// Mean optimal cost over the batch from point location and affine maps.
absl::StatusOr<double> ExpectedCost(const RegionAtlas& atlas,
                                    const ParametricLp& lp,
                                    const ScenarioBatch& batch);

struct QubitBudget {
  int variable_qubits = 0;
  int slack_qubits = 0;
  int direct_total = 0;
  int ours = 0;
};

QubitBudget ComputeQubitBudget(int bits_per_variable, int bits_per_slack,
                               int num_variables = 42, int num_constraints = 214,
                               int num_qubits_ours = 5);

struct RuntimeEstimate {
  int depth = 0;
  double micros = 0.0;
};

// D = 1 + L (1 + n_q); T = t_prep_meas + t_gate D.
RuntimeEstimate RuntimeModel(int num_qubits, int num_layers,
                             double t_prep_meas_us = 1.0,
                             double t_gate_us = 0.01);

struct SpeedupRow {
  std::string method;
  double runtime_us = 0.0;
  double speedup = 0.0;  // LP baseline time / this time
};

// Measures per-scenario wall time of the LP solve and of point location plus
// the affine map; the VQC row uses RuntimeModel.
absl::StatusOr<std::vector<SpeedupRow>> MeasureSpeedup(
    const RegionAtlas& atlas, const ParametricLp& lp, const ScenarioBatch& batch,
    int num_qubits, int num_layers);

std::string SpeedupCsv(const std::vector<SpeedupRow>& rows);

}  // namespace qpopf

#endif  // QPOPF_POPF_EVAL_H_

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

// Region classifiers: the variational quantum model with a linear
// temperature-controlled head, and the tanh MLP baseline with Gaussian logit
// noise. Both are trained by minibatch Adam on cross-entropy.

#ifndef QPOPF_CLASSIFIER_H_
#define QPOPF_CLASSIFIER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"
#include "qpopf/mechanism.h"
#include "qpopf/mplp_regions.h"
#include "qpopf/privacy_audit.h"
#include "qpopf/quantum_circuit.h"

namespace qpopf {

struct LinearHead {
  Eigen::MatrixXd W;  // K x features
  Eigen::VectorXd b;  // K, zero for a bias-free head

  bool bias_free() const { return b.size() == 0 || b.isZero(0.0); }
  Eigen::VectorXd Logits(const Eigen::VectorXd& h) const;
};

struct VqcModel {
  CircuitConfig circuit;
  VqcParams params;
  LinearHead head;

  int num_classes() const { return static_cast<int>(head.W.rows()); }
  int num_params() const;
};

struct VqcOutput {
  Eigen::VectorXd h;  // features
  Eigen::VectorXd s;  // logits
  Eigen::VectorXd p;  // probabilities
};

absl::StatusOr<VqcOutput> VqcForward(const VqcModel& model,
                                     const Eigen::VectorXd& theta, double gamma,
                                     double beta);

// Logits from precomputed noise-free features: W (1 - gamma) h0 + b.
Eigen::VectorXd VqcLogitsFromFeatures(const VqcModel& model,
                                      const Eigen::VectorXd& h0, double gamma);

struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // hidden layers
  std::vector<Eigen::VectorXd> biases;
  Eigen::MatrixXd head;  // K x last width, no bias

  int num_classes() const { return static_cast<int>(head.rows()); }
  int num_params() const;
};

// Standard fan-in init: U(-1, 1) / sqrt(fan_in), zero biases.
MlpModel InitMlp(int input_dim, const std::vector<int>& hidden, int num_classes,
                 uint64_t seed);

absl::StatusOr<Eigen::VectorXd> MlpLogits(const MlpModel& model,
                                          const Eigen::VectorXd& theta);

class VqcMechanism : public Mechanism {
 public:
  VqcMechanism(const VqcModel& model, double gamma, double beta)
      : model_(model), gamma_(gamma), beta_(beta) {}

  std::string name() const override { return "vqc"; }
  int num_classes() const override { return model_.num_classes(); }
  absl::StatusOr<Eigen::VectorXd> Probabilities(
      const Eigen::VectorXd& theta) const override;
  absl::StatusOr<Eigen::VectorXd> LogProbabilities(
      const Eigen::VectorXd& theta) const override;

 private:
  const VqcModel& model_;
  double gamma_;
  double beta_;
};

// Softmax(beta (s + sigma z)), z ~ N(0, I). Probabilities are the average
// over a fixed set of `draws` noise vectors shared by every theta, so the
// estimated distribution is a smooth deterministic function of theta.
class NoisyMlpMechanism : public Mechanism {
 public:
  NoisyMlpMechanism(const MlpModel& model, double sigma, double beta,
                    int draws = 2000, uint64_t noise_seed = 0);

  std::string name() const override { return "mlp"; }
  int num_classes() const override { return model_.num_classes(); }
  absl::StatusOr<Eigen::VectorXd> Probabilities(
      const Eigen::VectorXd& theta) const override;
  absl::StatusOr<Eigen::VectorXd> LogProbabilities(
      const Eigen::VectorXd& theta) const override;
  // Draws fresh noise from `rng`.
  absl::StatusOr<int> Sample(const Eigen::VectorXd& theta,
                             Rng& rng) const override;

  double sigma() const { return sigma_; }

 private:
  const MlpModel& model_;
  double sigma_;
  double beta_;
  Eigen::MatrixXd noise_;  // draws x K
};

// Point location in the atlas, returned as a one-hot distribution.
class OracleMechanism : public Mechanism {
 public:
  explicit OracleMechanism(const RegionAtlas& atlas) : atlas_(atlas) {}

  std::string name() const override { return "oracle"; }
  int num_classes() const override { return atlas_.num_regions(); }
  absl::StatusOr<Eigen::VectorXd> Probabilities(
      const Eigen::VectorXd& theta) const override;

 private:
  const RegionAtlas& atlas_;
};

struct Dataset {
  std::vector<Eigen::VectorXd> theta;
  std::vector<int> label;  // 1-based region ids

  int size() const { return static_cast<int>(theta.size()); }
};

// Uniform samples of the atlas box labeled by LocateRegion. Uncovered points
// are skipped and re-drawn.
absl::StatusOr<Dataset> SampleDataset(const RegionAtlas& atlas, int count,
                                      uint64_t seed);

// First round(fraction * size) samples for training, the rest for testing.
std::pair<Dataset, Dataset> SplitDataset(const Dataset& data,
                                         double train_fraction);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.05;
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double beta = 1.0;  // softmax temperature used in the training loss
  int threads = 1;
};

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

template <typename Model>
struct TrainResult {
  Model model;
  std::vector<EpochLog> log;
};

// phi ~ U(-pi, pi), head ~ U(-1, 1) / sqrt(n_q), no bias.
VqcModel InitVqc(const CircuitConfig& circuit, int num_classes, uint64_t seed);

// Joint Adam training of phi (parameter-shift Jacobian) and the head at
// gamma = 0. `test` may be empty.
absl::StatusOr<TrainResult<VqcModel>> TrainVqc(const Dataset& train,
                                               const Dataset& test,
                                               const CircuitConfig& circuit,
                                               int num_classes,
                                               const TrainConfig& config);

absl::StatusOr<TrainResult<MlpModel>> TrainMlp(const Dataset& train,
                                               const Dataset& test,
                                               const std::vector<int>& hidden,
                                               int num_classes,
                                               const TrainConfig& config);

// Argmax accuracy on noise-free logits.
absl::StatusOr<double> Accuracy(const VqcModel& model, const Dataset& data);
absl::StatusOr<double> Accuracy(const MlpModel& model, const Dataset& data);

struct SigmaCalibration {
  double sigma = 0.0;
  double eps95 = 0.0;
  double baseline_eps95 = 0.0;  // at sigma = 0
  bool target_above_baseline = false;
  int evaluations = 0;
};

struct CalibrationOptions {
  double rel_tol = 0.05;
  int max_evaluations = 60;
  int draws = 2000;
  uint64_t noise_seed = 0;
  int threads = 1;
};

// Bisects sigma until the audited eps95 of the noisy MLP is within rel_tol of
// the target. A target at or above the sigma = 0 value returns sigma = 0.
absl::StatusOr<SigmaCalibration> CalibrateSigma(
    const MlpModel& model, double beta, double target_eps95,
    const std::vector<AdjacentPair>& pairs,
    const CalibrationOptions& options = {});

nlohmann::json ToJson(const VqcModel& model);
absl::StatusOr<VqcModel> VqcModelFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const MlpModel& model);
absl::StatusOr<MlpModel> MlpModelFromJson(const nlohmann::json& j);

}  // namespace qpopf

#endif  // QPOPF_CLASSIFIER_H_

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

// Randomized region selectors: anything that maps theta to a distribution
// over region ids 1..K.

#ifndef QPOPF_MECHANISM_H_
#define QPOPF_MECHANISM_H_

#include <string>

#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "qpopf/util.h"

namespace qpopf {

// p_k proportional to exp(beta s_k), with max-subtraction.
Eigen::VectorXd SoftmaxProbs(const Eigen::VectorXd& logits, double beta);
// log SoftmaxProbs, computed without underflow.
Eigen::VectorXd LogSoftmax(const Eigen::VectorXd& logits, double beta);
double LogSumExp(const Eigen::VectorXd& z);

// Inverse-CDF draw; returns a 1-based id.
int SampleCategorical(const Eigen::VectorXd& p, Rng& rng);

// s_{k*} - max_{k != k*} s_k for 1-based `true_id`.
double Margin(const Eigen::VectorXd& logits, int true_id);

class Mechanism {
 public:
  virtual ~Mechanism() = default;

  virtual std::string name() const = 0;
  virtual int num_classes() const = 0;
  // Output distribution over ids 1..K (entry k-1 is id k).
  virtual absl::StatusOr<Eigen::VectorXd> Probabilities(
      const Eigen::VectorXd& theta) const = 0;
  // Natural log of Probabilities. The default takes the log of the
  // probabilities; overrides stay finite where those underflow.
  virtual absl::StatusOr<Eigen::VectorXd> LogProbabilities(
      const Eigen::VectorXd& theta) const;
  // One release of the mechanism.
  virtual absl::StatusOr<int> Sample(const Eigen::VectorXd& theta,
                                     Rng& rng) const;
};

}  // namespace qpopf

#endif  // QPOPF_MECHANISM_H_

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

#include "qpopf/mechanism.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace qpopf {

Eigen::VectorXd SoftmaxProbs(const Eigen::VectorXd& logits, double beta) {
  const Eigen::VectorXd z = beta * logits;
  const double top = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - top).exp();
  return e / e.sum();
}

double LogSumExp(const Eigen::VectorXd& z) {
  const double top = z.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((z.array() - top).exp().sum());
}

Eigen::VectorXd LogSoftmax(const Eigen::VectorXd& logits, double beta) {
  const Eigen::VectorXd z = beta * logits;
  return z.array() - LogSumExp(z);
}

int SampleCategorical(const Eigen::VectorXd& p, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng) * p.sum();
  double cum = 0.0;
  int last = 0;
  for (int k = 0; k < p.size(); ++k) {
    if (p(k) <= 0.0) continue;
    cum += p(k);
    last = k;
    if (u < cum) return k + 1;
  }
  return last + 1;
}

double Margin(const Eigen::VectorXd& logits, int true_id) {
  double rival = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < logits.size(); ++k) {
    if (k != true_id - 1) rival = std::max(rival, logits(k));
  }
  return logits(true_id - 1) - rival;
}

absl::StatusOr<Eigen::VectorXd> Mechanism::LogProbabilities(
    const Eigen::VectorXd& theta) const {
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd p, Probabilities(theta));
  return Eigen::VectorXd(p.array().log());
}

absl::StatusOr<int> Mechanism::Sample(const Eigen::VectorXd& theta,
                                      Rng& rng) const {
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd p, Probabilities(theta));
  return SampleCategorical(p, rng);
}

}  // namespace qpopf

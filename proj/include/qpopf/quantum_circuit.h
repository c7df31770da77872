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

// Statevector simulation of the data-reuploading Ry/CNOT circuit.
//
// Qubit 0 is the most significant bit of the basis-state index. Every gate in
// the circuit is real (Ry and CNOT), so starting from |0...0> all amplitudes
// stay real and are stored as doubles.

#ifndef QPOPF_QUANTUM_CIRCUIT_H_
#define QPOPF_QUANTUM_CIRCUIT_H_

#include <functional>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include <Eigen/Dense>
#include "json.hpp"
#include "qpopf/util.h"

namespace qpopf {

// Radians per unit of normalized theta. Must stay below pi/2 so that the
// box edges -1 and +1 map to distinct states.
inline constexpr double kEncodingScale = 0.4;

struct CircuitConfig {
  int num_qubits = 5;
  int num_layers = 6;
  // encoding_pattern[j] is the theta component encoded on qubit j.
  std::vector<int> encoding_pattern;
  double encoding_scale = kEncodingScale;
};

// Cyclic tiling: qubit j encodes component j mod num_params.
CircuitConfig MakeCircuitConfig(int num_qubits, int num_layers, int num_params);

absl::Status ValidateConfig(const CircuitConfig& config, int theta_dim);

using StateVector = Eigen::VectorXd;

StateVector ZeroState(int num_qubits);

void ApplyRy(StateVector& state, int num_qubits, int qubit, double angle);
void ApplyCnot(StateVector& state, int num_qubits, int control, int target);
// CNOT(j, j+1) for j = 0..n-2, in order. No-op on one qubit.
void ApplyCnotLadder(StateVector& state, int num_qubits);

// Trainable angles, one row per layer.
struct VqcParams {
  Eigen::MatrixXd phi;  // num_layers x num_qubits
};

int NumParams(const CircuitConfig& config);

absl::StatusOr<StateVector> RunCircuit(const CircuitConfig& config,
                                       const VqcParams& params,
                                       const Eigen::VectorXd& theta);

// <Z_j> for each qubit.
Eigen::VectorXd ExpectationZ(const StateVector& state, int num_qubits);

// (1 - gamma) <Z_j>: Z expectations after the global depolarizing channel.
absl::StatusOr<Eigen::VectorXd> Features(const StateVector& state,
                                         int num_qubits, double gamma);

// Finite-shot estimate of Features: each qubit's outcome count is a binomial
// draw with the depolarized probability of reading 0.
absl::StatusOr<Eigen::VectorXd> SampleFeatures(const StateVector& state,
                                               int num_qubits, double gamma,
                                               int shots, Rng& rng);

// d features / d phi (num_qubits x NumParams), column l*num_qubits + j for
// phi(l, j), by the two-term shift rule. Exact for this gate set.
absl::StatusOr<Eigen::MatrixXd> FeatureJacobian(const CircuitConfig& config,
                                                const VqcParams& params,
                                                const Eigen::VectorXd& theta,
                                                double gamma);

// Gradient of loss(features) over phi, shaped like phi. The shift rule is
// applied to the features and chained through `loss_grad` (d loss / d h),
// which keeps it exact for losses that are nonlinear in h.
absl::StatusOr<Eigen::MatrixXd> ParamShiftGrad(
    const CircuitConfig& config, const VqcParams& params,
    const Eigen::VectorXd& theta, double gamma,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& loss_grad);

// Shifts each angle by +-pi/2 and differences the loss directly. Exact when
// the loss is affine in the features.
absl::StatusOr<Eigen::MatrixXd> ParamShiftGradDirect(
    const CircuitConfig& config, const VqcParams& params,
    const Eigen::VectorXd& theta, double gamma,
    const std::function<double(const Eigen::VectorXd&)>& loss);

// sqrt(1 - |<a|b>|^2) for normalized pure states.
double TraceDistance(const StateVector& a, const StateVector& b);

nlohmann::json ToJson(const CircuitConfig& config);
absl::StatusOr<CircuitConfig> CircuitConfigFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const VqcParams& params);
absl::StatusOr<VqcParams> VqcParamsFromJson(const nlohmann::json& j,
                                            const CircuitConfig& config);

}  // namespace qpopf

#endif  // QPOPF_QUANTUM_CIRCUIT_H_

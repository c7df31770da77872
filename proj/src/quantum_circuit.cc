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

#include "qpopf/quantum_circuit.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/strings/str_cat.h"

namespace qpopf {
namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

int BitOf(int index, int num_qubits, int qubit) {
  return (index >> (num_qubits - 1 - qubit)) & 1;
}

absl::Status CheckGamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("noise level ", gamma, " outside [0, 1]"));
  }
  return absl::OkStatus();
}

}  // namespace

CircuitConfig MakeCircuitConfig(int num_qubits, int num_layers,
                                int num_params) {
  CircuitConfig config;
  config.num_qubits = num_qubits;
  config.num_layers = num_layers;
  for (int j = 0; j < num_qubits; ++j) {
    config.encoding_pattern.push_back(num_params > 0 ? j % num_params : 0);
  }
  return config;
}

absl::Status ValidateConfig(const CircuitConfig& config, int theta_dim) {
  if (config.num_qubits < 1 || config.num_qubits > 20) {
    return absl::InvalidArgumentError("num_qubits must be in [1, 20]");
  }
  if (config.num_layers < 0) {
    return absl::InvalidArgumentError("num_layers must be nonnegative");
  }
  if (static_cast<int>(config.encoding_pattern.size()) != config.num_qubits) {
    return absl::InvalidArgumentError(
        "encoding_pattern must have one entry per qubit");
  }
  for (int k : config.encoding_pattern) {
    if (k < 0 || k >= theta_dim) {
      return absl::InvalidArgumentError(absl::StrCat(
          "encoding_pattern entry ", k, " invalid for theta dimension ",
          theta_dim));
    }
  }
  if (!std::isfinite(config.encoding_scale)) {
    return absl::InvalidArgumentError("encoding_scale must be finite");
  }
  return absl::OkStatus();
}

StateVector ZeroState(int num_qubits) {
  StateVector s = StateVector::Zero(int64_t{1} << num_qubits);
  s(0) = 1.0;
  return s;
}

void ApplyRy(StateVector& state, int num_qubits, int qubit, double angle) {
  const double c = std::cos(angle / 2.0);
  const double s = std::sin(angle / 2.0);
  const int64_t stride = int64_t{1} << (num_qubits - 1 - qubit);
  const int64_t dim = state.size();
  for (int64_t block = 0; block < dim; block += 2 * stride) {
    for (int64_t i = block; i < block + stride; ++i) {
      const double a0 = state(i);
      const double a1 = state(i + stride);
      state(i) = c * a0 - s * a1;
      state(i + stride) = s * a0 + c * a1;
    }
  }
}

void ApplyCnot(StateVector& state, int num_qubits, int control, int target) {
  const int64_t cmask = int64_t{1} << (num_qubits - 1 - control);
  const int64_t tmask = int64_t{1} << (num_qubits - 1 - target);
  for (int64_t i = 0; i < state.size(); ++i) {
    if ((i & cmask) && !(i & tmask)) std::swap(state(i), state(i | tmask));
  }
}

void ApplyCnotLadder(StateVector& state, int num_qubits) {
  for (int j = 0; j + 1 < num_qubits; ++j) ApplyCnot(state, num_qubits, j, j + 1);
}

int NumParams(const CircuitConfig& config) {
  return config.num_layers * config.num_qubits;
}

absl::StatusOr<StateVector> RunCircuit(const CircuitConfig& config,
                                       const VqcParams& params,
                                       const Eigen::VectorXd& theta) {
  QPOPF_RETURN_IF_ERROR(ValidateConfig(config, static_cast<int>(theta.size())));
  const int n = config.num_qubits;
  if (params.phi.rows() != config.num_layers || params.phi.cols() != n) {
    return absl::InvalidArgumentError("phi must be num_layers x num_qubits");
  }
  StateVector state = ZeroState(n);
  for (int l = 0; l < config.num_layers; ++l) {
    for (int j = 0; j < n; ++j) {
      ApplyRy(state, n, j,
              config.encoding_scale * theta(config.encoding_pattern[j]));
    }
    for (int j = 0; j < n; ++j) ApplyRy(state, n, j, params.phi(l, j));
    ApplyCnotLadder(state, n);
  }
  return state;
}

Eigen::VectorXd ExpectationZ(const StateVector& state, int num_qubits) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(num_qubits);
  for (int64_t i = 0; i < state.size(); ++i) {
    const double p = state(i) * state(i);
    for (int j = 0; j < num_qubits; ++j) {
      z(j) += BitOf(static_cast<int>(i), num_qubits, j) ? -p : p;
    }
  }
  return z;
}

absl::StatusOr<Eigen::VectorXd> Features(const StateVector& state,
                                         int num_qubits, double gamma) {
  QPOPF_RETURN_IF_ERROR(CheckGamma(gamma));
  return Eigen::VectorXd((1.0 - gamma) * ExpectationZ(state, num_qubits));
}

absl::StatusOr<Eigen::VectorXd> SampleFeatures(const StateVector& state,
                                               int num_qubits, double gamma,
                                               int shots, Rng& rng) {
  if (shots < 1) return absl::InvalidArgumentError("shots must be positive");
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd h, Features(state, num_qubits, gamma));
  for (int j = 0; j < num_qubits; ++j) {
    const double p0 = std::clamp(0.5 * (1.0 + h(j)), 0.0, 1.0);
    std::binomial_distribution<int> draw(shots, p0);
    h(j) = 2.0 * draw(rng) / shots - 1.0;
  }
  return h;
}

absl::StatusOr<Eigen::MatrixXd> FeatureJacobian(const CircuitConfig& config,
                                                const VqcParams& params,
                                                const Eigen::VectorXd& theta,
                                                double gamma) {
  QPOPF_RETURN_IF_ERROR(CheckGamma(gamma));
  const int n = config.num_qubits;
  Eigen::MatrixXd J(n, NumParams(config));
  VqcParams shifted = params;
  for (int l = 0; l < config.num_layers; ++l) {
    for (int j = 0; j < n; ++j) {
      const double orig = params.phi(l, j);
      shifted.phi(l, j) = orig + kHalfPi;
      QPOPF_ASSIGN_OR_RETURN(StateVector plus, RunCircuit(config, shifted, theta));
      shifted.phi(l, j) = orig - kHalfPi;
      QPOPF_ASSIGN_OR_RETURN(StateVector minus,
                             RunCircuit(config, shifted, theta));
      shifted.phi(l, j) = orig;
      J.col(l * n + j) =
          0.5 * (1.0 - gamma) * (ExpectationZ(plus, n) - ExpectationZ(minus, n));
    }
  }
  return J;
}

absl::StatusOr<Eigen::MatrixXd> ParamShiftGrad(
    const CircuitConfig& config, const VqcParams& params,
    const Eigen::VectorXd& theta, double gamma,
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& loss_grad) {
  QPOPF_ASSIGN_OR_RETURN(StateVector state, RunCircuit(config, params, theta));
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd h,
                         Features(state, config.num_qubits, gamma));
  QPOPF_ASSIGN_OR_RETURN(Eigen::MatrixXd J,
                         FeatureJacobian(config, params, theta, gamma));
  const Eigen::VectorXd g = J.transpose() * loss_grad(h);
  Eigen::MatrixXd out(config.num_layers, config.num_qubits);
  for (int l = 0; l < config.num_layers; ++l) {
    out.row(l) = g.segment(l * config.num_qubits, config.num_qubits).transpose();
  }
  return out;
}

absl::StatusOr<Eigen::MatrixXd> ParamShiftGradDirect(
    const CircuitConfig& config, const VqcParams& params,
    const Eigen::VectorXd& theta, double gamma,
    const std::function<double(const Eigen::VectorXd&)>& loss) {
  const int n = config.num_qubits;
  Eigen::MatrixXd out(config.num_layers, n);
  VqcParams shifted = params;
  auto eval = [&](const VqcParams& p) -> absl::StatusOr<double> {
    QPOPF_ASSIGN_OR_RETURN(StateVector s, RunCircuit(config, p, theta));
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd h, Features(s, n, gamma));
    return loss(h);
  };
  for (int l = 0; l < config.num_layers; ++l) {
    for (int j = 0; j < n; ++j) {
      const double orig = params.phi(l, j);
      shifted.phi(l, j) = orig + kHalfPi;
      QPOPF_ASSIGN_OR_RETURN(double lp, eval(shifted));
      shifted.phi(l, j) = orig - kHalfPi;
      QPOPF_ASSIGN_OR_RETURN(double lm, eval(shifted));
      shifted.phi(l, j) = orig;
      out(l, j) = 0.5 * (lp - lm);
    }
  }
  return out;
}

double TraceDistance(const StateVector& a, const StateVector& b) {
  const double overlap = a.dot(b);
  return std::sqrt(std::max(0.0, 1.0 - overlap * overlap));
}

nlohmann::json ToJson(const CircuitConfig& config) {
  return {{"num_qubits", config.num_qubits},
          {"num_layers", config.num_layers},
          {"encoding_pattern", config.encoding_pattern},
          {"encoding_scale", config.encoding_scale}};
}

absl::StatusOr<CircuitConfig> CircuitConfigFromJson(const nlohmann::json& j) {
  try {
    CircuitConfig config;
    config.num_qubits = j.at("num_qubits").get<int>();
    config.num_layers = j.at("num_layers").get<int>();
    config.encoding_pattern = j.at("encoding_pattern").get<std::vector<int>>();
    config.encoding_scale = j.at("encoding_scale").get<double>();
    return config;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed circuit config: ", e.what()));
  }
}

nlohmann::json ToJson(const VqcParams& params) { return ToJson(params.phi); }

absl::StatusOr<VqcParams> VqcParamsFromJson(const nlohmann::json& j,
                                            const CircuitConfig& config) {
  QPOPF_ASSIGN_OR_RETURN(Eigen::MatrixXd phi, MatrixFromJson(j));
  if (phi.rows() != config.num_layers || phi.cols() != config.num_qubits) {
    return absl::InvalidArgumentError("phi shape does not match the config");
  }
  return VqcParams{phi};
}

}  // namespace qpopf

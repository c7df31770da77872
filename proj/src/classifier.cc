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

#include "qpopf/classifier.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "absl/strings/str_cat.h"
#include "qpopf/util.h"

namespace qpopf {

namespace {

absl::Status CheckBeta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    return absl::InvalidArgumentError("beta must be positive and finite");
  }
  return absl::OkStatus();
}

class Adam {
 public:
  Adam(int size, const TrainConfig& config)
      : m_(Eigen::VectorXd::Zero(size)),
        v_(Eigen::VectorXd::Zero(size)),
        config_(config) {}

  void Step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
    ++t_;
    m_ = config_.adam_beta1 * m_ + (1.0 - config_.adam_beta1) * grad;
    v_ = config_.adam_beta2 * v_ +
         (1.0 - config_.adam_beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(config_.adam_beta1, t_);
    const double c2 = 1.0 - std::pow(config_.adam_beta2, t_);
    params.array() -= config_.learning_rate * (m_.array() / c1) /
                      ((v_.array() / c2).sqrt() + config_.adam_eps);
  }

 private:
  Eigen::VectorXd m_, v_;
  const TrainConfig& config_;
  int t_ = 0;
};

absl::Status CheckTrainInputs(const Dataset& train, int num_classes,
                              const TrainConfig& config) {
  if (config.epochs < 0 || config.batch_size < 1 ||
      !(config.learning_rate > 0.0)) {
    return absl::InvalidArgumentError(
        "epochs must be >= 0, batch size and learning rate positive");
  }
  QPOPF_RETURN_IF_ERROR(CheckBeta(config.beta));
  if (num_classes < 1) return absl::InvalidArgumentError("need K >= 1");
  if (config.epochs > 0 && train.size() == 0) {
    return absl::InvalidArgumentError("empty training set");
  }
  for (int y : train.label) {
    if (y < 1 || y > num_classes) {
      return absl::InvalidArgumentError(absl::StrCat("label ", y, " out of range"));
    }
  }
  return absl::OkStatus();
}

struct SampleGrad {
  Eigen::VectorXd grad;
  double loss = 0.0;
};

// Shared epoch loop. `sample_grad(params, i)` returns the loss and gradient of
// training sample i; `accuracy(params, data)` scores a dataset.
template <typename GradFn, typename AccFn>
absl::StatusOr<std::vector<EpochLog>> RunAdam(Eigen::VectorXd& params,
                                              const Dataset& train,
                                              const Dataset& test,
                                              const TrainConfig& config,
                                              const GradFn& sample_grad,
                                              const AccFn& accuracy) {
  std::vector<EpochLog> log;
  Adam adam(static_cast<int>(params.size()), config);
  Rng shuffle_rng = StreamRng(config.seed, 1);
  std::vector<int> order(train.size());
  for (int i = 0; i < train.size(); ++i) order[i] = i;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (int start = 0, batch = 0; start < train.size();
         start += config.batch_size, ++batch) {
      const int count = std::min(config.batch_size, train.size() - start);
      std::vector<absl::StatusOr<SampleGrad>> grads(count);
      ParallelFor(count, config.threads, [&](int b) {
        grads[b] = sample_grad(params, order[start + b]);
      });
      Eigen::VectorXd total = Eigen::VectorXd::Zero(params.size());
      double batch_loss = 0.0;
      for (auto& g : grads) {
        if (!g.ok()) return g.status();
        total += g->grad;
        batch_loss += g->loss;
      }
      if (!std::isfinite(batch_loss) || !total.allFinite()) {
        return absl::InternalError(absl::StrCat(
            "training diverged at epoch ", epoch, ", batch ", batch,
            " (loss ", batch_loss / count, ")"));
      }
      loss_sum += batch_loss;
      adam.Step(params, total / count);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = loss_sum / train.size();
    QPOPF_ASSIGN_OR_RETURN(entry.train_accuracy, accuracy(params, train));
    if (test.size() > 0) {
      QPOPF_ASSIGN_OR_RETURN(entry.test_accuracy, accuracy(params, test));
    }
    log.push_back(entry);
  }
  return log;
}

int ArgmaxId(const Eigen::VectorXd& v) {
  Eigen::Index k = 0;
  v.maxCoeff(&k);
  return static_cast<int>(k) + 1;
}

// VQC parameter vector layout: phi row-major, then head W row-major.
Eigen::VectorXd PackVqc(const VqcModel& m) {
  const int np = static_cast<int>(m.params.phi.size());
  Eigen::VectorXd v(np + m.head.W.size());
  int k = 0;
  for (int l = 0; l < m.params.phi.rows(); ++l)
    for (int j = 0; j < m.params.phi.cols(); ++j) v(k++) = m.params.phi(l, j);
  for (int r = 0; r < m.head.W.rows(); ++r)
    for (int c = 0; c < m.head.W.cols(); ++c) v(k++) = m.head.W(r, c);
  return v;
}

void UnpackVqc(const Eigen::VectorXd& v, VqcModel& m) {
  int k = 0;
  for (int l = 0; l < m.params.phi.rows(); ++l)
    for (int j = 0; j < m.params.phi.cols(); ++j) m.params.phi(l, j) = v(k++);
  for (int r = 0; r < m.head.W.rows(); ++r)
    for (int c = 0; c < m.head.W.cols(); ++c) m.head.W(r, c) = v(k++);
}

Eigen::VectorXd PackMlp(const MlpModel& m) {
  std::vector<double> out;
  auto push = [&](const Eigen::MatrixXd& a) {
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) out.push_back(a(r, c));
  };
  for (size_t l = 0; l < m.weights.size(); ++l) {
    push(m.weights[l]);
    push(m.biases[l]);
  }
  push(m.head);
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<int>(out.size()));
}

void UnpackMlp(const Eigen::VectorXd& v, MlpModel& m) {
  int k = 0;
  auto pull = [&](auto& a) {
    for (int r = 0; r < a.rows(); ++r)
      for (int c = 0; c < a.cols(); ++c) a(r, c) = v(k++);
  };
  for (size_t l = 0; l < m.weights.size(); ++l) {
    pull(m.weights[l]);
    pull(m.biases[l]);
  }
  pull(m.head);
}

// Hidden activations a_0 = theta, a_l = tanh(W_l a_{l-1} + b_l).
std::vector<Eigen::VectorXd> MlpActivations(const MlpModel& m,
                                            const Eigen::VectorXd& theta) {
  std::vector<Eigen::VectorXd> a{theta};
  for (size_t l = 0; l < m.weights.size(); ++l) {
    a.push_back((m.weights[l] * a.back() + m.biases[l]).array().tanh().matrix());
  }
  return a;
}

}  // namespace

Eigen::VectorXd LinearHead::Logits(const Eigen::VectorXd& h) const {
  Eigen::VectorXd s = W * h;
  if (b.size() == s.size()) s += b;
  return s;
}

int VqcModel::num_params() const {
  const Eigen::Index bias = head.bias_free() ? 0 : head.b.size();
  return static_cast<int>(params.phi.size() + head.W.size() + bias);
}

absl::StatusOr<VqcOutput> VqcForward(const VqcModel& model,
                                     const Eigen::VectorXd& theta, double gamma,
                                     double beta) {
  QPOPF_RETURN_IF_ERROR(CheckBeta(beta));
  QPOPF_ASSIGN_OR_RETURN(StateVector state,
                         RunCircuit(model.circuit, model.params, theta));
  VqcOutput out;
  QPOPF_ASSIGN_OR_RETURN(out.h,
                         Features(state, model.circuit.num_qubits, gamma));
  out.s = model.head.Logits(out.h);
  out.p = SoftmaxProbs(out.s, beta);
  return out;
}

Eigen::VectorXd VqcLogitsFromFeatures(const VqcModel& model,
                                      const Eigen::VectorXd& h0, double gamma) {
  return model.head.Logits((1.0 - gamma) * h0);
}

int MlpModel::num_params() const {
  int count = static_cast<int>(head.size());
  for (size_t l = 0; l < weights.size(); ++l) {
    count += static_cast<int>(weights[l].size() + biases[l].size());
  }
  return count;
}

MlpModel InitMlp(int input_dim, const std::vector<int>& hidden, int num_classes,
                 uint64_t seed) {
  Rng rng = StreamRng(seed, 0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto fill = [&](int rows, int cols) {
    Eigen::MatrixXd a(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) a(r, c) = scale * unit(rng);
    return a;
  };
  MlpModel m;
  int width = input_dim;
  for (int h : hidden) {
    m.weights.push_back(fill(h, width));
    m.biases.push_back(Eigen::VectorXd::Zero(h));
    width = h;
  }
  m.head = fill(num_classes, width);
  return m;
}

absl::StatusOr<Eigen::VectorXd> MlpLogits(const MlpModel& model,
                                          const Eigen::VectorXd& theta) {
  const int input = model.weights.empty()
                        ? static_cast<int>(model.head.cols())
                        : static_cast<int>(model.weights[0].cols());
  if (theta.size() != input) {
    return absl::InvalidArgumentError("MLP input dimension mismatch");
  }
  return Eigen::VectorXd(model.head * MlpActivations(model, theta).back());
}

absl::StatusOr<Eigen::VectorXd> VqcMechanism::Probabilities(
    const Eigen::VectorXd& theta) const {
  QPOPF_ASSIGN_OR_RETURN(VqcOutput out, VqcForward(model_, theta, gamma_, beta_));
  return out.p;
}

absl::StatusOr<Eigen::VectorXd> VqcMechanism::LogProbabilities(
    const Eigen::VectorXd& theta) const {
  QPOPF_ASSIGN_OR_RETURN(VqcOutput out, VqcForward(model_, theta, gamma_, beta_));
  return LogSoftmax(out.s, beta_);
}

NoisyMlpMechanism::NoisyMlpMechanism(const MlpModel& model, double sigma,
                                     double beta, int draws,
                                     uint64_t noise_seed)
    : model_(model), sigma_(sigma), beta_(beta) {
  const int rows = sigma > 0.0 ? std::max(draws, 1) : 0;
  noise_.resize(rows, model.num_classes());
  Rng rng = StreamRng(noise_seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int d = 0; d < rows; ++d)
    for (int k = 0; k < noise_.cols(); ++k) noise_(d, k) = normal(rng);
}

absl::StatusOr<Eigen::VectorXd> NoisyMlpMechanism::Probabilities(
    const Eigen::VectorXd& theta) const {
  QPOPF_RETURN_IF_ERROR(CheckBeta(beta_));
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd s, MlpLogits(model_, theta));
  if (noise_.rows() == 0) return SoftmaxProbs(s, beta_);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(s.size());
  for (int d = 0; d < noise_.rows(); ++d) {
    p += SoftmaxProbs(s + sigma_ * noise_.row(d).transpose(), beta_);
  }
  return Eigen::VectorXd(p / static_cast<double>(noise_.rows()));
}

absl::StatusOr<Eigen::VectorXd> NoisyMlpMechanism::LogProbabilities(
    const Eigen::VectorXd& theta) const {
  QPOPF_RETURN_IF_ERROR(CheckBeta(beta_));
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd s, MlpLogits(model_, theta));
  if (noise_.rows() == 0) return LogSoftmax(s, beta_);
  // log of the draw average, taken per class across draws.
  const int draws = static_cast<int>(noise_.rows());
  Eigen::MatrixXd logp(draws, s.size());
  for (int d = 0; d < draws; ++d) {
    logp.row(d) =
        LogSoftmax(s + sigma_ * noise_.row(d).transpose(), beta_).transpose();
  }
  Eigen::VectorXd out(s.size());
  for (int k = 0; k < s.size(); ++k) {
    out(k) = LogSumExp(logp.col(k)) - std::log(static_cast<double>(draws));
  }
  return out;
}

absl::StatusOr<int> NoisyMlpMechanism::Sample(const Eigen::VectorXd& theta,
                                              Rng& rng) const {
  QPOPF_RETURN_IF_ERROR(CheckBeta(beta_));
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd s, MlpLogits(model_, theta));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < s.size(); ++k) s(k) += sigma_ * normal(rng);
  return SampleCategorical(SoftmaxProbs(s, beta_), rng);
}

absl::StatusOr<Eigen::VectorXd> OracleMechanism::Probabilities(
    const Eigen::VectorXd& theta) const {
  QPOPF_ASSIGN_OR_RETURN(int id, LocateRegion(atlas_, theta));
  Eigen::VectorXd p = Eigen::VectorXd::Zero(atlas_.num_regions());
  p(id - 1) = 1.0;
  return p;
}

absl::StatusOr<Dataset> SampleDataset(const RegionAtlas& atlas, int count,
                                      uint64_t seed) {
  if (count < 0) return absl::InvalidArgumentError("negative sample count");
  const ThetaBox& box = atlas.theta_box;
  Rng rng = StreamRng(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset data;
  int64_t attempts = 0;
  while (data.size() < count) {
    if (++attempts > 100 * static_cast<int64_t>(count) + 100) {
      return absl::FailedPreconditionError(
          "atlas covers too little of the box to sample a dataset");
    }
    Eigen::VectorXd theta(box.dim());
    for (int d = 0; d < box.dim(); ++d) {
      theta(d) = box.lower(d) + unit(rng) * (box.upper(d) - box.lower(d));
    }
    auto id = LocateRegion(atlas, theta);
    if (!id.ok()) continue;
    data.theta.push_back(theta);
    data.label.push_back(*id);
  }
  return data;
}

std::pair<Dataset, Dataset> SplitDataset(const Dataset& data,
                                         double train_fraction) {
  const int cut = static_cast<int>(std::lround(train_fraction * data.size()));
  Dataset train, test;
  for (int i = 0; i < data.size(); ++i) {
    Dataset& dst = i < cut ? train : test;
    dst.theta.push_back(data.theta[i]);
    dst.label.push_back(data.label[i]);
  }
  return {train, test};
}

VqcModel InitVqc(const CircuitConfig& circuit, int num_classes, uint64_t seed) {
  Rng rng = StreamRng(seed, 0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  VqcModel m;
  m.circuit = circuit;
  m.params.phi.resize(circuit.num_layers, circuit.num_qubits);
  for (int l = 0; l < circuit.num_layers; ++l)
    for (int j = 0; j < circuit.num_qubits; ++j) m.params.phi(l, j) = angle(rng);
  const double scale = 1.0 / std::sqrt(static_cast<double>(circuit.num_qubits));
  m.head.W.resize(num_classes, circuit.num_qubits);
  for (int k = 0; k < num_classes; ++k)
    for (int j = 0; j < circuit.num_qubits; ++j) m.head.W(k, j) = scale * unit(rng);
  return m;
}

absl::StatusOr<double> Accuracy(const VqcModel& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    QPOPF_ASSIGN_OR_RETURN(StateVector state,
                           RunCircuit(model.circuit, model.params, data.theta[i]));
    const Eigen::VectorXd s =
        model.head.Logits(ExpectationZ(state, model.circuit.num_qubits));
    if (ArgmaxId(s) == data.label[i]) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

absl::StatusOr<double> Accuracy(const MlpModel& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  int correct = 0;
  for (int i = 0; i < data.size(); ++i) {
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd s, MlpLogits(model, data.theta[i]));
    if (ArgmaxId(s) == data.label[i]) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

absl::StatusOr<TrainResult<VqcModel>> TrainVqc(const Dataset& train,
                                               const Dataset& test,
                                               const CircuitConfig& circuit,
                                               int num_classes,
                                               const TrainConfig& config) {
  QPOPF_RETURN_IF_ERROR(CheckTrainInputs(train, num_classes, config));
  const int dim = train.size() > 0 ? static_cast<int>(train.theta[0].size())
                                   : static_cast<int>(circuit.encoding_pattern.size());
  if (train.size() > 0) QPOPF_RETURN_IF_ERROR(ValidateConfig(circuit, dim));
  TrainResult<VqcModel> result;
  result.model = InitVqc(circuit, num_classes, config.seed);
  const VqcModel shape = result.model;
  const int n = circuit.num_qubits;
  const int nphi = NumParams(circuit);
  Eigen::VectorXd params = PackVqc(result.model);

  auto sample_grad = [&](const Eigen::VectorXd& v,
                         int i) -> absl::StatusOr<SampleGrad> {
    VqcModel m = shape;
    UnpackVqc(v, m);
    const Eigen::VectorXd& theta = train.theta[i];
    QPOPF_ASSIGN_OR_RETURN(StateVector state,
                           RunCircuit(m.circuit, m.params, theta));
    const Eigen::VectorXd h = ExpectationZ(state, n);
    const Eigen::VectorXd p = SoftmaxProbs(m.head.W * h, config.beta);
    const int y = train.label[i] - 1;
    Eigen::VectorXd ds = config.beta * p;
    ds(y) -= config.beta;
    QPOPF_ASSIGN_OR_RETURN(Eigen::MatrixXd J,
                           FeatureJacobian(m.circuit, m.params, theta, 0.0));
    SampleGrad g;
    g.loss = -std::log(std::max(p(y), kProbabilityFloor));
    g.grad.resize(v.size());
    g.grad.head(nphi) = J.transpose() * (m.head.W.transpose() * ds);
    const Eigen::MatrixXd gW = ds * h.transpose();
    for (int r = 0, k = nphi; r < gW.rows(); ++r)
      for (int c = 0; c < gW.cols(); ++c) g.grad(k++) = gW(r, c);
    return g;
  };
  auto accuracy = [&](const Eigen::VectorXd& v,
                      const Dataset& data) -> absl::StatusOr<double> {
    VqcModel m = shape;
    UnpackVqc(v, m);
    return Accuracy(m, data);
  };
  QPOPF_ASSIGN_OR_RETURN(
      result.log, RunAdam(params, train, test, config, sample_grad, accuracy));
  UnpackVqc(params, result.model);
  return result;
}

absl::StatusOr<TrainResult<MlpModel>> TrainMlp(const Dataset& train,
                                               const Dataset& test,
                                               const std::vector<int>& hidden,
                                               int num_classes,
                                               const TrainConfig& config) {
  QPOPF_RETURN_IF_ERROR(CheckTrainInputs(train, num_classes, config));
  const int dim = train.size() > 0 ? static_cast<int>(train.theta[0].size()) : 3;
  TrainResult<MlpModel> result;
  result.model = InitMlp(dim, hidden, num_classes, config.seed);
  const MlpModel shape = result.model;
  Eigen::VectorXd params = PackMlp(result.model);

  auto sample_grad = [&](const Eigen::VectorXd& v,
                         int i) -> absl::StatusOr<SampleGrad> {
    MlpModel m = shape;
    UnpackMlp(v, m);
    const std::vector<Eigen::VectorXd> a = MlpActivations(m, train.theta[i]);
    const Eigen::VectorXd p = SoftmaxProbs(m.head * a.back(), config.beta);
    const int y = train.label[i] - 1;
    Eigen::VectorXd ds = config.beta * p;
    ds(y) -= config.beta;
    MlpModel grad = shape;
    grad.head = ds * a.back().transpose();
    Eigen::VectorXd da = m.head.transpose() * ds;
    for (int l = static_cast<int>(m.weights.size()) - 1; l >= 0; --l) {
      const Eigen::VectorXd dz =
          da.array() * (1.0 - a[l + 1].array().square());
      grad.weights[l] = dz * a[l].transpose();
      grad.biases[l] = dz;
      da = m.weights[l].transpose() * dz;
    }
    SampleGrad g;
    g.loss = -std::log(std::max(p(y), kProbabilityFloor));
    g.grad = PackMlp(grad);
    return g;
  };
  auto accuracy = [&](const Eigen::VectorXd& v,
                      const Dataset& data) -> absl::StatusOr<double> {
    MlpModel m = shape;
    UnpackMlp(v, m);
    return Accuracy(m, data);
  };
  QPOPF_ASSIGN_OR_RETURN(
      result.log, RunAdam(params, train, test, config, sample_grad, accuracy));
  UnpackMlp(params, result.model);
  return result;
}

absl::StatusOr<SigmaCalibration> CalibrateSigma(
    const MlpModel& model, double beta, double target_eps95,
    const std::vector<AdjacentPair>& pairs, const CalibrationOptions& options) {
  if (!(target_eps95 > 0.0)) {
    return absl::InvalidArgumentError("target eps95 must be positive");
  }
  SigmaCalibration out;
  auto measure = [&](double sigma) -> absl::StatusOr<double> {
    ++out.evaluations;
    NoisyMlpMechanism mech(model, sigma, beta, options.draws,
                           options.noise_seed);
    QPOPF_ASSIGN_OR_RETURN(PrivacyReport report,
                           AuditMechanism(mech, pairs, options.threads));
    return report.eps95;
  };
  QPOPF_ASSIGN_OR_RETURN(out.baseline_eps95, measure(0.0));
  out.eps95 = out.baseline_eps95;
  if (target_eps95 >= out.baseline_eps95 * (1.0 - options.rel_tol)) {
    out.target_above_baseline = target_eps95 >= out.baseline_eps95;
    return out;
  }
  auto close = [&](double eps) {
    return std::abs(eps - target_eps95) <= options.rel_tol * target_eps95;
  };
  double lo = 0.0, hi = 1.0;
  QPOPF_ASSIGN_OR_RETURN(double eps_hi, measure(hi));
  while (eps_hi > target_eps95 && !close(eps_hi)) {
    if (out.evaluations >= options.max_evaluations || hi > 1e6) {
      return absl::FailedPreconditionError(
          "no noise scale reaches the target eps95");
    }
    lo = hi;
    hi *= 2.0;
    QPOPF_ASSIGN_OR_RETURN(eps_hi, measure(hi));
  }
  out.sigma = hi;
  out.eps95 = eps_hi;
  while (!close(out.eps95)) {
    if (out.evaluations >= options.max_evaluations) {
      return absl::DeadlineExceededError(absl::StrCat(
          "sigma calibration did not converge; closest eps95 ", out.eps95));
    }
    const double mid = 0.5 * (lo + hi);
    QPOPF_ASSIGN_OR_RETURN(double eps_mid, measure(mid));
    out.sigma = mid;
    out.eps95 = eps_mid;
    if (eps_mid > target_eps95) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return out;
}

nlohmann::json ToJson(const VqcModel& model) {
  nlohmann::json j;
  j["kind"] = "vqc";
  j["circuit"] = ToJson(model.circuit);
  j["phi"] = ToJson(model.params);
  j["head"] = {{"W", ToJson(model.head.W)},
               {"b", ToJson(model.head.b.size() ? model.head.b
                                                : Eigen::VectorXd::Zero(
                                                      model.head.W.rows()))}};
  j["num_params"] = model.num_params();
  return j;
}

absl::StatusOr<VqcModel> VqcModelFromJson(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "vqc") {
      return absl::InvalidArgumentError("checkpoint is not a vqc model");
    }
    VqcModel m;
    QPOPF_ASSIGN_OR_RETURN(m.circuit, CircuitConfigFromJson(j.at("circuit")));
    QPOPF_ASSIGN_OR_RETURN(m.params, VqcParamsFromJson(j.at("phi"), m.circuit));
    QPOPF_ASSIGN_OR_RETURN(m.head.W, MatrixFromJson(j.at("head").at("W")));
    QPOPF_ASSIGN_OR_RETURN(m.head.b, VectorFromJson(j.at("head").at("b")));
    if (m.head.W.cols() != m.circuit.num_qubits ||
        m.head.b.size() != m.head.W.rows()) {
      return absl::InvalidArgumentError("head shape does not match the circuit");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed vqc model: ", e.what()));
  }
}

nlohmann::json ToJson(const MlpModel& model) {
  nlohmann::json j;
  j["kind"] = "mlp";
  j["activation"] = "tanh";
  j["weights"] = nlohmann::json::array();
  j["biases"] = nlohmann::json::array();
  for (size_t l = 0; l < model.weights.size(); ++l) {
    j["weights"].push_back(ToJson(model.weights[l]));
    j["biases"].push_back(ToJson(model.biases[l]));
  }
  j["head"] = ToJson(model.head);
  j["num_params"] = model.num_params();
  return j;
}

absl::StatusOr<MlpModel> MlpModelFromJson(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "mlp") {
      return absl::InvalidArgumentError("checkpoint is not an mlp model");
    }
    MlpModel m;
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    if (ws.size() != bs.size()) {
      return absl::InvalidArgumentError("weights and biases differ in length");
    }
    for (size_t l = 0; l < ws.size(); ++l) {
      QPOPF_ASSIGN_OR_RETURN(Eigen::MatrixXd w, MatrixFromJson(ws[l]));
      QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd b, VectorFromJson(bs[l]));
      if (b.size() != w.rows() ||
          (l > 0 && w.cols() != m.weights.back().rows())) {
        return absl::InvalidArgumentError("inconsistent MLP layer shapes");
      }
      m.weights.push_back(w);
      m.biases.push_back(b);
    }
    QPOPF_ASSIGN_OR_RETURN(m.head, MatrixFromJson(j.at("head")));
    if (!m.weights.empty() && m.head.cols() != m.weights.back().rows()) {
      return absl::InvalidArgumentError("MLP head width mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("malformed mlp model: ", e.what()));
  }
}

}  // namespace qpopf

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

#include "qpopf/privacy_audit.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "absl/strings/str_cat.h"
#include "qpopf/util.h"

namespace qpopf {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd UniformInBox(const ThetaBox& box, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd theta(box.dim());
  for (int d = 0; d < box.dim(); ++d) {
    theta(d) = box.lower(d) + unit(rng) * (box.upper(d) - box.lower(d));
  }
  return theta;
}

Eigen::VectorXd UnitDirection(int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(dim);
  do {
    for (int d = 0; d < dim; ++d) u(d) = normal(rng);
  } while (u.norm() == 0.0);
  return u / u.norm();
}

}  // namespace

absl::StatusOr<std::vector<AdjacentPair>> MakeAdjacentPairs(
    const ThetaBox& box, const AdjacencySpec& spec) {
  if (!(spec.delta_theta > 0.0) || spec.pair_count < 1) {
    return absl::InvalidArgumentError(
        "adjacency needs delta_theta > 0 and at least one pair");
  }
  if (box.dim() == 0) return absl::InvalidArgumentError("empty parameter box");
  Rng rng = StreamRng(spec.seed, 0);
  std::vector<AdjacentPair> pairs;
  int64_t attempts = 0;
  while (static_cast<int>(pairs.size()) < spec.pair_count) {
    if (++attempts > 1000 * static_cast<int64_t>(spec.pair_count)) {
      return absl::FailedPreconditionError(
          "delta_theta too large for the parameter box");
    }
    AdjacentPair pair;
    pair.theta = UniformInBox(box, rng);
    pair.theta_prime =
        pair.theta + spec.delta_theta * UnitDirection(box.dim(), rng);
    if (!box.Contains(pair.theta_prime, 0.0)) continue;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

PairEpsilon EmpiricalEpsilonLog(const Eigen::VectorXd& log_p,
                                const Eigen::VectorXd& log_p_prime) {
  PairEpsilon out;
  for (int k = 0; k < log_p.size(); ++k) {
    const double a = log_p(k), b = log_p_prime(k);
    double eps;
    if (a == -kInf && b == -kInf) {
      eps = 0.0;
    } else if (a == -kInf || b == -kInf) {
      eps = kInf;
    } else {
      eps = std::abs(a - b);
    }
    if (eps > out.epsilon || out.worst_class == 0) {
      out.epsilon = std::max(out.epsilon, eps);
      out.worst_class = k + 1;
    }
  }
  return out;
}

PairEpsilon EmpiricalEpsilon(const Eigen::VectorXd& p,
                             const Eigen::VectorXd& p_prime) {
  auto logs = [](const Eigen::VectorXd& v) {
    Eigen::VectorXd out(v.size());
    for (int k = 0; k < v.size(); ++k) {
      out(k) = v(k) == 0.0 ? -kInf : std::log(std::max(v(k), kProbabilityFloor));
    }
    return out;
  };
  return EmpiricalEpsilonLog(logs(p), logs(p_prime));
}

double EpsilonPercentile(const std::vector<double>& samples, double q) {
  std::vector<double> finite;
  for (double v : samples) {
    if (std::isfinite(v)) finite.push_back(v);
  }
  if (finite.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(finite.begin(), finite.end());
  const double pos = std::clamp(q, 0.0, 1.0) * (finite.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, finite.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return finite[lo] + frac * (finite[hi] - finite[lo]);
}

namespace {

template <typename PairFn>
absl::StatusOr<PrivacyReport> AuditPairs(const std::vector<Eigen::VectorXd>& p,
                                         const std::vector<Eigen::VectorXd>& p_prime,
                                         PairFn pair_epsilon) {
  if (p.empty() || p.size() != p_prime.size()) {
    return absl::InvalidArgumentError("need matching, nonempty distributions");
  }
  PrivacyReport report;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i].size() != p_prime[i].size()) {
      return absl::InvalidArgumentError("distribution sizes differ");
    }
    const PairEpsilon e = pair_epsilon(p[i], p_prime[i]);
    report.epsilons.push_back(e.epsilon);
    if (!std::isfinite(e.epsilon)) ++report.saturated;
    if (report.worst_pair < 0 || e.epsilon > report.eps_max) {
      report.eps_max = e.epsilon;
      report.worst_pair = static_cast<int>(i);
      report.worst_class = e.worst_class;
    }
  }
  report.eps95 = EpsilonPercentile(report.epsilons, 0.95);
  return report;
}

}  // namespace

absl::StatusOr<PrivacyReport> AuditDistributions(
    const std::vector<Eigen::VectorXd>& p,
    const std::vector<Eigen::VectorXd>& p_prime) {
  return AuditPairs(p, p_prime, EmpiricalEpsilon);
}

absl::StatusOr<PrivacyReport> AuditLogDistributions(
    const std::vector<Eigen::VectorXd>& log_p,
    const std::vector<Eigen::VectorXd>& log_p_prime) {
  return AuditPairs(log_p, log_p_prime, EmpiricalEpsilonLog);
}

absl::StatusOr<PrivacyReport> AuditMechanism(
    const Mechanism& mechanism, const std::vector<AdjacentPair>& pairs,
    int threads) {
  if (pairs.empty()) return absl::InvalidArgumentError("no adjacent pairs");
  const int count = static_cast<int>(pairs.size());
  std::vector<absl::StatusOr<Eigen::VectorXd>> p(count), q(count);
  ParallelFor(count, threads, [&](int i) {
    p[i] = mechanism.LogProbabilities(pairs[i].theta);
    q[i] = mechanism.LogProbabilities(pairs[i].theta_prime);
  });
  std::vector<Eigen::VectorXd> pv, qv;
  for (int i = 0; i < count; ++i) {
    if (!p[i].ok()) return p[i].status();
    if (!q[i].ok()) return q[i].status();
    pv.push_back(*std::move(p[i]));
    qv.push_back(*std::move(q[i]));
  }
  QPOPF_ASSIGN_OR_RETURN(PrivacyReport report, AuditLogDistributions(pv, qv));
  report.model = mechanism.name();
  report.delta_theta = (pairs[0].theta_prime - pairs[0].theta).norm();
  return report;
}

void AttachBound(PrivacyReport& report, double eps_reg) {
  report.eps_reg = eps_reg;
  // Allow only floating-point roundoff on top of the bound.
  report.bound_satisfied =
      report.saturated == 0 &&
      report.eps_max <= eps_reg * (1.0 + 1e-12) + 1e-15;
}

nlohmann::json ToJson(const PrivacyReport& report) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return nullptr;
    return v > 0 ? "inf" : "-inf";
  };
  nlohmann::json eps = nlohmann::json::array();
  for (double v : report.epsilons) eps.push_back(num(v));
  return {{"model", report.model},
          {"gamma", report.gamma},
          {"beta", report.beta},
          {"delta_theta", report.delta_theta},
          {"pairs", static_cast<int>(report.epsilons.size())},
          {"eps95", num(report.eps95)},
          {"eps_max", num(report.eps_max)},
          {"saturated", report.saturated},
          {"worst_pair", report.worst_pair},
          {"worst_class", report.worst_class},
          {"eps_reg", num(report.eps_reg)},
          {"bound_satisfied", report.bound_satisfied},
          {"eps_emp", std::move(eps)}};
}

double EncodingLipschitz(const CircuitConfig& config, int theta_dim) {
  Eigen::VectorXd uses = Eigen::VectorXd::Zero(std::max(theta_dim, 1));
  for (int k : config.encoding_pattern) {
    if (k >= 0 && k < uses.size()) uses(k) += 1.0;
  }
  return config.num_layers * (config.encoding_scale / 2.0) * uses.norm();
}

absl::StatusOr<LipschitzEstimate> EstimateEncodingLipschitz(
    const CircuitConfig& config, const VqcParams& params, const ThetaBox& box,
    int num_pairs, double radius, uint64_t seed) {
  if (num_pairs < 1 || !(radius > 0.0)) {
    return absl::InvalidArgumentError("need num_pairs >= 1 and radius > 0");
  }
  QPOPF_ASSIGN_OR_RETURN(
      std::vector<AdjacentPair> pairs,
      MakeAdjacentPairs(box, AdjacencySpec{radius, num_pairs, seed}));
  LipschitzEstimate est;
  for (const AdjacentPair& pair : pairs) {
    QPOPF_ASSIGN_OR_RETURN(StateVector a, RunCircuit(config, params, pair.theta));
    QPOPF_ASSIGN_OR_RETURN(StateVector b,
                           RunCircuit(config, params, pair.theta_prime));
    const double ratio =
        TraceDistance(a, b) / (pair.theta_prime - pair.theta).norm();
    est.max_ratio = std::max(est.max_ratio, ratio);
    ++est.pairs;
  }
  return est;
}

double HeadNorm(const Eigen::MatrixXd& W) {
  if (W.size() == 0) return 0.0;
  return W.cwiseAbs().rowwise().sum().maxCoeff();
}

double TheoreticalEpsilon(double beta, double gamma, double l_enc,
                          double delta_theta, const Eigen::MatrixXd& W) {
  return 4.0 * beta * (1.0 - gamma) * l_enc * delta_theta * HeadNorm(W);
}

absl::StatusOr<double> RequiredBeta(double eps_target, double gamma_assumed,
                                    double l_enc, double delta_theta,
                                    const Eigen::MatrixXd& W) {
  const double per_beta =
      TheoreticalEpsilon(1.0, gamma_assumed, l_enc, delta_theta, W);
  if (!(per_beta > 0.0)) {
    return absl::InvalidArgumentError(
        "bound does not depend on beta (gamma = 1 or zero sensitivity); "
        "any beta meets the target");
  }
  return eps_target / per_beta;
}

double WastedBudget(double eps_target, double gamma_actual) {
  return eps_target * gamma_actual;
}

double MisSelectionProbability(const Eigen::VectorXd& p, int true_id) {
  return std::max(0.0, 1.0 - p(true_id - 1));
}

double MisSelectionBound(int num_classes, double beta, double margin) {
  return (num_classes - 1) * std::exp(-beta * margin);
}

absl::StatusOr<Eigen::VectorXd> RegionRegrets(const RegionAtlas& atlas,
                                              const ParametricLp& lp,
                                              const Eigen::VectorXd& theta,
                                              int true_id) {
  QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd x_star,
                         ReconstructSolution(atlas, true_id, theta));
  const double j_star = lp.c.dot(x_star);
  Eigen::VectorXd regrets(atlas.num_regions());
  for (int k = 1; k <= atlas.num_regions(); ++k) {
    if (k == true_id) {
      regrets(k - 1) = 0.0;
      continue;
    }
    QPOPF_ASSIGN_OR_RETURN(DispatchResult d, DispatchRegion(atlas, lp, k, theta));
    regrets(k - 1) = lp.c.dot(d.x) - j_star;
  }
  return regrets;
}

TradeoffBound ComputeTradeoffBound(const Eigen::VectorXd& clean_logits,
                                   double gamma, double beta, int true_id,
                                   const Eigen::VectorXd& regrets,
                                   double l_enc, double delta_theta,
                                   const Eigen::MatrixXd& W) {
  const int K = static_cast<int>(clean_logits.size());
  const Eigen::VectorXd logits = (1.0 - gamma) * clean_logits;
  const Eigen::VectorXd p = SoftmaxProbs(logits, beta);
  TradeoffBound out;
  out.margin = Margin(logits, true_id);
  out.delta_j_max = std::max(0.0, regrets.maxCoeff());
  out.bound = out.delta_j_max * MisSelectionBound(K, beta, out.margin);
  out.p_err = MisSelectionProbability(p, true_id);
  out.expected_regret = p.dot(regrets);
  const double m0 = Margin(clean_logits, true_id);
  out.bound_noise_form =
      out.delta_j_max * (K - 1) * std::exp(-beta * (1.0 - gamma) * m0);
  const double scale = 4.0 * l_enc * delta_theta * HeadNorm(W);
  if (scale > 0.0) {
    const double eps_reg =
        TheoreticalEpsilon(beta, gamma, l_enc, delta_theta, W);
    out.bound_epsilon_form =
        out.delta_j_max * (K - 1) * std::exp(-m0 * eps_reg / scale);
  }
  return out;
}

}  // namespace qpopf

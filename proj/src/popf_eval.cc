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

#include "qpopf/popf_eval.h"

#include <chrono>
#include <cmath>
#include <random>

#include "absl/strings/str_cat.h"
#include "qpopf/util.h"

namespace qpopf {

ScenarioBatch MakeScenarioBatch(const ThetaBox& box, int count, uint64_t seed,
                                const ScenarioSampler& sampler) {
  ScenarioBatch batch;
  batch.seed = seed;
  Rng rng = StreamRng(seed, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < count; ++s) {
    if (sampler) {
      batch.theta.push_back(sampler(rng));
      continue;
    }
    Eigen::VectorXd theta(box.dim());
    for (int d = 0; d < box.dim(); ++d) {
      theta(d) = box.lower(d) + unit(rng) * (box.upper(d) - box.lower(d));
    }
    batch.theta.push_back(theta);
  }
  return batch;
}

absl::StatusOr<EvaluationContext> EvaluationContext::Create(
    const RegionAtlas& atlas, const ParametricLp& lp, const ScenarioBatch& batch,
    int threads) {
  if (atlas.lp_hash != HashLp(lp)) {
    return absl::FailedPreconditionError(
        "atlas was built for a different LP (hash mismatch)");
  }
  EvaluationContext ctx;
  ctx.atlas_ = &atlas;
  ctx.lp_ = &lp;
  ctx.batch_ = &batch;
  ctx.threads_ = threads;
  const int n = batch.size();
  ctx.true_region_.resize(n);
  ctx.x_star_.resize(n);
  ctx.j_star_.resize(n);
  ctx.cache_.resize(n);
  for (int s = 0; s < n; ++s) {
    if (!atlas.theta_box.Contains(batch.theta[s])) {
      return absl::OutOfRangeError(absl::StrCat("scenario ", s, " outside the box"));
    }
    auto id = LocateRegion(atlas, batch.theta[s]);
    if (!id.ok()) {
      return absl::NotFoundError(absl::StrCat(
          "scenario ", s, " is not covered by the atlas: ", id.status().message()));
    }
    ctx.true_region_[s] = *id;
    QPOPF_ASSIGN_OR_RETURN(ctx.x_star_[s],
                           ReconstructSolution(atlas, *id, batch.theta[s]));
    ctx.j_star_[s] = lp.c.dot(ctx.x_star_[s]);
  }
  return ctx;
}

absl::StatusOr<const DispatchResult*> EvaluationContext::Dispatch(int s, int id) {
  auto& slot = cache_[s];
  auto it = slot.find(id);
  if (it == slot.end()) {
    QPOPF_ASSIGN_OR_RETURN(DispatchResult d,
                           DispatchRegion(*atlas_, *lp_, id, batch_->theta[s]));
    it = slot.emplace(id, std::move(d)).first;
  }
  return &it->second;
}

absl::StatusOr<MetricsReport> EvaluateDistributions(
    EvaluationContext& context, const std::vector<Eigen::VectorXd>& probabilities,
    uint64_t seed) {
  const int n = context.batch().size();
  if (static_cast<int>(probabilities.size()) != n) {
    return absl::InvalidArgumentError("one distribution per scenario required");
  }
  const ParametricLp& lp = context.lp();
  const std::vector<int>& tracked = lp.tracked_variables;
  struct PerScenario {
    absl::Status status;
    Eigen::VectorXd abs_err;
    double gap = 0.0;
    bool infeasible = false;
    bool correct = false;
  };
  std::vector<PerScenario> out(n);
  ParallelFor(n, context.threads(), [&](int s) {
    PerScenario& r = out[s];
    if (probabilities[s].size() != context.atlas().num_regions()) {
      r.status = absl::InvalidArgumentError("distribution size differs from K");
      return;
    }
    Rng rng = StreamRng(seed, s);
    const int id = SampleCategorical(probabilities[s], rng);
    auto d = context.Dispatch(s, id);
    if (!d.ok()) {
      r.status = d.status();
      return;
    }
    const Eigen::VectorXd& x = (*d)->x;
    r.abs_err.resize(static_cast<int>(tracked.size()));
    for (size_t t = 0; t < tracked.size(); ++t) {
      r.abs_err(t) = std::abs(x(tracked[t]) - context.optimum(s)(tracked[t]));
    }
    const double j_star = context.optimal_cost(s);
    r.gap = (lp.c.dot(x) - j_star) / j_star;
    r.infeasible = (*d)->infeasible;
    r.correct = id == context.true_region(s);
  });
  MetricsReport report;
  report.samples = n;
  report.mae = Eigen::VectorXd::Zero(static_cast<int>(tracked.size()));
  for (int t : tracked) report.tracked_names.push_back(lp.variable_names[t]);
  int infeasible = 0, correct = 0;
  for (const PerScenario& r : out) {
    if (!r.status.ok()) return r.status;
    report.mae += r.abs_err;
    report.cost_gap += r.gap;
    infeasible += r.infeasible;
    correct += r.correct;
  }
  if (n > 0) {
    report.mae /= n;
    report.cost_gap /= n;
    report.infeasibility_rate = static_cast<double>(infeasible) / n;
    report.stochastic_accuracy = static_cast<double>(correct) / n;
  }
  report.mae_mean = report.mae.size() ? report.mae.mean() : 0.0;
  if (n > 1) {
    double ss_mae = 0.0, ss_gap = 0.0;
    for (const PerScenario& r : out) {
      const double m = r.abs_err.size() ? r.abs_err.mean() : 0.0;
      ss_mae += (m - report.mae_mean) * (m - report.mae_mean);
      ss_gap += (r.gap - report.cost_gap) * (r.gap - report.cost_gap);
    }
    auto se = [n](double ss) { return std::sqrt(ss / (n - 1) / n); };
    auto binomial_se = [n](double p) { return std::sqrt(p * (1.0 - p) / n); };
    report.mae_mean_se = se(ss_mae);
    report.cost_gap_se = se(ss_gap);
    report.infeasibility_se = binomial_se(report.infeasibility_rate);
    report.accuracy_se = binomial_se(report.stochastic_accuracy);
  }
  return report;
}

absl::StatusOr<MetricsReport> Evaluate(EvaluationContext& context,
                                       const Mechanism& mechanism,
                                       uint64_t seed) {
  const int n = context.batch().size();
  std::vector<absl::StatusOr<Eigen::VectorXd>> probs(n);
  ParallelFor(n, context.threads(), [&](int s) {
    probs[s] = mechanism.Probabilities(context.batch().theta[s]);
  });
  std::vector<Eigen::VectorXd> dist;
  for (auto& p : probs) {
    if (!p.ok()) return p.status();
    dist.push_back(*std::move(p));
  }
  QPOPF_ASSIGN_OR_RETURN(MetricsReport report,
                         EvaluateDistributions(context, dist, seed));
  report.model = mechanism.name();
  return report;
}

absl::StatusOr<std::vector<MetricsReport>> Sweep(
    EvaluationContext& context, const VqcModel& model,
    const std::vector<double>& gammas, const std::vector<double>& betas,
    uint64_t seed) {
  const int n = context.batch().size();
  std::vector<Eigen::VectorXd> h0(n);
  for (int s = 0; s < n; ++s) {
    QPOPF_ASSIGN_OR_RETURN(
        StateVector state,
        RunCircuit(model.circuit, model.params, context.batch().theta[s]));
    h0[s] = ExpectationZ(state, model.circuit.num_qubits);
  }
  std::vector<MetricsReport> reports;
  for (double gamma : gammas) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
      return absl::InvalidArgumentError("gamma outside [0, 1]");
    }
    for (double beta : betas) {
      if (!(beta > 0.0)) return absl::InvalidArgumentError("beta must be positive");
      std::vector<Eigen::VectorXd> dist(n);
      for (int s = 0; s < n; ++s) {
        dist[s] = SoftmaxProbs(VqcLogitsFromFeatures(model, h0[s], gamma), beta);
      }
      QPOPF_ASSIGN_OR_RETURN(MetricsReport report,
                             EvaluateDistributions(context, dist, seed));
      report.model = "vqc";
      report.gamma = gamma;
      report.beta = beta;
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

std::string HeatmapCsv(const std::vector<MetricsReport>& reports) {
  std::string csv = "gamma,beta,infeasibility_pct,cost_gap_pct,accuracy\n";
  for (const MetricsReport& r : reports) {
    absl::StrAppend(&csv, FormatDouble(r.gamma), ",", FormatDouble(r.beta), ",",
                    FormatDouble(100.0 * r.infeasibility_rate), ",",
                    FormatDouble(100.0 * r.cost_gap), ",",
                    FormatDouble(r.stochastic_accuracy), "\n");
  }
  return csv;
}

nlohmann::json ToJson(const MetricsReport& report) {
  nlohmann::json mae = nlohmann::json::object();
  for (size_t t = 0; t < report.tracked_names.size(); ++t) {
    mae[report.tracked_names[t]] = report.mae(t);
  }
  return {{"model", report.model},
          {"gamma", report.gamma},
          {"beta", report.beta},
          {"samples", report.samples},
          {"mae_mw", std::move(mae)},
          {"mae_mean_mw", report.mae_mean},
          {"cost_gap", report.cost_gap},
          {"infeasibility_rate", report.infeasibility_rate},
          {"stochastic_accuracy", report.stochastic_accuracy},
          {"standard_errors",
           {{"mae_mean_mw", report.mae_mean_se},
            {"cost_gap", report.cost_gap_se},
            {"infeasibility_rate", report.infeasibility_se},
            {"stochastic_accuracy", report.accuracy_se}}}};
}

absl::StatusOr<double> ExpectedCost(const RegionAtlas& atlas,
                                    const ParametricLp& lp,
                                    const ScenarioBatch& batch) {
  if (batch.size() == 0) return absl::InvalidArgumentError("empty batch");
  double total = 0.0;
  for (const Eigen::VectorXd& theta : batch.theta) {
    QPOPF_ASSIGN_OR_RETURN(int id, LocateRegion(atlas, theta));
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd x, ReconstructSolution(atlas, id, theta));
    total += lp.c.dot(x);
  }
  return total / batch.size();
}

QubitBudget ComputeQubitBudget(int bits_per_variable, int bits_per_slack,
                               int num_variables, int num_constraints,
                               int num_qubits_ours) {
  QubitBudget q;
  q.variable_qubits = bits_per_variable * num_variables;
  q.slack_qubits = bits_per_slack * num_constraints;
  q.direct_total = q.variable_qubits + q.slack_qubits;
  q.ours = num_qubits_ours;
  return q;
}

RuntimeEstimate RuntimeModel(int num_qubits, int num_layers,
                             double t_prep_meas_us, double t_gate_us) {
  RuntimeEstimate r;
  r.depth = 1 + num_layers * (1 + num_qubits);
  r.micros = t_prep_meas_us + t_gate_us * r.depth;
  return r;
}

absl::StatusOr<std::vector<SpeedupRow>> MeasureSpeedup(
    const RegionAtlas& atlas, const ParametricLp& lp, const ScenarioBatch& batch,
    int num_qubits, int num_layers) {
  if (batch.size() == 0) return absl::InvalidArgumentError("empty batch");
  using Clock = std::chrono::steady_clock;
  auto micros = [](Clock::duration d) {
    return std::chrono::duration<double, std::micro>(d).count();
  };
  auto t0 = Clock::now();
  for (const Eigen::VectorXd& theta : batch.theta) {
    QPOPF_ASSIGN_OR_RETURN(LpSolution sol, SolveLp(lp, theta));
    if (sol.status != LpStatus::kOptimal) {
      return absl::InternalError("LP not optimal inside the box");
    }
  }
  const double lp_us = micros(Clock::now() - t0) / batch.size();
  t0 = Clock::now();
  double sink = 0.0;
  for (const Eigen::VectorXd& theta : batch.theta) {
    QPOPF_ASSIGN_OR_RETURN(int id, LocateRegion(atlas, theta));
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd x, ReconstructSolution(atlas, id, theta));
    sink += x(0);
  }
  const double check_us = micros(Clock::now() - t0) / batch.size();
  (void)sink;
  const double vqc_us = RuntimeModel(num_qubits, num_layers).micros;
  return std::vector<SpeedupRow>{
      {"lp_solver", lp_us, 1.0},
      {"constraint_check_affine", check_us, lp_us / check_us},
      {"vqc_modeled", vqc_us, lp_us / vqc_us}};
}

std::string SpeedupCsv(const std::vector<SpeedupRow>& rows) {
  std::string csv = "method,runtime_us,speedup\n";
  for (const SpeedupRow& r : rows) {
    absl::StrAppend(&csv, r.method, ",", FormatDouble(r.runtime_us), ",",
                    FormatDouble(r.speedup), "\n");
  }
  return csv;
}

}  // namespace qpopf

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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Shared artifacts (atlas, trained models) are
// built once and reused.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "qpopf/classifier.h"
#include "qpopf/cli.h"
#include "qpopf/grid_model.h"
#include "qpopf/lp_engine.h"
#include "qpopf/mechanism.h"
#include "qpopf/mplp_regions.h"
#include "qpopf/popf_eval.h"
#include "qpopf/privacy_audit.h"
#include "qpopf/quantum_circuit.h"
#include "qpopf/util.h"

namespace qpopf {
namespace {

namespace fs = std::filesystem;

constexpr double kDeltaTheta = 0.05;
const std::vector<double> kGridGammas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
const std::vector<double> kGridBetas = {0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0};

double Now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Everything the criteria share. Built once up front; a setup failure is
// reported against the criteria that need it.
struct Fixture {
  ParametricLp lp;
  RegionAtlas atlas;
  double atlas_seconds = 0.0;
  Dataset train, test;
  VqcModel vqc;
  MlpModel mlp;
  double train_seconds = 0.0;
  std::vector<AdjacentPair> audit_pairs;  // 1000 pairs for the grid audit
  std::map<std::pair<int, int>, PrivacyReport> grid;  // (gamma idx, beta idx)
  double l_enc = 0.0;
};

absl::Status BuildAtlas(Fixture& fx) {
  QPOPF_ASSIGN_OR_RETURN(GridCase grid, LoadCase(std::string(QPOPF_DATA_DIR) +
                                                 "/case69_popf.json"));
  QPOPF_ASSIGN_OR_RETURN(ParametricLp raw, Linearize(grid));
  QPOPF_ASSIGN_OR_RETURN(fx.lp, NormalizeParameters(raw));
  EnumerationOptions options;
  options.sampling_budget = 3000;
  options.seed = 0;
  const double t0 = Now();
  QPOPF_ASSIGN_OR_RETURN(fx.atlas, EnumerateRegions(fx.lp, options));
  fx.atlas_seconds = Now() - t0;
  return absl::OkStatus();
}

absl::Status TrainModels(Fixture& fx) {
  QPOPF_ASSIGN_OR_RETURN(Dataset data, SampleDataset(fx.atlas, 3000, 1));
  std::tie(fx.train, fx.test) = SplitDataset(data, 0.8);
  const TrainConfig config;
  const int K = fx.atlas.num_regions();
  const double t0 = Now();
  const CircuitConfig circuit = MakeCircuitConfig(5, 6, fx.lp.theta_box.dim());
  QPOPF_ASSIGN_OR_RETURN(TrainResult<VqcModel> v,
                         TrainVqc(fx.train, fx.test, circuit, K, config));
  QPOPF_ASSIGN_OR_RETURN(TrainResult<MlpModel> m,
                         TrainMlp(fx.train, fx.test, {7, 7}, K, config));
  fx.train_seconds = Now() - t0;
  fx.vqc = std::move(v.model);
  fx.mlp = std::move(m.model);
  fx.l_enc = EncodingLipschitz(fx.vqc.circuit, fx.lp.theta_box.dim());
  return absl::OkStatus();
}

// ---------------------------------------------------------------------------

absl::StatusOr<Outcome> Contraction() {
  constexpr int n = 5;
  Rng rng(101);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    StateVector s(1 << n);
    for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = normal(rng);
    s.normalize();
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd clean, Features(s, n, 0.0));
    for (int g = 0; g <= 10; ++g) {
      const double gamma = 0.1 * g;
      QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd noisy, Features(s, n, gamma));
      worst = std::max(worst, (noisy - (1.0 - gamma) * clean).cwiseAbs().maxCoeff());
    }
  }
  return Outcome{worst <= 1e-12, absl::StrFormat("max abs error %.3e (tol 1e-12)", worst)};
}

absl::StatusOr<Outcome> ParameterShift() {
  constexpr int kClasses = 4;
  constexpr double h = 1e-5;
  Rng rng(202);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 20; ++c) {
    const CircuitConfig config = MakeCircuitConfig(3, 2, 3);
    VqcParams params{Eigen::MatrixXd(config.num_layers, config.num_qubits)};
    for (Eigen::Index k = 0; k < params.phi.size(); ++k) params.phi(k) = 3.0 * u(rng);
    Eigen::VectorXd theta(3);
    for (int k = 0; k < 3; ++k) theta(k) = u(rng);
    const double gamma = 0.25 * (u(rng) + 1.0);
    Eigen::MatrixXd W(kClasses, config.num_qubits);
    for (Eigen::Index k = 0; k < W.size(); ++k) W(k) = 2.0 * u(rng);
    const int label = c % kClasses;
    // Cross-entropy of a random linear head: nonlinear in the features.
    auto loss = [&](const Eigen::VectorXd& f) {
      const Eigen::VectorXd z = W * f;
      return LogSumExp(z) - z(label);
    };
    auto loss_grad = [&](const Eigen::VectorXd& f) {
      Eigen::VectorXd p = SoftmaxProbs(W * f, 1.0);
      p(label) -= 1.0;
      return Eigen::VectorXd(W.transpose() * p);
    };
    QPOPF_ASSIGN_OR_RETURN(Eigen::MatrixXd grad,
                           ParamShiftGrad(config, params, theta, gamma, loss_grad));
    auto loss_at = [&](const VqcParams& p) -> absl::StatusOr<double> {
      QPOPF_ASSIGN_OR_RETURN(StateVector s, RunCircuit(config, p, theta));
      QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd f, Features(s, config.num_qubits, gamma));
      return loss(f);
    };
    for (int l = 0; l < config.num_layers; ++l) {
      for (int j = 0; j < config.num_qubits; ++j) {
        VqcParams plus = params, minus = params;
        plus.phi(l, j) += h;
        minus.phi(l, j) -= h;
        QPOPF_ASSIGN_OR_RETURN(double lp, loss_at(plus));
        QPOPF_ASSIGN_OR_RETURN(double lm, loss_at(minus));
        worst = std::max(worst, std::abs(grad(l, j) - (lp - lm) / (2.0 * h)));
      }
    }
  }
  return Outcome{worst <= 1e-6,
                 absl::StrFormat("max |shift - central FD| %.3e (tol 1e-6)", worst)};
}

ParametricLp ToyLp() {
  // min x  s.t.  x >= theta, x >= 0, x <= 1, theta in [-1, 1].
  ParametricLp lp;
  lp.c = Eigen::VectorXd::Ones(1);
  lp.W = Eigen::MatrixXd(3, 1);
  lp.W << -1, -1, 1;
  lp.S = Eigen::VectorXd(3);
  lp.S << 0, 0, 1;
  lp.T = Eigen::MatrixXd(3, 1);
  lp.T << -1, 0, 0;
  lp.theta_box.lower = Eigen::VectorXd::Constant(1, -1.0);
  lp.theta_box.upper = Eigen::VectorXd::Constant(1, 1.0);
  lp.variable_names = {"x"};
  lp.constraint_names = {"x>=theta", "x>=0", "x<=1"};
  lp.mirror_row = {-1, -1, -1};
  lp.tracked_variables = {0};
  return lp;
}

absl::StatusOr<Outcome> OracleEquivalence(Fixture& fx) {
  const ParametricLp toy = ToyLp();
  QPOPF_ASSIGN_OR_RETURN(RegionAtlas toy_atlas, EnumerateRegions(toy, {}));
  bool toy_ok = toy_atlas.num_regions() == 2;
  bool seen_identity = false, seen_zero = false;
  for (const CriticalRegion& r : toy_atlas.regions) {
    const double F = r.map.F(0, 0), f = r.map.f(0);
    if (std::abs(F - 1.0) <= 1e-12 && std::abs(f) <= 1e-12) seen_identity = true;
    else if (std::abs(F) <= 1e-12 && std::abs(f) <= 1e-12) seen_zero = true;
    else toy_ok = false;
  }
  toy_ok = toy_ok && seen_identity && seen_zero;

  const ScenarioBatch batch = MakeScenarioBatch(fx.atlas.theta_box, 1000, 303);
  double worst = 0.0;
  int unlocated = 0;
  for (const Eigen::VectorXd& theta : batch.theta) {
    QPOPF_ASSIGN_OR_RETURN(LpSolution sol, SolveLp(fx.lp, theta));
    if (sol.status != LpStatus::kOptimal) return absl::InternalError("LP not optimal");
    auto id = LocateRegion(fx.atlas, theta);
    if (!id.ok()) {
      ++unlocated;
      continue;
    }
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd x, ReconstructSolution(fx.atlas, *id, theta));
    worst = std::max(worst, std::abs(fx.lp.c.dot(x) - sol.objective));
  }
  const bool case_ok = unlocated == 0 && worst <= 1e-8;
  return Outcome{toy_ok && case_ok,
                 absl::StrFormat("toy K=%d maps ok=%d; 69-bus K=%d coverage=%.4f, "
                                 "1000 samples, unlocated=%d, max |dJ| %.3e (tol 1e-8); "
                                 "atlas build %.1f s",
                                 toy_atlas.num_regions(), toy_ok, fx.atlas.num_regions(),
                                 fx.atlas.coverage, unlocated, worst, fx.atlas_seconds)};
}

absl::StatusOr<Outcome> PrivacySoundness(Fixture& fx) {
  QPOPF_ASSIGN_OR_RETURN(fx.audit_pairs,
                         MakeAdjacentPairs(fx.atlas.theta_box, {kDeltaTheta, 1000, 404}));
  int violations = 0, saturated = 0;
  double worst_ratio = 0.0;
  for (size_t g = 0; g < kGridGammas.size(); ++g) {
    for (size_t b = 0; b < kGridBetas.size(); ++b) {
      const VqcMechanism mech(fx.vqc, kGridGammas[g], kGridBetas[b]);
      QPOPF_ASSIGN_OR_RETURN(PrivacyReport r, AuditMechanism(mech, fx.audit_pairs));
      AttachBound(r, TheoreticalEpsilon(kGridBetas[b], kGridGammas[g], fx.l_enc,
                                        kDeltaTheta, fx.vqc.head.W));
      violations += !r.bound_satisfied;
      saturated += r.saturated;
      if (r.eps_reg > 0.0) worst_ratio = std::max(worst_ratio, r.eps_max / r.eps_reg);
      fx.grid[{static_cast<int>(g), static_cast<int>(b)}] = std::move(r);
    }
  }
  return Outcome{violations == 0,
                 absl::StrFormat("48 grid points x 1000 pairs, violations=%d, "
                                 "saturated pairs=%d, max eps_emp/eps_reg %.4f, L_enc=%.4f",
                                 violations, saturated, worst_ratio, fx.l_enc)};
}

absl::StatusOr<Outcome> TradeoffSoundness(Fixture& fx) {
  constexpr int kThetas = 100;
  constexpr int kDraws = 10000;
  const std::vector<std::pair<double, double>> settings = {{0.0, 1.0}, {0.2, 3.0}, {0.4, 10.0}};
  const ScenarioBatch batch = MakeScenarioBatch(fx.atlas.theta_box, 1000, 505);
  int audited = 0, violations = 0, mis_draws = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < batch.size() && audited < kThetas; ++s) {
    const Eigen::VectorXd& theta = batch.theta[s];
    QPOPF_ASSIGN_OR_RETURN(int true_id, LocateRegion(fx.atlas, theta));
    QPOPF_ASSIGN_OR_RETURN(VqcOutput clean, VqcForward(fx.vqc, theta, 0.0, 1.0));
    if (Margin(clean.s, true_id) <= 0.0) continue;
    ++audited;
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd regrets,
                           RegionRegrets(fx.atlas, fx.lp, theta, true_id));
    for (size_t k = 0; k < settings.size(); ++k) {
      const auto [gamma, beta] = settings[k];
      const TradeoffBound tb = ComputeTradeoffBound(clean.s, gamma, beta, true_id, regrets,
                                                    fx.l_enc, kDeltaTheta, fx.vqc.head.W);
      const Eigen::VectorXd p = SoftmaxProbs((1.0 - gamma) * clean.s, beta);
      Rng rng = StreamRng(606 + k, s);
      double sum = 0.0, sum2 = 0.0;
      for (int d = 0; d < kDraws; ++d) {
        const int id = SampleCategorical(p, rng);
        const double r = regrets(id - 1);
        mis_draws += id != true_id;
        sum += r;
        sum2 += r * r;
      }
      const double mean = sum / kDraws;
      const double var = std::max(0.0, (sum2 - kDraws * mean * mean) / (kDraws - 1));
      const double se = std::sqrt(var / kDraws);
      const double excess = mean - (tb.bound + 3.0 * se);
      worst_excess = std::max(worst_excess, excess);
      violations += excess > 0.0;
    }
  }
  const bool ok = audited == kThetas && violations == 0;
  return Outcome{ok, absl::StrFormat("%d thetas x 3 (gamma,beta) settings x %d draws, "
                                     "violations=%d, mis-selected draws=%d, "
                                     "max (mean - bound - 3se) %.3e",
                                     audited, kDraws, violations, mis_draws, worst_excess)};
}

absl::StatusOr<Outcome> MarginScaling(Fixture& fx) {
  const ScenarioBatch batch = MakeScenarioBatch(fx.atlas.theta_box, 1000, 707);
  double worst = 0.0;
  for (const Eigen::VectorXd& theta : batch.theta) {
    QPOPF_ASSIGN_OR_RETURN(int true_id, LocateRegion(fx.atlas, theta));
    QPOPF_ASSIGN_OR_RETURN(VqcOutput clean, VqcForward(fx.vqc, theta, 0.0, 1.0));
    const double m0 = Margin(clean.s, true_id);
    for (int g = 1; g <= 10; ++g) {
      const double gamma = 0.1 * g;
      QPOPF_ASSIGN_OR_RETURN(VqcOutput noisy, VqcForward(fx.vqc, theta, gamma, 1.0));
      worst = std::max(worst, std::abs(Margin(noisy.s, true_id) - (1.0 - gamma) * m0));
    }
  }
  return Outcome{fx.vqc.head.bias_free() && worst <= 1e-12,
                 absl::StrFormat("bias-free=%d, 1000 points x 10 gammas, max error %.3e "
                                 "(tol 1e-12)",
                                 fx.vqc.head.bias_free(), worst)};
}

absl::StatusOr<Outcome> QubitTable() {
  // (bits per variable, bits per slack) -> direct QUBO total.
  struct Row {
    int b, y, total;
  };
  const Row table[] = {{4, 2, 596}, {4, 3, 810},  {4, 4, 1024},
                       {6, 2, 680}, {6, 3, 894},  {6, 4, 1108},
                       {8, 3, 978}, {8, 4, 1192}, {8, 5, 1406}};
  bool ok = true;
  std::string rows;
  for (const Row& r : table) {
    const QubitBudget q = ComputeQubitBudget(r.b, r.y);
    ok = ok && q.direct_total == r.total && q.ours == 5;
    absl::StrAppend(&rows, rows.empty() ? "" : " ", q.direct_total);
  }
  return Outcome{ok, absl::StrCat("totals ", rows, "; ours 5")};
}

absl::StatusOr<Outcome> RuntimeFormula() {
  const RuntimeEstimate e = RuntimeModel(5, 6);
  const bool ok = e.depth == 37 && std::abs(e.micros - 1.37) <= 1e-12;
  return Outcome{ok, absl::StrFormat("D=%d t=%.15g us", e.depth, e.micros)};
}

absl::StatusOr<Outcome> Trends(Fixture& fx) {
  // Pure roundoff allowance; eps95 values are O(1).
  constexpr double kSlack = 1e-12;
  int gamma_breaks = 0, beta_breaks = 0, checked = 0;
  int full_grid_breaks = 0;
  for (size_t g = 0; g < kGridGammas.size(); ++g) {
    for (size_t b = 0; b < kGridBetas.size(); ++b) {
      const double e = fx.grid.at({int(g), int(b)}).eps95;
      const bool in_audit_grid = kGridBetas[b] <= 10.0;
      if (g + 1 < kGridGammas.size()) {
        const bool bad = fx.grid.at({int(g + 1), int(b)}).eps95 > e + kSlack;
        if (in_audit_grid) {
          gamma_breaks += bad;
          ++checked;
        }
        full_grid_breaks += bad;
      }
      if (b + 1 < kGridBetas.size()) {
        const bool bad = fx.grid.at({int(g), int(b + 1)}).eps95 < e - kSlack;
        if (in_audit_grid && kGridBetas[b + 1] <= 10.0) {
          beta_breaks += bad;
          ++checked;
        }
        full_grid_breaks += bad;
      }
    }
  }

  // Metrics at large beta against gamma = 0, 3 combined standard errors.
  const ScenarioBatch batch = MakeScenarioBatch(fx.atlas.theta_box, 1000, 808);
  QPOPF_ASSIGN_OR_RETURN(EvaluationContext ctx,
                         EvaluationContext::Create(fx.atlas, fx.lp, batch));
  QPOPF_ASSIGN_OR_RETURN(std::vector<MetricsReport> reports,
                         Sweep(ctx, fx.vqc, kGridGammas, {1e3, 1e4}, 909));
  int metric_breaks = 0;
  double worst_z = 0.0;
  auto check = [&](double a, double sa, double b, double sb) {
    const double diff = std::abs(a - b);
    const double ci = 3.0 * std::hypot(sa, sb);
    if (diff > ci) ++metric_breaks;
    if (ci > 0.0) worst_z = std::max(worst_z, diff / (ci / 3.0));
  };
  for (const MetricsReport& r : reports) {
    const MetricsReport* base = nullptr;
    for (const MetricsReport& c : reports) {
      if (c.gamma == 0.0 && c.beta == r.beta) base = &c;
    }
    if (base == nullptr) return absl::InternalError("missing gamma = 0 row");
    check(r.cost_gap, r.cost_gap_se, base->cost_gap, base->cost_gap_se);
    check(r.mae_mean, r.mae_mean_se, base->mae_mean, base->mae_mean_se);
    check(r.infeasibility_rate, r.infeasibility_se, base->infeasibility_rate,
          base->infeasibility_se);
    check(r.stochastic_accuracy, r.accuracy_se, base->stochastic_accuracy, base->accuracy_se);
  }
  const bool ok = gamma_breaks == 0 && beta_breaks == 0 && metric_breaks == 0;
  return Outcome{ok, absl::StrFormat(
                         "eps95 on gamma 0..0.5 x beta 0.1..10: %d adjacent comparisons, "
                         "gamma breaks=%d, beta breaks=%d (full 6x8 grid breaks=%d); "
                         "metrics at beta in {1e3,1e4}, 1000 scenarios: outside 3se=%d, "
                         "max |diff|/se %.2f",
                         checked, gamma_breaks, beta_breaks, full_grid_breaks, metric_breaks,
                         worst_z)};
}

absl::StatusOr<Outcome> ComparativeOrdering(Fixture& fx) {
  QPOPF_ASSIGN_OR_RETURN(double acc_vqc, Accuracy(fx.vqc, fx.test));
  QPOPF_ASSIGN_OR_RETURN(double acc_mlp, Accuracy(fx.mlp, fx.test));
  const bool a_ok = acc_vqc >= 0.9 && acc_mlp >= 0.9;
  std::string detail = absl::StrFormat(
      "(a) test acc vqc=%.4f mlp=%.4f [%d params vs %d]; ", acc_vqc, acc_mlp,
      fx.vqc.num_params(), fx.mlp.num_params());

  QPOPF_ASSIGN_OR_RETURN(std::vector<AdjacentPair> pairs,
                         MakeAdjacentPairs(fx.atlas.theta_box, {kDeltaTheta, 100, 7}));
  const NoisyMlpMechanism mlp_plain(fx.mlp, 0.0, 1.0);
  QPOPF_ASSIGN_OR_RETURN(PrivacyReport mlp_audit, AuditMechanism(mlp_plain, pairs));
  const VqcMechanism vqc_plain(fx.vqc, 0.0, 1.0);
  QPOPF_ASSIGN_OR_RETURN(PrivacyReport vqc_audit, AuditMechanism(vqc_plain, pairs));
  const bool c_ok = vqc_audit.eps95 < mlp_audit.eps95;

  // Matched targets: fractions of the unperturbed MLP eps95. The MLP reaches
  // each by Gaussian logit noise, the VQC by lowering beta.
  const ScenarioBatch batch = MakeScenarioBatch(fx.atlas.theta_box, 1000, 5);
  QPOPF_ASSIGN_OR_RETURN(EvaluationContext ctx,
                         EvaluationContext::Create(fx.atlas, fx.lp, batch));
  bool b_ok = true;
  for (double frac : {0.25, 0.5, 0.75}) {
    const double target = frac * mlp_audit.eps95;
    QPOPF_ASSIGN_OR_RETURN(SigmaCalibration cal, CalibrateSigma(fx.mlp, 1.0, target, pairs));
    double lo = 0.01, hi = 100.0, eps_lo = 0.0;
    for (int it = 0; it < 40; ++it) {
      const double mid = std::sqrt(lo * hi);
      QPOPF_ASSIGN_OR_RETURN(PrivacyReport r,
                             AuditMechanism(VqcMechanism(fx.vqc, 0.0, mid), pairs));
      if (r.eps95 > target) {
        hi = mid;
      } else {
        lo = mid;
        eps_lo = r.eps95;
      }
    }
    const VqcMechanism vqc(fx.vqc, 0.0, lo);
    const NoisyMlpMechanism mlp(fx.mlp, cal.sigma, 1.0);
    QPOPF_ASSIGN_OR_RETURN(MetricsReport ev, Evaluate(ctx, vqc, 11));
    QPOPF_ASSIGN_OR_RETURN(MetricsReport em, Evaluate(ctx, mlp, 11));
    const bool won = ev.cost_gap < em.cost_gap && ev.infeasibility_rate < em.infeasibility_rate;
    b_ok = b_ok && won;
    absl::StrAppendFormat(&detail,
                          "(b) eps %.3f: vqc beta=%.3f eps=%.3f gap=%.4f%% inf=%.1f%% | "
                          "mlp sigma=%.3f eps=%.3f gap=%.4f%% inf=%.1f%% %s; ",
                          target, lo, eps_lo, 100 * ev.cost_gap, 100 * ev.infeasibility_rate,
                          cal.sigma, cal.eps95, 100 * em.cost_gap,
                          100 * em.infeasibility_rate, won ? "won" : "LOST");
  }
  absl::StrAppendFormat(&detail, "(c) eps95 vqc=%.4f mlp=%.4f; training %.0f s",
                        vqc_audit.eps95, mlp_audit.eps95, fx.train_seconds);
  return Outcome{a_ok && b_ok && c_ok, detail};
}

// ---------------------------------------------------------------------------

struct CliRun {
  int code;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qpopf");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, err.str()};
}

absl::StatusOr<std::map<std::string, std::string>> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    QPOPF_ASSIGN_OR_RETURN(files[entry.path().filename().string()],
                           ReadFile(entry.path().string()));
  }
  return files;
}

absl::StatusOr<Outcome> Determinism() {
  const std::string case_path = std::string(QPOPF_DATA_DIR) + "/case69_popf.json";
  const fs::path root = fs::temp_directory_path() / "qpopf_acceptance";
  fs::remove_all(root);
  const fs::path dir = root / "run";
  const fs::path timed = root / "timed";
  fs::create_directories(dir);
  fs::create_directories(timed);
  const std::string out = dir.string();
  const std::string atlas = (dir / "atlas.json").string();
  const std::string vqc = (dir / "model_vqc.json").string();
  const std::string mlp = (dir / "model_mlp.json").string();
  // Reduced sizes: determinism does not depend on scale.
  const std::vector<std::vector<std::string>> pipeline = {
      {"regions", "--case", case_path, "--budget", "600", "--seed", "3", "--out-dir", out},
      {"train", "--case", case_path, "--atlas", atlas, "--model", "vqc", "--samples", "600",
       "--epochs", "3", "--seed", "4", "--out-dir", out},
      {"train", "--case", case_path, "--atlas", atlas, "--model", "mlp", "--samples", "600",
       "--epochs", "3", "--seed", "4", "--out-dir", out},
      {"audit", "--case", case_path, "--atlas", atlas, "--model", vqc, "--gamma", "0.1",
       "--beta", "3", "--seed", "5", "--out-dir", out},
      {"audit", "--case", case_path, "--atlas", atlas, "--model", mlp, "--sigma", "0.5",
       "--draws", "500", "--seed", "5", "--out-dir", out},
      {"eval", "--case", case_path, "--atlas", atlas, "--model", vqc, "--scenarios", "200",
       "--seed", "6", "--out-dir", out},
      {"eval", "--case", case_path, "--atlas", atlas, "--model", mlp, "--sigma", "0.5",
       "--scenarios", "200", "--seed", "6", "--out-dir", out},
      {"eval", "--case", case_path, "--atlas", atlas, "--model", "oracle", "--scenarios",
       "200", "--seed", "6", "--out-dir", out},
      {"sweep", "--case", case_path, "--atlas", atlas, "--model", vqc, "--scenarios", "100",
       "--pairs", "50", "--seed", "7", "--out-dir", out},
      {"budget", "--out-dir", out},
      {"report", "--out-dir", out},
  };
  const std::vector<std::string> timed_eval = {
      "eval", "--case", case_path, "--atlas", atlas, "--model", vqc, "--scenarios", "50",
      "--seed", "6", "--timing", "--out-dir", timed.string()};

  std::vector<std::map<std::string, std::string>> runs, timed_runs;
  for (int rep = 0; rep < 2; ++rep) {
    for (const auto& args : pipeline) {
      const CliRun r = Cli(args);
      if (r.code != kExitOk) {
        return absl::InternalError(absl::StrCat(args[0], " failed: ", r.err));
      }
    }
    QPOPF_ASSIGN_OR_RETURN(auto snap, Snapshot(dir));
    runs.push_back(std::move(snap));
    const CliRun r = Cli(timed_eval);
    if (r.code != kExitOk) return absl::InternalError(absl::StrCat("eval --timing: ", r.err));
    QPOPF_ASSIGN_OR_RETURN(auto tsnap, Snapshot(timed));
    tsnap.erase("speedup.csv");  // wall-clock measurements
    timed_runs.push_back(std::move(tsnap));
  }
  int compared = 0;
  std::vector<std::string> differing;
  for (const auto* pair : {&runs, &timed_runs}) {
    const auto& a = (*pair)[0];
    const auto& b = (*pair)[1];
    if (a.size() != b.size()) differing.push_back("<file set>");
    for (const auto& [name, bytes] : a) {
      ++compared;
      auto it = b.find(name);
      if (it == b.end() || it->second != bytes) differing.push_back(name);
    }
  }
  fs::remove_all(root);
  std::string diff_list;
  for (const std::string& d : differing) absl::StrAppend(&diff_list, " ", d);
  return Outcome{differing.empty() && compared >= 15,
                 absl::StrFormat("%d files compared across two runs of %d commands, "
                                 "differing:%s",
                                 compared, static_cast<int>(pipeline.size()) + 1,
                                 differing.empty() ? " none" : diff_list)};
}

// ---------------------------------------------------------------------------

struct Criterion {
  const char* id;
  const char* name;
  double limit_seconds;  // 0 = no runtime limit
  std::function<absl::StatusOr<Outcome>()> run;
  std::function<double()> extra_seconds;  // shared setup charged to this one
};

int Main() {
  Fixture fx;
  const absl::Status atlas_status = BuildAtlas(fx);
  const absl::Status model_status = atlas_status.ok() ? TrainModels(fx) : atlas_status;
  auto with = [](const absl::Status& pre,
                 std::function<absl::StatusOr<Outcome>()> body) {
    return [pre, body]() -> absl::StatusOr<Outcome> {
      QPOPF_RETURN_IF_ERROR(pre);
      return body();
    };
  };
  auto none = [] { return 0.0; };

  const std::vector<Criterion> criteria = {
      {"C1", "depolarizing contraction", 5, Contraction, none},
      {"C2", "parameter-shift gradient", 10, ParameterShift, none},
      {"C3", "MP-LP oracle equivalence", 60,
       with(atlas_status, [&] { return OracleEquivalence(fx); }),
       [&] { return fx.atlas_seconds; }},
      {"C4", "DP bound soundness", 300, with(model_status, [&] { return PrivacySoundness(fx); }),
       none},
      {"C5", "cost tradeoff bound soundness", 600,
       with(model_status, [&] { return TradeoffSoundness(fx); }), none},
      {"C6", "margin scaling", 0, with(model_status, [&] { return MarginScaling(fx); }), none},
      {"C7", "qubit budget table", 0, QubitTable, none},
      {"C8", "runtime model", 0, RuntimeFormula, none},
      {"C9", "noise and temperature trends", 0,
       with(model_status, [&] { return fx.grid.empty() ? absl::StatusOr<Outcome>(
                                                            absl::FailedPreconditionError(
                                                                "privacy grid missing"))
                                                      : Trends(fx); }),
       none},
      {"C10", "comparative ordering", 1800,
       with(model_status, [&] { return ComparativeOrdering(fx); }),
       [&] { return fx.train_seconds; }},
      {"C11", "CLI determinism", 0, Determinism, none},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const double t0 = Now();
    absl::StatusOr<Outcome> result = c.run();
    const double seconds = Now() - t0 + c.extra_seconds();
    Outcome o = result.ok() ? *result : Outcome{false, result.status().ToString()};
    const bool in_time = c.limit_seconds <= 0 || seconds < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::string limit = c.limit_seconds > 0 ? absl::StrFormat(", limit %.0f s", c.limit_seconds)
                                            : std::string();
    std::printf("[%s] %-4s %-32s %8.2f s%s  %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                seconds, limit.c_str(), o.detail.c_str(),
                in_time ? "" : "  (runtime limit exceeded)");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace qpopf

int main() { return qpopf::Main(); }

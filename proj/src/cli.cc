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

#include "qpopf/cli.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "qpopf/classifier.h"
#include "qpopf/grid_model.h"
#include "qpopf/mechanism.h"
#include "qpopf/mplp_regions.h"
#include "qpopf/popf_eval.h"
#include "qpopf/privacy_audit.h"
#include "qpopf/quantum_circuit.h"
#include "qpopf/util.h"

namespace qpopf {
namespace {

namespace fs = std::filesystem;

struct Common {
  std::string out_dir = ".";
  uint64_t seed = 0;
  int threads = 1;
};

struct Inputs {
  std::string case_path;
  std::string atlas_path;
  std::string model_path;
};

struct RegionsArgs {
  int budget = 3000;
  int validation = 4000;
};

struct TrainArgs {
  std::string kind = "vqc";
  int samples = 3000;
  double train_fraction = 0.8;
  int epochs = 30;
  int batch = 32;
  double lr = 0.05;
  double train_beta = 1.0;
  int qubits = 5;
  int layers = 6;
  double scale = kEncodingScale;
  std::vector<int> hidden = {7, 7};
};

struct MechanismArgs {
  double gamma = 0.0;
  double beta = 1.0;
  double sigma = 0.0;
  int draws = 2000;
};

struct AuditArgs {
  double delta = 0.05;
  int pairs = 100;
  std::string lenc = "analytic";
};

struct EvalArgs {
  int scenarios = 1000;
  bool timing = false;
};

struct SweepArgs {
  std::vector<double> gammas = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> betas = {0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 1000.0};
  int scenarios = 500;
  int pairs = 100;
  double delta = 0.05;
};

struct Loaded {
  ParametricLp lp;
  RegionAtlas atlas;
};

struct Model {
  std::string kind;
  VqcModel vqc;
  MlpModel mlp;
};

absl::StatusOr<ParametricLp> LoadLp(const std::string& case_path) {
  QPOPF_ASSIGN_OR_RETURN(GridCase grid, LoadCase(case_path));
  QPOPF_ASSIGN_OR_RETURN(ParametricLp raw, Linearize(grid));
  return NormalizeParameters(raw);
}

absl::StatusOr<Loaded> LoadProblem(const Inputs& in) {
  Loaded out;
  QPOPF_ASSIGN_OR_RETURN(out.lp, LoadLp(in.case_path));
  QPOPF_ASSIGN_OR_RETURN(nlohmann::json j, ReadJsonFile(in.atlas_path));
  QPOPF_ASSIGN_OR_RETURN(out.atlas, AtlasFromJson(j, out.lp));
  return out;
}

absl::StatusOr<Model> LoadModel(const std::string& path) {
  QPOPF_ASSIGN_OR_RETURN(nlohmann::json j, ReadJsonFile(path));
  Model m;
  m.kind = j.value("kind", "");
  if (m.kind == "vqc") {
    QPOPF_ASSIGN_OR_RETURN(m.vqc, VqcModelFromJson(j));
  } else if (m.kind == "mlp") {
    QPOPF_ASSIGN_OR_RETURN(m.mlp, MlpModelFromJson(j));
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": unknown model kind '", m.kind, "'"));
  }
  return m;
}

absl::Status CheckMechanismArgs(const MechanismArgs& a) {
  if (!(a.gamma >= 0.0 && a.gamma <= 1.0)) {
    return absl::InvalidArgumentError("--gamma must be in [0, 1]");
  }
  if (!(a.beta > 0.0)) return absl::InvalidArgumentError("--beta must be > 0");
  if (!(a.sigma >= 0.0)) return absl::InvalidArgumentError("--sigma must be >= 0");
  return absl::OkStatus();
}

// Provenance block embedded in every output file.
nlohmann::json Meta(const CLI::App& app, const std::string& command,
                    const Common& common,
                    const std::vector<std::string>& inputs) {
  nlohmann::json files = nlohmann::json::object();
  for (const std::string& path : inputs) {
    if (!path.empty() && path != "oracle") files[path] = FileSha256(path);
  }
  return {{"command", command},
          {"config_hash", Sha256Hex(app.config_to_str(true, false))},
          {"seed", common.seed},
          {"inputs", std::move(files)}};
}

absl::StatusOr<std::string> OutPath(const Common& common,
                                    const std::string& name) {
  std::error_code ec;
  fs::create_directories(common.out_dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", common.out_dir, ": ", ec.message()));
  }
  return (fs::path(common.out_dir) / name).string();
}

std::string CsvWithMeta(const nlohmann::json& meta, const std::string& body) {
  return absl::StrCat("# config_hash=", meta["config_hash"].get<std::string>(),
                      " seed=", meta["seed"].dump(), "\n", body);
}

std::string Fmt(double v) { return FormatDouble(v); }

// ---------------------------------------------------------------- commands

absl::Status CmdRegions(const CLI::App& app, const Common& common,
                        const Inputs& in, const RegionsArgs& args,
                        std::ostream& out) {
  QPOPF_ASSIGN_OR_RETURN(ParametricLp lp, LoadLp(in.case_path));
  EnumerationOptions options;
  options.sampling_budget = args.budget;
  options.validation_samples = args.validation;
  options.seed = common.seed;
  options.threads = common.threads;
  QPOPF_ASSIGN_OR_RETURN(RegionAtlas atlas, EnumerateRegions(lp, options));
  nlohmann::json j = AtlasToJson(atlas);
  j["meta"] = Meta(app, "regions", common, {in.case_path});
  QPOPF_ASSIGN_OR_RETURN(std::string path, OutPath(common, "atlas.json"));
  QPOPF_RETURN_IF_ERROR(WriteJsonFile(path, j));
  int degenerate = 0;
  for (const CriticalRegion& r : atlas.regions) degenerate += r.degenerate;
  out << "regions: K=" << atlas.num_regions() << " coverage="
      << Fmt(atlas.coverage) << " degenerate=" << degenerate << " -> " << path
      << "\n";
  return absl::OkStatus();
}

std::string TrainLogCsv(const std::vector<EpochLog>& log) {
  std::string csv = "epoch,loss,train_accuracy,test_accuracy\n";
  for (const EpochLog& e : log) {
    absl::StrAppend(&csv, e.epoch, ",", Fmt(e.loss), ",", Fmt(e.train_accuracy),
                    ",", Fmt(e.test_accuracy), "\n");
  }
  return csv;
}

absl::Status CmdTrain(const CLI::App& app, const Common& common,
                      const Inputs& in, const TrainArgs& args,
                      std::ostream& out) {
  QPOPF_ASSIGN_OR_RETURN(Loaded p, LoadProblem(in));
  QPOPF_ASSIGN_OR_RETURN(Dataset data,
                         SampleDataset(p.atlas, args.samples, common.seed));
  auto [train, test] = SplitDataset(data, args.train_fraction);
  TrainConfig config;
  config.epochs = args.epochs;
  config.batch_size = args.batch;
  config.learning_rate = args.lr;
  config.beta = args.train_beta;
  config.seed = common.seed;
  config.threads = common.threads;
  const int K = p.atlas.num_regions();
  nlohmann::json j;
  std::vector<EpochLog> log;
  double test_acc = 0.0;
  if (args.kind == "vqc") {
    CircuitConfig circuit =
        MakeCircuitConfig(args.qubits, args.layers, p.lp.num_parameters());
    circuit.encoding_scale = args.scale;
    QPOPF_ASSIGN_OR_RETURN(TrainResult<VqcModel> r,
                           TrainVqc(train, test, circuit, K, config));
    QPOPF_ASSIGN_OR_RETURN(test_acc, Accuracy(r.model, test));
    j = ToJson(r.model);
    log = std::move(r.log);
  } else if (args.kind == "mlp") {
    QPOPF_ASSIGN_OR_RETURN(TrainResult<MlpModel> r,
                           TrainMlp(train, test, args.hidden, K, config));
    QPOPF_ASSIGN_OR_RETURN(test_acc, Accuracy(r.model, test));
    j = ToJson(r.model);
    log = std::move(r.log);
  } else {
    return absl::InvalidArgumentError("--model must be vqc or mlp");
  }
  const nlohmann::json meta =
      Meta(app, "train", common, {in.case_path, in.atlas_path});
  j["atlas_lp_hash"] = p.atlas.lp_hash;
  j["test_accuracy"] = test_acc;
  j["train_samples"] = train.size();
  j["test_samples"] = test.size();
  j["meta"] = meta;
  QPOPF_ASSIGN_OR_RETURN(std::string path,
                         OutPath(common, absl::StrCat("model_", args.kind, ".json")));
  QPOPF_RETURN_IF_ERROR(WriteJsonFile(path, j));
  QPOPF_ASSIGN_OR_RETURN(std::string log_path,
                         OutPath(common, absl::StrCat("train_", args.kind, ".csv")));
  QPOPF_RETURN_IF_ERROR(WriteFile(log_path, CsvWithMeta(meta, TrainLogCsv(log))));
  out << "train: model=" << args.kind << " params=" << j["num_params"].get<int>()
      << " test_accuracy=" << Fmt(test_acc) << " -> " << path << "\n";
  return absl::OkStatus();
}

absl::Status CmdAudit(const CLI::App& app, const Common& common,
                      const Inputs& in, const MechanismArgs& mech,
                      const AuditArgs& args, std::ostream& out) {
  QPOPF_RETURN_IF_ERROR(CheckMechanismArgs(mech));
  QPOPF_ASSIGN_OR_RETURN(Loaded p, LoadProblem(in));
  QPOPF_ASSIGN_OR_RETURN(Model model, LoadModel(in.model_path));
  QPOPF_ASSIGN_OR_RETURN(
      std::vector<AdjacentPair> pairs,
      MakeAdjacentPairs(p.atlas.theta_box,
                        AdjacencySpec{args.delta, args.pairs, common.seed}));
  PrivacyReport report;
  nlohmann::json extra = nlohmann::json::object();
  if (model.kind == "vqc") {
    VqcMechanism m(model.vqc, mech.gamma, mech.beta);
    QPOPF_ASSIGN_OR_RETURN(report, AuditMechanism(m, pairs, common.threads));
    double l_enc = EncodingLipschitz(model.vqc.circuit, p.lp.num_parameters());
    extra["l_enc_analytic"] = l_enc;
    if (args.lenc == "empirical") {
      QPOPF_ASSIGN_OR_RETURN(
          LipschitzEstimate est,
          EstimateEncodingLipschitz(model.vqc.circuit, model.vqc.params,
                                    p.atlas.theta_box, 2000, args.delta,
                                    common.seed));
      l_enc = est.max_ratio;
      extra["l_enc_empirical"] = l_enc;
      extra["warning"] =
          "empirical L_enc is a sample statistic; eps_reg is not a proof";
    }
    AttachBound(report, TheoreticalEpsilon(mech.beta, mech.gamma, l_enc,
                                           args.delta, model.vqc.head.W));
  } else {
    NoisyMlpMechanism m(model.mlp, mech.sigma, mech.beta, mech.draws,
                        common.seed);
    QPOPF_ASSIGN_OR_RETURN(report, AuditMechanism(m, pairs, common.threads));
    extra["sigma"] = mech.sigma;
    extra["draws"] = mech.draws;
  }
  report.gamma = mech.gamma;
  report.beta = mech.beta;
  report.delta_theta = args.delta;
  nlohmann::json j = ToJson(report);
  j["details"] = extra;
  j["meta"] = Meta(app, "audit", common,
                   {in.case_path, in.atlas_path, in.model_path});
  QPOPF_ASSIGN_OR_RETURN(std::string path,
                         OutPath(common, absl::StrCat("audit_", model.kind, ".json")));
  QPOPF_RETURN_IF_ERROR(WriteJsonFile(path, j));
  out << "audit: model=" << model.kind << " eps95=" << Fmt(report.eps95)
      << " eps_reg=" << (std::isnan(report.eps_reg) ? "n/a" : Fmt(report.eps_reg))
      << " bound_satisfied="
      << (std::isnan(report.eps_reg) ? "n/a"
                                     : (report.bound_satisfied ? "true" : "false"))
      << " -> " << path << "\n";
  return absl::OkStatus();
}

absl::Status CmdEval(const CLI::App& app, const Common& common,
                     const Inputs& in, const MechanismArgs& mech,
                     const EvalArgs& args, std::ostream& out) {
  QPOPF_RETURN_IF_ERROR(CheckMechanismArgs(mech));
  QPOPF_ASSIGN_OR_RETURN(Loaded p, LoadProblem(in));
  const ScenarioBatch batch =
      MakeScenarioBatch(p.atlas.theta_box, args.scenarios, common.seed);
  QPOPF_ASSIGN_OR_RETURN(EvaluationContext ctx,
                         EvaluationContext::Create(p.atlas, p.lp, batch,
                                                   common.threads));
  MetricsReport report;
  std::string kind = "oracle";
  Model model;
  if (in.model_path == "oracle") {
    OracleMechanism m(p.atlas);
    QPOPF_ASSIGN_OR_RETURN(report, Evaluate(ctx, m, common.seed));
  } else {
    QPOPF_ASSIGN_OR_RETURN(model, LoadModel(in.model_path));
    kind = model.kind;
    if (kind == "vqc") {
      VqcMechanism m(model.vqc, mech.gamma, mech.beta);
      QPOPF_ASSIGN_OR_RETURN(report, Evaluate(ctx, m, common.seed));
    } else {
      NoisyMlpMechanism m(model.mlp, mech.sigma, mech.beta, mech.draws,
                          common.seed);
      QPOPF_ASSIGN_OR_RETURN(report, Evaluate(ctx, m, common.seed));
    }
  }
  report.gamma = mech.gamma;
  report.beta = mech.beta;
  QPOPF_ASSIGN_OR_RETURN(double expected, ExpectedCost(p.atlas, p.lp, batch));
  nlohmann::json j = ToJson(report);
  j["sigma"] = mech.sigma;
  j["expected_optimal_cost"] = expected;
  const nlohmann::json meta = Meta(app, "eval", common,
                                   {in.case_path, in.atlas_path, in.model_path});
  j["meta"] = meta;
  QPOPF_ASSIGN_OR_RETURN(std::string path,
                         OutPath(common, absl::StrCat("eval_", kind, ".json")));
  QPOPF_RETURN_IF_ERROR(WriteJsonFile(path, j));
  out << "eval: model=" << kind << " scenarios=" << report.samples
      << " mae_mean_mw=" << Fmt(report.mae_mean)
      << " cost_gap=" << Fmt(report.cost_gap)
      << " infeasibility=" << Fmt(report.infeasibility_rate)
      << " accuracy=" << Fmt(report.stochastic_accuracy) << " -> " << path
      << "\n";
  if (args.timing) {
    const int qubits = kind == "vqc" ? model.vqc.circuit.num_qubits : 5;
    const int layers = kind == "vqc" ? model.vqc.circuit.num_layers : 6;
    QPOPF_ASSIGN_OR_RETURN(std::vector<SpeedupRow> rows,
                           MeasureSpeedup(p.atlas, p.lp, batch, qubits, layers));
    QPOPF_ASSIGN_OR_RETURN(std::string tpath, OutPath(common, "speedup.csv"));
    QPOPF_RETURN_IF_ERROR(WriteFile(tpath, CsvWithMeta(meta, SpeedupCsv(rows))));
    out << "eval: timing -> " << tpath << "\n";
  }
  return absl::OkStatus();
}

absl::Status CmdSweep(const CLI::App& app, const Common& common,
                      const Inputs& in, const SweepArgs& args,
                      std::ostream& out) {
  QPOPF_ASSIGN_OR_RETURN(Loaded p, LoadProblem(in));
  QPOPF_ASSIGN_OR_RETURN(Model model, LoadModel(in.model_path));
  if (model.kind != "vqc") {
    return absl::InvalidArgumentError("sweep needs a vqc model");
  }
  const VqcModel& vqc = model.vqc;
  const ScenarioBatch batch =
      MakeScenarioBatch(p.atlas.theta_box, args.scenarios, common.seed);
  QPOPF_ASSIGN_OR_RETURN(EvaluationContext ctx,
                         EvaluationContext::Create(p.atlas, p.lp, batch,
                                                   common.threads));
  QPOPF_ASSIGN_OR_RETURN(
      std::vector<MetricsReport> reports,
      Sweep(ctx, vqc, args.gammas, args.betas, common.seed));

  // Privacy side of the grid, from noise-free features of each pair.
  QPOPF_ASSIGN_OR_RETURN(
      std::vector<AdjacentPair> pairs,
      MakeAdjacentPairs(p.atlas.theta_box,
                        AdjacencySpec{args.delta, args.pairs, common.seed}));
  auto features = [&](const Eigen::VectorXd& theta)
      -> absl::StatusOr<Eigen::VectorXd> {
    QPOPF_ASSIGN_OR_RETURN(StateVector s,
                           RunCircuit(vqc.circuit, vqc.params, theta));
    return ExpectationZ(s, vqc.circuit.num_qubits);
  };
  std::vector<Eigen::VectorXd> ha, hb, hs;
  for (const AdjacentPair& pair : pairs) {
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd a, features(pair.theta));
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd b, features(pair.theta_prime));
    ha.push_back(a);
    hb.push_back(b);
  }
  for (const Eigen::VectorXd& theta : batch.theta) {
    QPOPF_ASSIGN_OR_RETURN(Eigen::VectorXd h, features(theta));
    hs.push_back(h);
  }
  const double l_enc = EncodingLipschitz(vqc.circuit, p.lp.num_parameters());
  std::string privacy_csv =
      "gamma,beta,eps95,eps_reg,accuracy_det,accuracy_stoch\n";
  nlohmann::json grid = nlohmann::json::array();
  size_t idx = 0;
  for (double gamma : args.gammas) {
    for (double beta : args.betas) {
      std::vector<Eigen::VectorXd> pa, pb;
      for (size_t i = 0; i < pairs.size(); ++i) {
        pa.push_back(LogSoftmax(VqcLogitsFromFeatures(vqc, ha[i], gamma), beta));
        pb.push_back(LogSoftmax(VqcLogitsFromFeatures(vqc, hb[i], gamma), beta));
      }
      QPOPF_ASSIGN_OR_RETURN(PrivacyReport pr, AuditLogDistributions(pa, pb));
      AttachBound(pr, TheoreticalEpsilon(beta, gamma, l_enc, args.delta, vqc.head.W));
      int correct = 0;
      for (int s = 0; s < batch.size(); ++s) {
        Eigen::Index k = 0;
        VqcLogitsFromFeatures(vqc, hs[s], gamma).maxCoeff(&k);
        correct += static_cast<int>(k) + 1 == ctx.true_region(s);
      }
      const double acc_det = static_cast<double>(correct) / batch.size();
      const MetricsReport& r = reports[idx++];
      absl::StrAppend(&privacy_csv, Fmt(gamma), ",", Fmt(beta), ",",
                      Fmt(pr.eps95), ",", Fmt(pr.eps_reg), ",", Fmt(acc_det),
                      ",", Fmt(r.stochastic_accuracy), "\n");
      nlohmann::json row = ToJson(r);
      row["eps95"] = pr.eps95;
      row["eps_reg"] = pr.eps_reg;
      row["bound_satisfied"] = pr.bound_satisfied;
      row["accuracy_det"] = acc_det;
      grid.push_back(std::move(row));
    }
  }
  const nlohmann::json meta = Meta(app, "sweep", common,
                                   {in.case_path, in.atlas_path, in.model_path});
  QPOPF_ASSIGN_OR_RETURN(std::string heat_path, OutPath(common, "sweep.csv"));
  QPOPF_RETURN_IF_ERROR(WriteFile(heat_path, CsvWithMeta(meta, HeatmapCsv(reports))));
  QPOPF_ASSIGN_OR_RETURN(std::string priv_path,
                         OutPath(common, "privacy_sweep.csv"));
  QPOPF_RETURN_IF_ERROR(WriteFile(priv_path, CsvWithMeta(meta, privacy_csv)));
  QPOPF_ASSIGN_OR_RETURN(std::string json_path, OutPath(common, "sweep.json"));
  QPOPF_RETURN_IF_ERROR(WriteJsonFile(
      json_path, {{"l_enc", l_enc}, {"grid", std::move(grid)}, {"meta", meta}}));
  out << "sweep: " << reports.size() << " grid points -> " << heat_path << ", "
      << priv_path << "\n";
  return absl::OkStatus();
}

// (b, Y) rows of the direct-encoding comparison.
const std::vector<std::pair<int, int>>& BudgetGrid() {
  static const std::vector<std::pair<int, int>> grid = {
      {4, 2}, {4, 3}, {4, 4}, {6, 2}, {6, 3}, {6, 4}, {8, 3}, {8, 4}, {8, 5}};
  return grid;
}

absl::Status CmdBudget(const CLI::App& app, const Common& common,
                       std::ostream& out) {
  std::string csv = "b,Y,variables,slack,direct_qubo,ours\n";
  out << "  b  Y  variables  slack  direct  ours\n";
  for (const auto& [b, y] : BudgetGrid()) {
    const QubitBudget q = ComputeQubitBudget(b, y);
    absl::StrAppend(&csv, b, ",", y, ",", q.variable_qubits, ",", q.slack_qubits,
                    ",", q.direct_total, ",", q.ours, "\n");
    out << absl::StrFormat("%3d%3d%11d%7d%8d%6d\n", b, y, q.variable_qubits,
                           q.slack_qubits, q.direct_total, q.ours);
  }
  const RuntimeEstimate rt = RuntimeModel(5, 6);
  out << "runtime model: n_q=5 L=6 depth=" << rt.depth
      << " t_us=" << Fmt(rt.micros) << "\n";
  const nlohmann::json meta = Meta(app, "budget", common, {});
  QPOPF_ASSIGN_OR_RETURN(std::string path, OutPath(common, "budget.csv"));
  QPOPF_RETURN_IF_ERROR(WriteFile(path, CsvWithMeta(meta, csv)));
  return absl::OkStatus();
}

absl::Status CmdReport(const CLI::App& app, const Common& common,
                       std::ostream& out) {
  static const char* kJsonFiles[] = {"audit_vqc.json", "audit_mlp.json",
                                     "eval_vqc.json",  "eval_mlp.json",
                                     "eval_oracle.json"};
  static const char* kCsvFiles[] = {"train_vqc.csv", "train_mlp.csv",
                                    "sweep.csv",     "privacy_sweep.csv",
                                    "budget.csv",    "speedup.csv"};
  std::string md = "# qpopf run report\n\n";
  std::vector<std::string> inputs;
  const fs::path dir(common.out_dir);
  if (fs::exists(dir / "atlas.json")) {
    QPOPF_ASSIGN_OR_RETURN(nlohmann::json a, ReadJsonFile((dir / "atlas.json").string()));
    inputs.push_back((dir / "atlas.json").string());
    absl::StrAppend(&md, "## atlas\n\n- regions: ", a["regions"].size(),
                    "\n- coverage: ", a["coverage"].dump(),
                    "\n- sampling budget: ", a["sampling_budget"].dump(), "\n\n");
  }
  for (const char* kind : {"vqc", "mlp"}) {
    const fs::path f = dir / absl::StrCat("model_", kind, ".json");
    if (!fs::exists(f)) continue;
    QPOPF_ASSIGN_OR_RETURN(nlohmann::json m, ReadJsonFile(f.string()));
    inputs.push_back(f.string());
    absl::StrAppend(&md, "## model ", kind, "\n\n- parameters: ",
                    m["num_params"].dump(), "\n- test accuracy: ",
                    m["test_accuracy"].dump(), "\n\n");
  }
  for (const char* name : kJsonFiles) {
    const fs::path f = dir / name;
    if (!fs::exists(f)) continue;
    QPOPF_ASSIGN_OR_RETURN(nlohmann::json j, ReadJsonFile(f.string()));
    inputs.push_back(f.string());
    j.erase("eps_emp");
    j.erase("meta");
    absl::StrAppend(&md, "## ", name, "\n\n```json\n", j.dump(1), "\n```\n\n");
  }
  for (const char* name : kCsvFiles) {
    const fs::path f = dir / name;
    if (!fs::exists(f)) continue;
    QPOPF_ASSIGN_OR_RETURN(std::string body, ReadFile(f.string()));
    inputs.push_back(f.string());
    absl::StrAppend(&md, "## ", name, "\n\n```\n", body, "```\n\n");
  }
  if (inputs.empty()) {
    return absl::NotFoundError(
        absl::StrCat("no outputs found in ", common.out_dir));
  }
  const nlohmann::json meta = Meta(app, "report", common, inputs);
  absl::StrAppend(&md, "## provenance\n\n```json\n", meta.dump(1), "\n```\n");
  QPOPF_ASSIGN_OR_RETURN(std::string path, OutPath(common, "report.md"));
  QPOPF_RETURN_IF_ERROR(WriteFile(path, md));
  out << "report: " << inputs.size() << " inputs -> " << path << "\n";
  return absl::OkStatus();
}

void AddCommon(CLI::App* cmd, Common& common) {
  cmd->add_option("--out-dir", common.out_dir, "Output directory")
      ->envname(kOutDirEnv)
      ->capture_default_str();
  cmd->add_option("--seed", common.seed, "Random seed")->capture_default_str();
  cmd->add_option("--threads", common.threads, "Worker threads")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
}

void AddCase(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--case", in.case_path, "Grid case JSON")
      ->required()
      ->check(CLI::ExistingFile);
}

void AddAtlas(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--atlas", in.atlas_path, "Atlas JSON from `regions`")
      ->required()
      ->check(CLI::ExistingFile);
}

void AddMechanism(CLI::App* cmd, MechanismArgs& m) {
  cmd->add_option("--gamma", m.gamma, "Depolarizing noise level")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--beta", m.beta, "Softmax inverse temperature")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--sigma", m.sigma, "MLP logit noise scale")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--draws", m.draws, "Noise draws averaged per MLP input")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Private region-classification POPF toolkit"};
  app.set_config("--config", "", "TOML or INI file with option values");
  app.require_subcommand(1);

  Common common;
  Inputs in;
  RegionsArgs regions_args;
  TrainArgs train_args;
  MechanismArgs mech_args;
  AuditArgs audit_args;
  EvalArgs eval_args;
  SweepArgs sweep_args;

  CLI::App* regions = app.add_subcommand("regions", "Enumerate critical regions");
  AddCommon(regions, common);
  AddCase(regions, in);
  regions->add_option("--budget", regions_args.budget, "LP samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  regions->add_option("--validation", regions_args.validation,
                      "Coverage samples")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  CLI::App* train = app.add_subcommand("train", "Train a region classifier");
  AddCommon(train, common);
  AddCase(train, in);
  AddAtlas(train, in);
  train->add_option("--model", train_args.kind, "vqc or mlp")
      ->check(CLI::IsMember({"vqc", "mlp"}))
      ->capture_default_str();
  train->add_option("--samples", train_args.samples, "Labeled samples")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--train-fraction", train_args.train_fraction,
                    "Training share of the samples")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  train->add_option("--epochs", train_args.epochs)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--batch", train_args.batch)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--lr", train_args.lr)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--train-beta", train_args.train_beta,
                    "Softmax inverse temperature in the loss")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train->add_option("--qubits", train_args.qubits)
      ->check(CLI::Range(1, 20))
      ->capture_default_str();
  train->add_option("--layers", train_args.layers)
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train->add_option("--scale", train_args.scale,
                    "Encoding radians per normalized theta unit")
      ->capture_default_str();
  train->add_option("--hidden", train_args.hidden, "MLP hidden widths")
      ->delimiter(',')
      ->capture_default_str();

  CLI::App* audit = app.add_subcommand("audit", "Empirical privacy audit");
  AddCommon(audit, common);
  AddCase(audit, in);
  AddAtlas(audit, in);
  audit->add_option("--model", in.model_path, "Model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  AddMechanism(audit, mech_args);
  audit->add_option("--delta", audit_args.delta, "Adjacency radius")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  audit->add_option("--pairs", audit_args.pairs)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  audit->add_option("--lenc", audit_args.lenc, "analytic or empirical")
      ->check(CLI::IsMember({"analytic", "empirical"}))
      ->capture_default_str();

  CLI::App* eval = app.add_subcommand("eval", "Monte-Carlo dispatch metrics");
  AddCommon(eval, common);
  AddCase(eval, in);
  AddAtlas(eval, in);
  eval->add_option("--model", in.model_path, "Model checkpoint or 'oracle'")
      ->required()
      ->check(CLI::ExistingFile | CLI::IsMember({"oracle"}));
  AddMechanism(eval, mech_args);
  eval->add_option("--scenarios", eval_args.scenarios)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval->add_flag("--timing", eval_args.timing,
                 "Also measure per-scenario runtimes (speedup.csv)");

  CLI::App* sweep = app.add_subcommand("sweep", "(gamma, beta) grid for a VQC");
  AddCommon(sweep, common);
  AddCase(sweep, in);
  AddAtlas(sweep, in);
  sweep->add_option("--model", in.model_path, "VQC checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--gammas", sweep_args.gammas)
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--betas", sweep_args.betas)
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--scenarios", sweep_args.scenarios)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--pairs", sweep_args.pairs)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--delta", sweep_args.delta)
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI::App* budget = app.add_subcommand("budget", "Qubit budget and runtime model");
  AddCommon(budget, common);

  CLI::App* report = app.add_subcommand("report", "Summarize outputs in --out-dir");
  AddCommon(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {  // includes --help
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  absl::Status status;
  if (regions->parsed()) {
    status = CmdRegions(app, common, in, regions_args, out);
  } else if (train->parsed()) {
    status = CmdTrain(app, common, in, train_args, out);
  } else if (audit->parsed()) {
    status = CmdAudit(app, common, in, mech_args, audit_args, out);
  } else if (eval->parsed()) {
    status = CmdEval(app, common, in, mech_args, eval_args, out);
  } else if (sweep->parsed()) {
    status = CmdSweep(app, common, in, sweep_args, out);
  } else if (budget->parsed()) {
    status = CmdBudget(app, common, out);
  } else if (report->parsed()) {
    status = CmdReport(app, common, out);
  }
  if (!status.ok()) {
    err << "error: " << status << "\n";
    return status.code() == absl::StatusCode::kInvalidArgument ? kExitUsage
                                                               : kExitFailure;
  }
  return kExitOk;
}

}  // namespace qpopf

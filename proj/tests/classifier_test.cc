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

#include <cmath>
#include <random>

#include "gtest/gtest.h"
#include "qpopf/mechanism.h"
#include "qpopf/privacy_audit.h"
#include "test_support.h"

namespace qpopf {
namespace {

using ::qpopf::testing::Case69Atlas;
using ::qpopf::testing::Case69Lp;
using ::qpopf::testing::ToyLp;

TEST(ClassifierTest, SoftmaxClosedForms) {
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(4, 0.3);
  EXPECT_LE((SoftmaxProbs(flat, 2.0).array() - 0.25).abs().maxCoeff(), 1e-15);
  const Eigen::VectorXd s = Eigen::Vector3d(0.2, 0.9, -0.4);
  const Eigen::VectorXd hard = SoftmaxProbs(s, 1e6);
  EXPECT_NEAR(hard(1), 1.0, 1e-9);
  EXPECT_NEAR(hard(0) + hard(2), 0.0, 1e-9);
  const Eigen::VectorXd two = SoftmaxProbs(Eigen::Vector2d(1.0, 0.0), 1.0);
  const double e = std::exp(1.0);
  EXPECT_NEAR(two(0), e / (e + 1), 1e-15);
  EXPECT_NEAR(two(1), 1 / (e + 1), 1e-15);
  EXPECT_NEAR(two(0), 0.7311, 1e-4);
  EXPECT_LE((LogSoftmax(s, 3.0) - SoftmaxProbs(s, 3.0).array().log().matrix())
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
  // Far past double underflow the log form stays finite.
  EXPECT_NEAR(LogSoftmax(Eigen::Vector2d(0.0, 1.0), 1e4)(0), -1e4, 1e-9);
}

TEST(ClassifierTest, CategoricalSampling) {
  Rng rng = StreamRng(1, 0);
  const Eigen::VectorXd one_hot = Eigen::Vector3d(0, 1, 0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(SampleCategorical(one_hot, rng), 2);

  const int K = 7, draws = 70000;
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(K, 1.0 / K);
  std::vector<int> count(K + 1, 0);
  Rng r2 = StreamRng(2, 0);
  for (int i = 0; i < draws; ++i) ++count[SampleCategorical(uniform, r2)];
  const double sd = std::sqrt(draws * (1.0 / K) * (1.0 - 1.0 / K));
  for (int k = 1; k <= K; ++k) EXPECT_LE(std::abs(count[k] - 10000.0), 5 * sd);

  Rng a = StreamRng(9, 4), b = StreamRng(9, 4);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(SampleCategorical(uniform, a), SampleCategorical(uniform, b));
  }
}

TEST(ClassifierTest, Margin) {
  EXPECT_DOUBLE_EQ(Margin(Eigen::Vector2d(2, 1), 1), 1.0);
  EXPECT_LT(Margin(Eigen::Vector2d(2, 1), 2), 0.0);
}

TEST(ClassifierTest, MlpParameterCounts) {
  EXPECT_EQ(InitMlp(3, {7, 7}, 7, 0).num_params(), 133);
  EXPECT_EQ(InitMlp(3, {7, 7}, 8, 0).num_params(), 140);
}

TEST(ClassifierTest, VqcNoiseLimits) {
  const CircuitConfig circuit = MakeCircuitConfig(5, 6, 3);
  const VqcModel model = InitVqc(circuit, 7, 3);
  EXPECT_TRUE(model.head.bias_free());
  EXPECT_EQ(model.num_params(), 30 + 35);
  const Eigen::VectorXd theta = Eigen::Vector3d(0.3, -0.6, 0.9);
  ASSERT_OK_AND_ASSIGN(VqcOutput full, VqcForward(model, theta, 1.0, 2.0));
  EXPECT_EQ(full.h.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LE((full.p.array() - 1.0 / 7).abs().maxCoeff(), 1e-15);
  ASSERT_OK_AND_ASSIGN(VqcOutput clean, VqcForward(model, theta, 0.0, 2.0));
  ASSERT_OK_AND_ASSIGN(VqcOutput noisy, VqcForward(model, theta, 0.3, 2.0));
  EXPECT_LE((noisy.s - 0.7 * clean.s).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((VqcLogitsFromFeatures(model, clean.h, 0.3) - noisy.s).cwiseAbs().maxCoeff(),
            1e-15);
  for (int k = 1; k <= 7; ++k) {
    EXPECT_NEAR(Margin(noisy.s, k), 0.7 * Margin(clean.s, k), 1e-12);
  }
}

// Toy atlas: two regions split at theta = 0.
RegionAtlas ToyAtlas() {
  EnumerationOptions options;
  options.sampling_budget = 100;
  options.validation_samples = 200;
  return *EnumerateRegions(ToyLp(), options);
}

TEST(ClassifierTest, VqcLearnsToyRegions) {
  const RegionAtlas atlas = ToyAtlas();
  ASSERT_OK_AND_ASSIGN(Dataset data, SampleDataset(atlas, 250, 1));
  auto [train, test] = SplitDataset(data, 0.8);
  ASSERT_EQ(train.size(), 200);
  TrainConfig config;
  config.seed = 2;
  ASSERT_OK_AND_ASSIGN(TrainResult<VqcModel> r,
                       TrainVqc(train, test, MakeCircuitConfig(3, 3, 1), 2, config));
  ASSERT_OK_AND_ASSIGN(double train_acc, Accuracy(r.model, train));
  ASSERT_OK_AND_ASSIGN(double test_acc, Accuracy(r.model, test));
  EXPECT_GE(train_acc, 0.99);
  EXPECT_GE(test_acc, 0.95);
  EXPECT_EQ(static_cast<int>(r.log.size()), config.epochs);
}

TEST(ClassifierTest, MlpLearnsToyRegions) {
  const RegionAtlas atlas = ToyAtlas();
  ASSERT_OK_AND_ASSIGN(Dataset data, SampleDataset(atlas, 250, 1));
  auto [train, test] = SplitDataset(data, 0.8);
  TrainConfig config;
  config.seed = 2;
  ASSERT_OK_AND_ASSIGN(TrainResult<MlpModel> r, TrainMlp(train, test, {7, 7}, 2, config));
  ASSERT_OK_AND_ASSIGN(double train_acc, Accuracy(r.model, train));
  EXPECT_GE(train_acc, 0.99);
}

TEST(ClassifierTest, ZeroEpochsReturnsInitialization) {
  const RegionAtlas atlas = ToyAtlas();
  ASSERT_OK_AND_ASSIGN(Dataset data, SampleDataset(atlas, 50, 1));
  TrainConfig config;
  config.epochs = 0;
  config.seed = 5;
  const CircuitConfig circuit = MakeCircuitConfig(3, 2, 1);
  ASSERT_OK_AND_ASSIGN(TrainResult<VqcModel> v, TrainVqc(data, data, circuit, 2, config));
  EXPECT_EQ(ToJson(v.model).dump(), ToJson(InitVqc(circuit, 2, 5)).dump());
  ASSERT_OK_AND_ASSIGN(TrainResult<MlpModel> m, TrainMlp(data, data, {7, 7}, 2, config));
  EXPECT_EQ(ToJson(m.model).dump(), ToJson(InitMlp(1, {7, 7}, 2, 5)).dump());
}

TEST(ClassifierTest, TrainingIsDeterministic) {
  const RegionAtlas atlas = ToyAtlas();
  ASSERT_OK_AND_ASSIGN(Dataset data, SampleDataset(atlas, 100, 3));
  TrainConfig config;
  config.epochs = 3;
  config.seed = 8;
  ASSERT_OK_AND_ASSIGN(TrainResult<MlpModel> a, TrainMlp(data, data, {7, 7}, 2, config));
  ASSERT_OK_AND_ASSIGN(TrainResult<MlpModel> b, TrainMlp(data, data, {7, 7}, 2, config));
  EXPECT_EQ(ToJson(a.model).dump(), ToJson(b.model).dump());
}

TEST(ClassifierTest, VqcHeadGradientMatchesFiniteDifferences) {
  // One training step on a single sample equals the Adam update built from
  // the loss gradient; here the loss itself is probed directly.
  const CircuitConfig circuit = MakeCircuitConfig(3, 2, 1);
  VqcModel model = InitVqc(circuit, 2, 4);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.4);
  auto loss = [&](const VqcModel& m) {
    VqcOutput out = *VqcForward(m, theta, 0.0, 1.0);
    return -std::log(out.p(0));
  };
  ASSERT_OK_AND_ASSIGN(VqcOutput out, VqcForward(model, theta, 0.0, 1.0));
  Eigen::VectorXd y = Eigen::Vector2d(1, 0);
  const Eigen::MatrixXd analytic = (out.p - y) * out.h.transpose();
  const double h = 1e-6;
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 3; ++j) {
      VqcModel plus = model, minus = model;
      plus.head.W(k, j) += h;
      minus.head.W(k, j) -= h;
      EXPECT_NEAR((loss(plus) - loss(minus)) / (2 * h), analytic(k, j), 1e-8);
    }
  }
}

TEST(ClassifierTest, NoisyMlpMechanism) {
  const MlpModel model = InitMlp(3, {7, 7}, 8, 1);
  const Eigen::VectorXd theta = Eigen::Vector3d(0.1, 0.2, -0.3);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd s, MlpLogits(model, theta));
  NoisyMlpMechanism clean(model, 0.0, 1.5);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd p0, clean.Probabilities(theta));
  EXPECT_LE((p0 - SoftmaxProbs(s, 1.5)).cwiseAbs().maxCoeff(), 1e-15);

  NoisyMlpMechanism loud(model, 1e3, 1.0, 20000, 3);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd pu, loud.Probabilities(theta));
  // With huge noise each draw is nearly one-hot on a uniformly random class.
  const double sd = std::sqrt((1.0 / 8) * (7.0 / 8) / 20000);
  EXPECT_LE((pu.array() - 1.0 / 8).abs().maxCoeff(), 5 * sd);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd lp, loud.LogProbabilities(theta));
  EXPECT_LE((lp.array().exp() - pu.array()).abs().maxCoeff(), 1e-12);

  NoisyMlpMechanism again(model, 1e3, 1.0, 20000, 3);
  ASSERT_OK_AND_ASSIGN(Eigen::VectorXd pu2, again.Probabilities(theta));
  EXPECT_EQ(pu, pu2);
}

TEST(ClassifierTest, SigmaCalibration) {
  ASSERT_OK_AND_ASSIGN(ParametricLp lp, Case69Lp());
  const RegionAtlas& atlas = Case69Atlas(lp);
  ASSERT_OK_AND_ASSIGN(Dataset data, SampleDataset(atlas, 600, 4));
  auto [train, test] = SplitDataset(data, 0.8);
  TrainConfig config;
  config.epochs = 10;
  ASSERT_OK_AND_ASSIGN(TrainResult<MlpModel> r,
                       TrainMlp(train, test, {7, 7}, atlas.num_regions(), config));
  ASSERT_OK_AND_ASSIGN(std::vector<AdjacentPair> pairs,
                       MakeAdjacentPairs(atlas.theta_box, AdjacencySpec{0.05, 60, 2}));
  CalibrationOptions options;
  options.draws = 500;
  ASSERT_OK_AND_ASSIGN(SigmaCalibration base, CalibrateSigma(r.model, 1.0, 1e9, pairs, options));
  EXPECT_TRUE(base.target_above_baseline);
  EXPECT_EQ(base.sigma, 0.0);
  ASSERT_OK_AND_ASSIGN(SigmaCalibration at_base,
                       CalibrateSigma(r.model, 1.0, base.baseline_eps95, pairs, options));
  EXPECT_EQ(at_base.sigma, 0.0);

  ASSERT_OK_AND_ASSIGN(SigmaCalibration hi,
                       CalibrateSigma(r.model, 1.0, 0.6 * base.baseline_eps95, pairs, options));
  ASSERT_OK_AND_ASSIGN(SigmaCalibration lo,
                       CalibrateSigma(r.model, 1.0, 0.3 * base.baseline_eps95, pairs, options));
  EXPECT_NEAR(hi.eps95, 0.6 * base.baseline_eps95, 0.05 * 0.6 * base.baseline_eps95);
  EXPECT_NEAR(lo.eps95, 0.3 * base.baseline_eps95, 0.05 * 0.3 * base.baseline_eps95);
  EXPECT_GT(lo.sigma, hi.sigma);  // smaller target needs more noise
}

TEST(ClassifierTest, ModelJsonRoundTrip) {
  const VqcModel v = InitVqc(MakeCircuitConfig(5, 6, 3), 8, 1);
  ASSERT_OK_AND_ASSIGN(VqcModel v2, VqcModelFromJson(ToJson(v)));
  EXPECT_EQ(ToJson(v2).dump(), ToJson(v).dump());
  const MlpModel m = InitMlp(3, {7, 7}, 8, 1);
  ASSERT_OK_AND_ASSIGN(MlpModel m2, MlpModelFromJson(ToJson(m)));
  EXPECT_EQ(ToJson(m2).dump(), ToJson(m).dump());
  EXPECT_FALSE(MlpModelFromJson(ToJson(v)).ok());
}

}  // namespace
}  // namespace qpopf

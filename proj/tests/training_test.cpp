// Copyright 2026 The Deep Pacejka Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpm/training.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

namespace dpm {
namespace {

Dataset SmallDataset(std::vector<double> mus, int per_mu, int steps,
                     std::uint64_t seed) {
  const VehicleParams p;
  std::vector<DataScenario> sc;
  for (int i = 0; i < per_mu; ++i) {
    for (double mu : mus) sc.push_back({mu, steps, 0});
  }
  return generate_dataset(sc, ExcitationPolicy{}, p, DefaultCoeffs(p), 8, 0.02,
                          seed);
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(DatasetTest, WindowCount) {
  const Dataset ds = SmallDataset({1.0}, 1, 1000, 1);
  EXPECT_EQ(ds.size(), 992u);
  EXPECT_EQ(ds.samples.front().step, 8);
  EXPECT_EQ(ds.samples.back().step, 999);
}

TEST(DatasetTest, SameSeedSameData) {
  const Dataset a = SmallDataset({0.9, 1.0}, 2, 200, 7);
  const Dataset b = SmallDataset({0.9, 1.0}, 2, 200, 7);
  const Dataset c = SmallDataset({0.9, 1.0}, 2, 200, 8);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.samples[i].state, b.samples[i].state);
    EXPECT_EQ(a.samples[i].target, b.samples[i].target);
    EXPECT_EQ(a.samples[i].hist.values, b.samples[i].hist.values);
    differs |= !(a.samples[i].state == c.samples[i].state);
  }
  EXPECT_TRUE(differs);
}

TEST(DatasetTest, TargetsAreSimulatorDerivatives) {
  const Dataset ds = SmallDataset({0.7}, 1, 300, 3);
  const auto truth = apply_friction(ds.meta.coeffs, 0.7);
  for (const auto& s : ds.samples) {
    EXPECT_EQ(s.mu, 0.7);
    EXPECT_EQ(s.target, DynamicPart(state_derivative(s.state, s.control, truth,
                                                     ds.meta.vehicle)));
    EXPECT_EQ(s.tire, tire_state(s.state, s.control.steer, truth,
                                 ds.meta.vehicle));
  }
}

TEST(DatasetTest, HistoryIsThePrecedingSteps) {
  const Dataset ds = SmallDataset({1.0}, 1, 100, 4);
  for (std::size_t i = 1; i < ds.size(); ++i) {
    const auto& prev = ds.samples[i - 1];
    const auto& cur = ds.samples[i];
    // Shifted by one step: the newest history row is the previous sample.
    const std::vector<double> tail(cur.hist.values.end() - kStepFeatures,
                                   cur.hist.values.end());
    const auto f = StepFeatures(prev.state, prev.control);
    EXPECT_EQ(tail, std::vector<double>(f.begin(), f.end()));
  }
}

TEST(DatasetTest, ExcitationStaysWithinActuatorLimits) {
  const VehicleParams p;
  Rng rng(5);
  ExcitationPolicy pol;
  pol.lat_accel_std = 60.0;
  for (const auto& u : ExcitationControls(pol, p, 8.0, 2000, 0.02, rng)) {
    EXPECT_LE(std::abs(u.steer), p.max_steer);
    EXPECT_LE(std::abs(u.accel), p.max_accel);
  }
}

TEST(DatasetTest, SplitKeepsTrajectoriesWhole) {
  const Dataset ds = SmallDataset({0.9, 1.0}, 5, 100, 6);
  const auto [train, val] = SplitByTrajectory(ds, 0.2, 9);
  EXPECT_EQ(train.size() + val.size(), ds.size());
  const auto ti = train.TrajectoryIds();
  const auto vi = val.TrajectoryIds();
  EXPECT_EQ(vi.size(), 2u);
  std::set<int> t(ti.begin(), ti.end());
  for (int id : vi) EXPECT_FALSE(t.count(id));
}

TEST(DatasetTest, FileRoundTrip) {
  const Dataset ds = SmallDataset({0.9, 1.0}, 1, 60, 10);
  const auto dir = std::filesystem::temp_directory_path();
  const auto csv = dir / "dpm_ds_test.csv";
  const auto meta = dir / "dpm_ds_test.json";
  WriteDataset(ds, csv.string(), meta.string());
  const Dataset r = ReadDataset(csv.string(), meta.string());
  ASSERT_EQ(r.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(r.samples[i].state, ds.samples[i].state);
    EXPECT_EQ(r.samples[i].target, ds.samples[i].target);
    EXPECT_EQ(r.samples[i].tire, ds.samples[i].tire);
    EXPECT_EQ(r.samples[i].hist.values, ds.samples[i].hist.values);
  }
  EXPECT_EQ(r.meta.coeffs, ds.meta.coeffs);
  const std::string first = ReadFile(csv);
  WriteDataset(r, csv.string(), meta.string());
  EXPECT_EQ(ReadFile(csv), first);
  std::filesystem::remove(csv);
  std::filesystem::remove(meta);
}

TEST(AdamTest, FirstStepIsSignedLearningRate) {
  Adam adam(3, 0.01, 0.9, 0.999, 1e-8);
  std::vector<double> p{1.0, 2.0, 3.0};
  adam.Step(p, {0.5, -4.0, 0.0});
  EXPECT_NEAR(p[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p[1], 2.0 + 0.01, 1e-9);
  EXPECT_EQ(p[2], 3.0);
}

TEST(AdamTest, MinimizesQuadratic) {
  Adam adam(2, 0.05, 0.9, 0.999, 1e-8);
  std::vector<double> p{3.0, -2.0};
  for (int i = 0; i < 2000; ++i) {
    adam.Step(p, {2 * (p[0] - 1.0), 2 * (p[1] + 0.5)});
  }
  EXPECT_NEAR(p[0], 1.0, 1e-3);
  EXPECT_NEAR(p[1], -0.5, 1e-3);
}

TEST(TrainTest, ZeroEpochsReturnsInitialModel) {
  const Dataset ds = SmallDataset({1.0}, 2, 100, 11);
  TrainConfig c;
  c.epochs = 0;
  c.seed = 3;
  c.hidden = {8};
  const TrainResult r = train(ModelKind::kDpm, ds, c);
  EXPECT_TRUE(r.history.empty());
  EXPECT_EQ(r.model.net, r.initial.net);
  Rng rng(DeriveSeed(c.seed, "init"));
  const Model fresh =
      Model::Create(ModelKind::kDpm, ds.meta.vehicle, 8, 0.02, c.hidden, rng);
  EXPECT_EQ(r.model.net, fresh.net);
}

TEST(TrainTest, SameSeedSameHistory) {
  const Dataset ds = SmallDataset({0.9, 1.0}, 2, 150, 12);
  TrainConfig c;
  c.epochs = 5;
  c.seed = 4;
  c.hidden = {16};
  for (ModelKind kind : {ModelKind::kDpm, ModelKind::kBaseline}) {
    const TrainResult a = train(kind, ds, c);
    const TrainResult b = train(kind, ds, c);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
      EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
      EXPECT_EQ(a.history[i].val_loss, b.history[i].val_loss);
    }
    EXPECT_EQ(a.model.net, b.model.net);
  }
}

TEST(TrainTest, ReturnsBestValidationCheckpoint) {
  const Dataset ds = SmallDataset({0.9, 1.0}, 3, 150, 13);
  TrainConfig c;
  c.epochs = 12;
  c.seed = 5;
  c.hidden = {16};
  c.patience = 3;
  const TrainResult r = train(ModelKind::kBaseline, ds, c);
  double best = 1e300;
  int best_epoch = 0;
  for (const auto& e : r.history) {
    if (e.val_loss < best) {
      best = e.val_loss;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.best_epoch, best_epoch);
  const auto [train_set, val_set] = SplitByTrajectory(ds, c.val_fraction, c.seed);
  EXPECT_DOUBLE_EQ(DatasetLoss(r.model, PreparedBatchData(val_set)), best);
  if (r.early_stopped) {
    EXPECT_EQ(int(r.history.size()), r.best_epoch + c.patience);
  }
}

// With a single friction value the ground truth is one fixed coefficient
// set, so the DPM only has to learn eight constants. Enough trajectories are
// needed for the validation trajectory to stay inside the training states.
TEST(TrainTest, DpmFitsFixedCoefficientData) {
  const Dataset ds = SmallDataset({1.0}, 16, 300, 14);
  TrainConfig c;
  c.epochs = 200;
  c.seed = 6;
  c.hidden = {32, 32};
  c.patience = 200;
  c.learning_rate = 3e-3;
  c.batch_size = 64;
  const TrainResult r = train(ModelKind::kDpm, ds, c);
  double best = 1e300;
  for (const auto& e : r.history) best = std::min(best, e.val_loss);
  EXPECT_LT(best, 1e-4);
}

TEST(TrainTest, NonFiniteLossThrows) {
  Dataset ds = SmallDataset({1.0}, 2, 60, 15);
  ds.samples[3].target[1] = 1e300;
  TrainConfig c;
  c.epochs = 2;
  c.hidden = {4};
  EXPECT_THROW(train(ModelKind::kBaseline, ds, c), DivergedTraining);
}

TEST(TrainTest, RejectsBadConfig) {
  const Dataset ds = SmallDataset({1.0}, 1, 60, 16);
  TrainConfig c;
  c.learning_rate = 1.5;
  EXPECT_THROW(train(ModelKind::kDpm, ds, c), std::invalid_argument);
  EXPECT_THROW(train(ModelKind::kDpm, Dataset{}, TrainConfig{}),
               std::invalid_argument);
}

Model PerfectModel(const Dataset& ds) {
  Rng rng(0);
  const int hidden[] = {4};
  Model m = Model::Create(ModelKind::kDpm, ds.meta.vehicle, ds.meta.history,
                          ds.meta.dt, hidden, rng);
  for (auto& w : m.net.weights) w.setZero();
  for (auto& b : m.net.biases) b.setZero();
  const auto v = ds.meta.coeffs.ToArray();
  for (int i = 0; i < kNumCoeffs; ++i) {
    m.bounds.lo[i] = 0.0;
    m.bounds.hi[i] = 2.0 * v[i];
  }
  return m;
}

TEST(EvaluateTest, PerfectModel) {
  const Dataset ds = SmallDataset({1.0}, 2, 200, 17);
  const EvalMetrics m = evaluate(PerfectModel(ds), ds);
  EXPECT_EQ(m.samples, ds.size());
  EXPECT_EQ(m.rmse_norm_total, 0.0);
  EXPECT_EQ(m.coeff_rel_error, 0.0);
  EXPECT_NEAR(m.corr_fy_f, 1.0, 1e-12);
  EXPECT_NEAR(m.corr_fy_r, 1.0, 1e-12);
  EXPECT_EQ(m.fy_f_mae, 0.0);
}

TEST(EvaluateTest, DeterministicAndConsistentWithLoss) {
  const Dataset ds = SmallDataset({0.9, 1.0}, 2, 150, 18);
  TrainConfig c;
  c.epochs = 3;
  c.hidden = {8};
  const TrainResult r = train(ModelKind::kDpm, ds, c);
  const EvalMetrics a = evaluate(r.model, ds);
  const EvalMetrics b = evaluate(r.model, ds);
  EXPECT_EQ(MetricsToJson(a).dump(), MetricsToJson(b).dump());
  const double loss = DatasetLoss(r.model, PreparedBatchData(ds));
  EXPECT_NEAR(a.rmse_norm_total * a.rmse_norm_total, loss, 1e-12 * (1 + loss));
}

// Evaluation must keep the checkpoint's training-split statistics; refitting
// them on the evaluation set changes the numbers.
TEST(EvaluateTest, UsesTrainingStatistics) {
  const Dataset train_ds = SmallDataset({0.9, 1.0}, 2, 150, 19);
  const Dataset eval_ds = SmallDataset({0.5}, 2, 150, 20);
  TrainConfig c;
  c.epochs = 3;
  c.hidden = {8};
  const Model m = train(ModelKind::kBaseline, train_ds, c).model;
  const Model before = m;
  const EvalMetrics a = evaluate(m, eval_ds);
  EXPECT_EQ(m.input_stats.mean, before.input_stats.mean);
  EXPECT_EQ(m.target_stats.std, before.target_stats.std);
  Model refit = m;
  FitNormalization(refit, eval_ds);
  EXPECT_NE(evaluate(refit, eval_ds).rmse_norm_total, a.rmse_norm_total);
}

TEST(PearsonTest, KnownValues) {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  EXPECT_NEAR(PearsonCorrelation(a, b), 1.0, 1e-15);
  EXPECT_NEAR(PearsonCorrelation(a, c), -1.0, 1e-15);
  const std::vector<double> x{1, 2, 3}, y{1, 3, 2};
  EXPECT_NEAR(PearsonCorrelation(x, y), 0.5, 1e-15);
}

TEST(LossCsvTest, OneRowPerEpoch) {
  const std::vector<EpochLog> h{{1, 0.5, 0.6}, {2, 0.4, 0.5}};
  const auto path = std::filesystem::temp_directory_path() / "dpm_loss.csv";
  WriteLossCsv(h, path.string());
  std::istringstream is(ReadFile(path));
  std::string line;
  int rows = -1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 2);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace dpm

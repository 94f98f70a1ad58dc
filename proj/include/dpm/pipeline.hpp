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

// Glue shared by the command-line tool and the end-to-end checks: dataset
// recipes and the named controller arms.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dpm/config.hpp"
#include "dpm/harness.hpp"
#include "dpm/smppi.hpp"
#include "dpm/training.hpp"

namespace dpm {

enum class DataSplit { kTrain, kEval };

inline std::vector<DataScenario> DatasetScenarios(const DatasetConfig& d,
                                                  DataSplit split) {
  const auto& mus = split == DataSplit::kTrain ? d.train_mu : d.eval_mu;
  const int per_mu = split == DataSplit::kTrain ? d.trajectories_per_mu
                                                : d.eval_trajectories;
  std::vector<DataScenario> out;
  for (int i = 0; i < per_mu; ++i) {
    for (double mu : mus) out.push_back({mu, d.steps, 0});
  }
  return out;
}

inline Dataset GenerateSplit(const RunConfig& c, DataSplit split) {
  const std::uint64_t seed = c.SubSeed(
      split == DataSplit::kTrain ? "dataset/train" : "dataset/eval");
  Dataset ds = generate_dataset(DatasetScenarios(c.dataset, split),
                                c.dataset.excitation, c.vehicle, c.pacejka,
                                c.dataset.history, c.dataset.dt, seed);
  ds.meta.source = split == DataSplit::kTrain ? "train" : "eval";
  return ds;
}

inline bool IsArmName(const std::string& s) {
  return s == "mppi" || s == "smppi" || s == "smppi-risk";
}

// Controller configuration for a named arm. "mppi" samples in action space
// with the noise level matched to the derivative-space arms; only
// "smppi-risk" carries the risk term.
inline SmppiConfig ArmConfig(const std::string& arm, SmppiConfig cfg) {
  if (!IsArmName(arm)) throw std::invalid_argument("unknown arm: " + arm);
  if (arm != "smppi-risk") cfg.w_risk = 0.0;
  if (arm == "mppi") {
    cfg.sampling = Sampling::kAction;
    for (int ch = 0; ch < 2; ++ch) {
      cfg.sigma[ch] = MatchedActionSigma(cfg.sigma[ch], cfg.dt, cfg.horizon);
    }
  }
  return cfg;
}

inline ClosedLoopArm MakeDpmArm(const std::string& arm,
                                std::shared_ptr<const Model> model,
                                const SmppiConfig& base) {
  const SmppiConfig cfg = ArmConfig(arm, base);
  return {arm, [model, cfg](const Scenario& sc) -> std::unique_ptr<Controller> {
            return std::make_unique<SmppiController<DpmRolloutModel>>(
                DpmRolloutModel(*model), cfg, &sc.track, model->history);
          }};
}

// Reference controller with the true coefficients at a fixed, known friction.
inline ClosedLoopArm MakeOracleArm(const VehicleParams& p,
                                   const PacejkaCoeffs& truth, double mu,
                                   const SmppiConfig& base, int history = 8) {
  const SmppiConfig cfg = ArmConfig("smppi", base);
  return {"oracle",
          [=](const Scenario& sc) -> std::unique_ptr<Controller> {
            return std::make_unique<SmppiController<PhysicsRolloutModel>>(
                PhysicsRolloutModel(p, truth, mu), cfg, &sc.track, history);
          }};
}

}  // namespace dpm

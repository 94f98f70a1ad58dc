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

// Small end-to-end run: simulate data at high friction, fit a Deep Pacejka
// Model, read its latent tire coefficients at low friction and drive a few
// seconds of the oval with the risk-aware controller.

#include <cstdio>
#include <vector>

#include "dpm/harness.hpp"
#include "dpm/training.hpp"

int main() {
  const dpm::VehicleParams params;
  const dpm::PacejkaCoeffs truth = dpm::DefaultCoeffs(params);

  std::vector<dpm::DataScenario> train_sc, eval_sc;
  for (int i = 0; i < 6; ++i) {
    train_sc.push_back({0.9, 400, 0});
    train_sc.push_back({1.0, 400, 0});
  }
  for (int i = 0; i < 3; ++i) eval_sc.push_back({0.5, 400, 0});
  const dpm::ExcitationPolicy policy;
  const dpm::Dataset train_ds = dpm::generate_dataset(
      train_sc, policy, params, truth, 8, 0.02, /*seed=*/1);
  const dpm::Dataset eval_ds = dpm::generate_dataset(
      eval_sc, policy, params, truth, 8, 0.02, /*seed=*/2);
  std::printf("train samples %zu, eval samples %zu\n", train_ds.size(),
              eval_ds.size());

  dpm::TrainConfig tc;
  tc.epochs = 30;
  tc.hidden = {32, 32};
  const dpm::TrainResult fit = dpm::train(dpm::ModelKind::kDpm, train_ds, tc);
  std::printf("trained %zu epochs, best validation loss %.3g\n",
              fit.history.size(),
              fit.history[static_cast<std::size_t>(fit.best_epoch - 1)]
                  .val_loss);

  const dpm::EvalMetrics m = dpm::evaluate(fit.model, eval_ds);
  std::printf("mu 0.5: normalized rmse %.3f, latent fy_f correlation %.3f\n",
              m.rmse_norm_total, m.corr_fy_f);

  const dpm::Sample& s = eval_ds.samples[eval_ds.size() / 2];
  const dpm::DpmOutput out =
      dpm::dpm_forward(fit.model, s.hist, s.state, s.control);
  std::printf("latent D_f %.0f N (true %.0f N), fy_f %.0f N (true %.0f N)\n",
              out.coeffs.front.d, 0.5 * truth.front.d, out.tire.fy_f,
              s.tire.fy_f);

  dpm::Scenario sc = dpm::MakeOvalScenario(10.0, 0.5);
  sc.duration = 12.0;
  dpm::SmppiConfig cfg;
  cfg.samples = 64;
  cfg.horizon = 20;
  cfg.w_risk = 1e-5;
  dpm::SmppiController<dpm::DpmRolloutModel> ctrl(
      dpm::DpmRolloutModel(fit.model), cfg, &sc.track);
  const dpm::EpisodeResult ep =
      dpm::run_episode(sc, ctrl, params, truth, /*seed=*/0);
  std::printf("drive: lateral rms %.3f m, max saturation %.3f, diverged %d\n",
              ep.metrics.lateral_rms, ep.metrics.saturation_max,
              ep.metrics.diverged ? 1 : 0);
  return 0;
}

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

// Simulator datasets, Adam training and the open-loop evaluation protocol.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpm/checkpoint.hpp"
#include "dpm/dynamics.hpp"
#include "dpm/models.hpp"
#include "dpm/rng.hpp"

namespace dpm {

class DivergedTraining : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Open-loop excitation: Ornstein-Uhlenbeck noise on steering and
// acceleration, clipped to the actuator limits. The steering amplitude is
// scaled so the neutral-steer lateral acceleration v0^2 * steer / L has
// standard deviation `lat_accel_std` at the initial speed.
struct ExcitationPolicy {
  double lat_accel_std = 10.0;  // m/s^2
  double steer_tau = 0.15;      // s, OU correlation time
  double accel_std = 1.2;       // m/s^2
  double accel_tau = 1.5;       // s
  double v0_min = 8.0;          // m/s
  double v0_max = 16.0;         // m/s
};

struct DataScenario {
  double mu = 1.0;
  int steps = 1000;
  std::uint64_t seed = 0;
};

struct Sample {
  int trajectory = 0;
  int step = 0;
  double mu = 1.0;
  HistoryWindow hist;
  VehicleState state;
  ControlInput control;
  DynDeriv target{};
  TireState tire;

  std::vector<double> Features() const {
    return BuildFeatures(hist, state, control);
  }
};

struct DatasetMeta {
  std::uint64_t seed = 0;
  int history = 8;
  double dt = 0.02;
  VehicleParams vehicle;
  PacejkaCoeffs coeffs;  // friction-free ground truth
  std::vector<double> mu_values;
  int trajectories = 0;
  std::string source = "excitation";
};

struct Dataset {
  DatasetMeta meta;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  std::vector<int> TrajectoryIds() const {
    std::set<int> ids;
    for (const auto& s : samples) ids.insert(s.trajectory);
    return {ids.begin(), ids.end()};
  }

  Dataset Subset(const std::set<int>& trajectories) const {
    Dataset d;
    d.meta = meta;
    for (const auto& s : samples) {
      if (trajectories.count(s.trajectory)) d.samples.push_back(s);
    }
    d.meta.trajectories = static_cast<int>(trajectories.size());
    return d;
  }

  void Append(const Dataset& other) {
    const int offset = samples.empty() ? 0 : TrajectoryIds().back() + 1;
    for (auto s : other.samples) {
      s.trajectory += offset;
      samples.push_back(s);
    }
    meta.trajectories += other.meta.trajectories;
    for (double mu : other.meta.mu_values) {
      if (std::find(meta.mu_values.begin(), meta.mu_values.end(), mu) ==
          meta.mu_values.end()) {
        meta.mu_values.push_back(mu);
      }
    }
  }
};

inline std::vector<ControlInput> ExcitationControls(
    const ExcitationPolicy& pol, const VehicleParams& p, double v0, int steps,
    double dt, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double wheelbase = p.lf + p.lr;
  const double steer_std = pol.lat_accel_std * wheelbase / (v0 * v0);
  double steer = steer_std * normal(rng);
  double accel = pol.accel_std * normal(rng);
  const double a_s = std::exp(-dt / pol.steer_tau);
  const double a_a = std::exp(-dt / pol.accel_tau);
  std::vector<ControlInput> u;
  u.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    u.push_back(ClampControl({steer, accel}, p));
    steer = a_s * steer + steer_std * std::sqrt(1 - a_s * a_s) * normal(rng);
    accel = a_a * accel + pol.accel_std * std::sqrt(1 - a_a * a_a) * normal(rng);
  }
  return u;
}

// Slices one simulated trajectory into windowed samples. A trajectory of N
// controls yields N - H samples: sample i uses steps i-H..i-1 as history.
inline void AppendWindowedSamples(const Trajectory& traj, int trajectory_id,
                                  int history, const VehicleParams& p,
                                  const PacejkaCoeffs& coeffs,
                                  std::vector<Sample>& out) {
  const int n_controls = static_cast<int>(traj.size()) - 1;
  for (int i = history; i < n_controls; ++i) {
    Sample s;
    s.trajectory = trajectory_id;
    s.step = i;
    s.mu = traj[i].mu;
    s.hist.length = history;
    s.hist.values.reserve(static_cast<std::size_t>(history * kStepFeatures));
    for (int k = i - history; k < i; ++k) {
      const auto f = StepFeatures(traj[k].state, traj[k].control);
      s.hist.values.insert(s.hist.values.end(), f.begin(), f.end());
    }
    s.state = traj[i].state;
    s.control = traj[i].control;
    s.target = DynamicPart(state_derivative(
        s.state, s.control, apply_friction(coeffs, s.mu), p));
    s.tire = traj[i].tire;
    out.push_back(std::move(s));
  }
}

inline Dataset generate_dataset(const std::vector<DataScenario>& scenarios,
                                const ExcitationPolicy& policy,
                                const VehicleParams& params,
                                const PacejkaCoeffs& coeffs, int history,
                                double dt, std::uint64_t seed) {
  params.Validate();
  Dataset ds;
  ds.meta.seed = seed;
  ds.meta.history = history;
  ds.meta.dt = dt;
  ds.meta.vehicle = params;
  ds.meta.coeffs = coeffs;
  ds.meta.trajectories = static_cast<int>(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& sc = scenarios[i];
    if (sc.steps <= history || !(sc.mu > 0)) {
      throw std::invalid_argument("generate_dataset: invalid scenario");
    }
    Rng rng(DeriveSeed(DeriveSeed(seed, "trajectory"), sc.seed + i));
    std::uniform_real_distribution<double> v0_dist(policy.v0_min,
                                                   policy.v0_max);
    VehicleState init;
    init.vx = v0_dist(rng);
    const auto controls =
        ExcitationControls(policy, params, init.vx, sc.steps, dt, rng);
    const Trajectory traj = simulate(init, controls, FrictionSchedule(sc.mu),
                                     params, coeffs, dt);
    AppendWindowedSamples(traj, static_cast<int>(i), history, params, coeffs,
                          ds.samples);
    if (std::find(ds.meta.mu_values.begin(), ds.meta.mu_values.end(),
                  sc.mu) == ds.meta.mu_values.end()) {
      ds.meta.mu_values.push_back(sc.mu);
    }
  }
  return ds;
}

// Splits whole trajectories into (train, validation); never splits windows.
inline std::pair<Dataset, Dataset> SplitByTrajectory(const Dataset& ds,
                                                     double val_fraction,
                                                     std::uint64_t seed) {
  std::vector<int> ids = ds.TrajectoryIds();
  Rng rng(DeriveSeed(seed, "split"));
  std::shuffle(ids.begin(), ids.end(), rng);
  std::size_t n_val = static_cast<std::size_t>(
      std::ceil(val_fraction * static_cast<double>(ids.size())));
  if (ids.size() < 2) n_val = 0;
  n_val = std::min(n_val, ids.size() - (ids.empty() ? 0 : 1));
  std::set<int> val(ids.begin(), ids.begin() + n_val);
  std::set<int> train(ids.begin() + n_val, ids.end());
  return {ds.Subset(train), ds.Subset(val)};
}

// ---------------------------------------------------------------------------
// Dataset files: CSV, one row per sample, plus a JSON metadata sidecar.

inline std::string DatasetCsvHeader(int history) {
  std::ostringstream os;
  os << "trajectory,step,mu";
  const char* names[] = {"vx", "vy", "omega", "steer", "accel"};
  for (int k = 0; k < history; ++k) {
    for (const char* n : names) os << ",h" << k << '_' << n;
  }
  os << ",x,y,psi,vx,vy,omega,steer,accel,dvx,dvy,domega,"
        "alpha_f,alpha_r,fy_f,fy_r";
  return os.str();
}

inline json DatasetMetaToJson(const DatasetMeta& m) {
  return {{"seed", m.seed},
          {"H", m.history},
          {"dt", m.dt},
          {"vehicle", VehicleToJson(m.vehicle)},
          {"coeffs", CoeffsToJson(m.coeffs)},
          {"mu_values", m.mu_values},
          {"trajectories", m.trajectories},
          {"source", m.source}};
}

inline DatasetMeta DatasetMetaFromJson(const json& j) {
  DatasetMeta m;
  m.seed = j.at("seed").get<std::uint64_t>();
  m.history = j.at("H").get<int>();
  m.dt = j.at("dt").get<double>();
  m.vehicle = VehicleFromJson(j.at("vehicle"));
  m.coeffs = CoeffsFromJson(j.at("coeffs"));
  m.mu_values = j.at("mu_values").get<std::vector<double>>();
  m.trajectories = j.at("trajectories").get<int>();
  m.source = j.value("source", "excitation");
  return m;
}

inline void WriteDataset(const Dataset& ds, const std::string& csv_path,
                         const std::string& meta_path) {
  std::ofstream os(csv_path);
  if (!os) throw std::runtime_error("cannot write " + csv_path);
  os << std::setprecision(17);
  os << DatasetCsvHeader(ds.meta.history) << '\n';
  for (const auto& s : ds.samples) {
    os << s.trajectory << ',' << s.step << ',' << s.mu;
    for (double v : s.hist.values) os << ',' << v;
    for (double v : s.state.ToArray()) os << ',' << v;
    os << ',' << s.control.steer << ',' << s.control.accel;
    for (double v : s.target) os << ',' << v;
    os << ',' << s.tire.alpha_f << ',' << s.tire.alpha_r << ',' << s.tire.fy_f
       << ',' << s.tire.fy_r << '\n';
  }
  std::ofstream ms(meta_path);
  if (!ms) throw std::runtime_error("cannot write " + meta_path);
  ms << DatasetMetaToJson(ds.meta).dump(2) << '\n';
}

inline Dataset ReadDataset(const std::string& csv_path,
                           const std::string& meta_path) {
  std::ifstream ms(meta_path);
  if (!ms) throw std::runtime_error("cannot read " + meta_path);
  Dataset ds;
  ds.meta = DatasetMetaFromJson(json::parse(ms));
  std::ifstream is(csv_path);
  if (!is) throw std::runtime_error("cannot read " + csv_path);
  std::string line;
  std::getline(is, line);
  if (line != DatasetCsvHeader(ds.meta.history)) {
    throw std::runtime_error("dataset header does not match metadata");
  }
  const int h = ds.meta.history;
  const std::size_t n_cols = 3 + h * kStepFeatures + 6 + 2 + 3 + 4;
  std::vector<double> v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    v.clear();
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = std::min(line.find(',', pos), line.size());
      v.push_back(std::stod(line.substr(pos, next - pos)));
      pos = next + 1;
    }
    if (v.size() != n_cols) {
      throw std::runtime_error("dataset row has wrong column count");
    }
    Sample s;
    std::size_t c = 0;
    s.trajectory = static_cast<int>(v[c++]);
    s.step = static_cast<int>(v[c++]);
    s.mu = v[c++];
    s.hist.length = h;
    s.hist.values.assign(v.begin() + c, v.begin() + c + h * kStepFeatures);
    c += h * kStepFeatures;
    s.state = {v[c], v[c + 1], v[c + 2], v[c + 3], v[c + 4], v[c + 5]};
    c += 6;
    s.control = {v[c], v[c + 1]};
    c += 2;
    s.target = {v[c], v[c + 1], v[c + 2]};
    c += 3;
    s.tire = {v[c], v[c + 1], v[c + 2], v[c + 3]};
    for (double x : v) {
      if (!std::isfinite(x)) throw std::runtime_error("dataset contains NaN");
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

// ---------------------------------------------------------------------------
// Training.

struct TrainConfig {
  int epochs = 200;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int patience = 50;
  double val_fraction = 0.2;
  std::vector<int> hidden = {64, 64};

  void Validate() const {
    if (epochs < 0 || batch_size <= 0 || !(learning_rate > 0) ||
        !(learning_rate < 1) || !(beta1 > 0 && beta1 < 1) ||
        !(beta2 > 0 && beta2 < 1) || !(eps > 0) || patience <= 0 ||
        !(val_fraction >= 0 && val_fraction < 1) || hidden.empty()) {
      throw std::invalid_argument("TrainConfig: invalid values");
    }
  }
};

class Adam {
 public:
  Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

  void Step(std::vector<double>& params, const std::vector<double>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = b1_ * m_[i] + (1 - b1_) * grad[i];
      v_[i] = b2_ * v_[i] + (1 - b2_) * grad[i] * grad[i];
      params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  std::vector<double> m_, v_;
  int t_ = 0;
};

// Columnar view of a dataset, prepared once per training run.
struct PreparedBatchData {
  std::vector<std::vector<double>> features;
  std::vector<VehicleState> states;
  std::vector<ControlInput> controls;
  std::vector<DynDeriv> targets;

  explicit PreparedBatchData(const Dataset& ds) {
    for (const auto& s : ds.samples) {
      features.push_back(s.Features());
      states.push_back(s.state);
      controls.push_back(s.control);
      targets.push_back(s.target);
    }
  }
  std::size_t size() const { return states.size(); }
};

// Mean over samples and targets of the squared error in normalized units.
inline double NormalizedMse(const Model& model,
                            std::span<const DynDeriv> pred,
                            std::span<const DynDeriv> target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (int t = 0; t < kNumTargets; ++t) {
      const double e = (pred[i][t] - target[i][t]) / model.target_stats.std[t];
      sum += e * e;
    }
  }
  return pred.empty() ? 0.0 : sum / double(pred.size() * kNumTargets);
}

// Loss and gradient of one minibatch given by `idx` into `data`.
struct BatchLoss {
  double loss = 0.0;
  MlpGrad grad;
};

inline BatchLoss ComputeBatchLoss(const Model& model,
                                  const PreparedBatchData& data,
                                  std::span<const std::size_t> idx) {
  std::vector<std::vector<double>> f;
  std::vector<VehicleState> s;
  std::vector<ControlInput> u;
  std::vector<DynDeriv> y;
  f.reserve(idx.size());
  for (std::size_t i : idx) {
    f.push_back(data.features[i]);
    s.push_back(data.states[i]);
    u.push_back(data.controls[i]);
    y.push_back(data.targets[i]);
  }
  const auto fwd = model_forward_batch(model, f, s, u);
  BatchLoss out;
  out.loss = NormalizedMse(model, fwd.prediction, y);
  std::vector<DynDeriv> g(idx.size());
  const double scale = 2.0 / double(idx.size() * kNumTargets);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    for (int t = 0; t < kNumTargets; ++t) {
      const double sd = model.target_stats.std[t];
      g[i][t] = scale * (fwd.prediction[i][t] - y[i][t]) / (sd * sd);
    }
  }
  out.grad = model_backward_batch(model, fwd, s, u, g);
  return out;
}

inline double DatasetLoss(const Model& model, const PreparedBatchData& data) {
  if (data.size() == 0) return 0.0;
  constexpr std::size_t kChunk = 2048;
  double sum = 0.0;
  for (std::size_t lo = 0; lo < data.size(); lo += kChunk) {
    const std::size_t hi = std::min(data.size(), lo + kChunk);
    const std::span f(data.features.data() + lo, hi - lo);
    const std::span s(data.states.data() + lo, hi - lo);
    const std::span u(data.controls.data() + lo, hi - lo);
    const auto fwd = model_forward_batch(model, f, s, u);
    sum += NormalizedMse(model, fwd.prediction,
                         std::span(data.targets.data() + lo, hi - lo)) *
           double(hi - lo);
  }
  return sum / double(data.size());
}

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  Model model;  // best-validation weights
  Model initial;
  std::vector<EpochLog> history;
  int best_epoch = 0;
  bool early_stopped = false;
};

// Training statistics: input features and targets over the training split.
inline void FitNormalization(Model& model, const Dataset& train) {
  std::vector<std::vector<double>> feats;
  std::vector<std::vector<double>> targets;
  feats.reserve(train.size());
  targets.reserve(train.size());
  for (const auto& s : train.samples) {
    feats.push_back(s.Features());
    targets.push_back({s.target[0], s.target[1], s.target[2]});
  }
  model.input_stats = NormalizationStats::Fit(feats, model.feature_count());
  model.target_stats = NormalizationStats::Fit(targets, kNumTargets);
}

inline TrainResult train(ModelKind kind, const Dataset& dataset,
                         const TrainConfig& config) {
  config.Validate();
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  auto [train_set, val_set] =
      SplitByTrajectory(dataset, config.val_fraction, config.seed);
  if (val_set.empty()) val_set = train_set;

  Rng init_rng(DeriveSeed(config.seed, "init"));
  Model model = Model::Create(kind, dataset.meta.vehicle, dataset.meta.history,
                              dataset.meta.dt, config.hidden, init_rng);
  FitNormalization(model, train_set);

  TrainResult result;
  result.initial = model;
  result.model = model;
  const PreparedBatchData train_data(train_set);
  const PreparedBatchData val_data(val_set);

  std::vector<double> params = model.net.Flatten();
  Adam adam(params.size(), config.learning_rate, config.beta1, config.beta2,
            config.eps);
  Rng shuffle_rng(DeriveSeed(config.seed, "shuffle"));
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), 0);

  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double train_sum = 0.0;
    for (std::size_t lo = 0; lo < order.size(); lo += config.batch_size) {
      const std::size_t hi =
          std::min(order.size(), lo + std::size_t(config.batch_size));
      const auto batch = ComputeBatchLoss(
          model, train_data, std::span(order.data() + lo, hi - lo));
      if (!std::isfinite(batch.loss)) {
        throw DivergedTraining("training loss became non-finite at epoch " +
                               std::to_string(epoch));
      }
      train_sum += batch.loss * double(hi - lo);
      adam.Step(params, batch.grad.Flatten());
      model.net.Unflatten(params);
    }
    const double val = DatasetLoss(model, val_data);
    if (!std::isfinite(val) || !model.net.AllFinite()) {
      throw DivergedTraining("validation loss became non-finite at epoch " +
                             std::to_string(epoch));
    }
    result.history.push_back(
        {epoch, train_sum / double(order.size()), val});
    if (val < best) {
      best = val;
      since_best = 0;
      result.model = model;
      result.best_epoch = epoch;
    } else if (++since_best >= config.patience) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

inline void WriteLossCsv(const std::vector<EpochLog>& history,
                         const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << std::setprecision(17) << "epoch,train_loss,val_loss\n";
  for (const auto& e : history) {
    os << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
  }
}

// ---------------------------------------------------------------------------
// Evaluation.

inline double PearsonCorrelation(std::span<const double> a,
                                 std::span<const double> b) {
  const std::size_t n = a.size();
  if (n < 2 || b.size() != n) return 0.0;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / double(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / double(n);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return (saa == sbb && a[0] == b[0]) ? 1.0 : 0.0;
  return sab / std::sqrt(saa * sbb);
}

struct EvalMetrics {
  std::size_t samples = 0;
  std::array<double, kNumTargets> rmse{};       // physical units
  std::array<double, kNumTargets> rmse_norm{};  // target-std units
  double rmse_norm_total = 0.0;
  bool has_latent = false;
  double coeff_rel_error = 0.0;  // mean |c - c_true| / |c_true|
  double corr_fy_f = 0.0;
  double corr_fy_r = 0.0;
  double fy_f_mae = 0.0;  // N
};

inline EvalMetrics evaluate(const Model& model, const Dataset& ds) {
  EvalMetrics m;
  m.samples = ds.size();
  if (ds.empty()) return m;
  const PreparedBatchData data(ds);
  std::vector<double> lat_f, lat_r, true_f, true_r;
  std::array<double, kNumTargets> sq{};
  double coeff_err = 0.0;
  constexpr std::size_t kChunk = 2048;
  for (std::size_t lo = 0; lo < data.size(); lo += kChunk) {
    const std::size_t hi = std::min(data.size(), lo + kChunk);
    const auto fwd = model_forward_batch(
        model, std::span(data.features.data() + lo, hi - lo),
        std::span(data.states.data() + lo, hi - lo),
        std::span(data.controls.data() + lo, hi - lo));
    for (std::size_t i = lo; i < hi; ++i) {
      for (int t = 0; t < kNumTargets; ++t) {
        const double e = fwd.prediction[i - lo][t] - data.targets[i][t];
        sq[t] += e * e;
      }
      if (model.kind == ModelKind::kDpm) {
        const DpmOutput& o = fwd.dpm[i - lo];
        const TireState lat = extract_latent_forces(o);
        lat_f.push_back(lat.fy_f);
        lat_r.push_back(lat.fy_r);
        true_f.push_back(ds.samples[i].tire.fy_f);
        true_r.push_back(ds.samples[i].tire.fy_r);
        const auto truth =
            apply_friction(ds.meta.coeffs, ds.samples[i].mu).ToArray();
        const auto pred = o.coeffs.ToArray();
        double e = 0.0;
        for (int j = 0; j < kNumCoeffs; ++j) {
          e += std::abs(pred[j] - truth[j]) / std::abs(truth[j]);
        }
        coeff_err += e / kNumCoeffs;
      }
    }
  }
  double total = 0.0;
  for (int t = 0; t < kNumTargets; ++t) {
    m.rmse[t] = std::sqrt(sq[t] / double(m.samples));
    m.rmse_norm[t] = m.rmse[t] / model.target_stats.std[t];
    total += m.rmse_norm[t] * m.rmse_norm[t];
  }
  m.rmse_norm_total = std::sqrt(total / kNumTargets);
  if (model.kind == ModelKind::kDpm) {
    m.has_latent = true;
    m.coeff_rel_error = coeff_err / double(m.samples);
    m.corr_fy_f = PearsonCorrelation(lat_f, true_f);
    m.corr_fy_r = PearsonCorrelation(lat_r, true_r);
    double mae = 0.0;
    for (std::size_t i = 0; i < lat_f.size(); ++i) {
      mae += std::abs(lat_f[i] - true_f[i]);
    }
    m.fy_f_mae = mae / double(lat_f.size());
  }
  return m;
}

inline json MetricsToJson(const EvalMetrics& m) {
  json j = {{"samples", m.samples},
            {"rmse", {{"dvx", m.rmse[0]}, {"dvy", m.rmse[1]},
                      {"domega", m.rmse[2]}}},
            {"rmse_normalized", {{"dvx", m.rmse_norm[0]},
                                 {"dvy", m.rmse_norm[1]},
                                 {"domega", m.rmse_norm[2]},
                                 {"total", m.rmse_norm_total}}}};
  if (m.has_latent) {
    j["coeff_rel_error"] = m.coeff_rel_error;
    j["latent_force_correlation"] = {{"fy_f", m.corr_fy_f},
                                     {"fy_r", m.corr_fy_r}};
    j["latent_fy_f_mae"] = m.fy_f_mae;
  }
  return j;
}

}  // namespace dpm

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

// Learned vehicle models.
//
// Both models regress the dynamic part of the state derivative
// (dvx, dvy, domega); pose kinematics are exact and never learned.
//
//  * Baseline: the network output is the (normalized) derivative.
//  * Deep Pacejka model (DPM): the network outputs eight raw values that are
//    squashed into plausible magic-formula coefficients and pushed through
//    the bicycle-model physics. The coefficients and the tire forces they
//    imply are the model's latent features.
//
// Network input is the normalized concatenation of the history window
// (H previous steps of vx, vy, omega, steer, accel, oldest first) and the
// same five quantities at the current step.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpm/dynamics.hpp"
#include "dpm/mlp.hpp"

namespace dpm {

inline constexpr int kStepFeatures = 5;
inline constexpr int kNumCoeffs = 8;
inline constexpr int kNumTargets = 3;
inline constexpr double kStdFloor = 1e-6;

enum class ModelKind { kBaseline, kDpm };

inline const char* ToString(ModelKind k) {
  return k == ModelKind::kDpm ? "dpm" : "baseline";
}

inline ModelKind ModelKindFromString(const std::string& s) {
  if (s == "dpm") return ModelKind::kDpm;
  if (s == "baseline") return ModelKind::kBaseline;
  throw std::invalid_argument("unknown model kind '" + s + "'");
}

inline std::array<double, kStepFeatures> StepFeatures(const VehicleState& s,
                                                      const ControlInput& u) {
  return {s.vx, s.vy, s.omega, u.steer, u.accel};
}

// Raw (unnormalized) history: H rows of StepFeatures, oldest first.
struct HistoryWindow {
  int length = 0;
  std::vector<double> values;

  bool IsValid() const {
    return length > 0 &&
           values.size() == static_cast<std::size_t>(length * kStepFeatures);
  }
};

inline int FeatureCount(int history) { return (history + 1) * kStepFeatures; }

inline std::vector<double> BuildFeatures(const HistoryWindow& hist,
                                         const VehicleState& s,
                                         const ControlInput& u) {
  if (!hist.IsValid()) {
    throw DimensionMismatch("history window has wrong length");
  }
  std::vector<double> f(hist.values);
  const auto cur = StepFeatures(s, u);
  f.insert(f.end(), cur.begin(), cur.end());
  return f;
}

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std;

  static NormalizationStats Identity(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
  }

  // Column-wise statistics of `rows` (each of size n); std floored.
  static NormalizationStats Fit(std::span<const std::vector<double>> rows,
                                std::size_t n) {
    NormalizationStats st = Identity(n);
    if (rows.empty()) return st;
    std::fill(st.std.begin(), st.std.end(), 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < n; ++j) st.mean[j] += r[j];
    }
    for (auto& m : st.mean) m /= double(rows.size());
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = r[j] - st.mean[j];
        st.std[j] += d * d;
      }
    }
    for (auto& s : st.std) {
      s = std::max(std::sqrt(s / double(rows.size())), kStdFloor);
    }
    return st;
  }

  std::size_t size() const { return mean.size(); }

  double Normalize(std::size_t j, double v) const {
    return (v - mean[j]) / std[j];
  }
  double Denormalize(std::size_t j, double v) const {
    return mean[j] + std[j] * v;
  }
};

// Per-coefficient bounds, ordered like PacejkaCoeffs::ToArray().
struct CoeffBounds {
  std::array<double, kNumCoeffs> lo{};
  std::array<double, kNumCoeffs> hi{};

  // B in [4, 25], C in [1.2, 2.5], D in [0.1, 1.5] x static axle load,
  // E in [-2, 1].
  static CoeffBounds Default(const VehicleParams& p) {
    const double wheelbase = p.lf + p.lr;
    const double load_f = p.m * kGravity * p.lr / wheelbase;
    const double load_r = p.m * kGravity * p.lf / wheelbase;
    CoeffBounds b;
    b.lo = {4.0, 1.2, 0.1 * load_f, -2.0, 4.0, 1.2, 0.1 * load_r, -2.0};
    b.hi = {25.0, 2.5, 1.5 * load_f, 1.0, 25.0, 2.5, 1.5 * load_r, 1.0};
    return b;
  }

  bool IsValid() const {
    for (int i = 0; i < kNumCoeffs; ++i) {
      if (!(lo[i] < hi[i])) return false;
    }
    return true;
  }

  bool Contains(const PacejkaCoeffs& c) const {
    const auto v = c.ToArray();
    for (int i = 0; i < kNumCoeffs; ++i) {
      if (!(v[i] >= lo[i] && v[i] <= hi[i])) return false;
    }
    return true;
  }

  bool operator==(const CoeffBounds&) const = default;
};

inline double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline PacejkaCoeffs squash_to_bounds(std::span<const double> raw,
                                      const CoeffBounds& bounds) {
  if (raw.size() != kNumCoeffs) {
    throw DimensionMismatch("squash_to_bounds: expected 8 raw values");
  }
  std::array<double, kNumCoeffs> v{};
  for (int i = 0; i < kNumCoeffs; ++i) {
    v[i] = bounds.lo[i] + (bounds.hi[i] - bounds.lo[i]) * Sigmoid(raw[i]);
  }
  return PacejkaCoeffs::FromArray(v);
}

// d coeff_i / d raw_i.
inline std::array<double, kNumCoeffs> squash_jacobian(
    std::span<const double> raw, const CoeffBounds& bounds) {
  std::array<double, kNumCoeffs> j{};
  for (int i = 0; i < kNumCoeffs; ++i) {
    const double s = Sigmoid(raw[i]);
    j[i] = (bounds.hi[i] - bounds.lo[i]) * s * (1.0 - s);
  }
  return j;
}

// Inverse of squash_to_bounds on the open box.
inline std::array<double, kNumCoeffs> unsquash(const PacejkaCoeffs& c,
                                               const CoeffBounds& bounds) {
  const auto v = c.ToArray();
  std::array<double, kNumCoeffs> raw{};
  for (int i = 0; i < kNumCoeffs; ++i) {
    const double p = (v[i] - bounds.lo[i]) / (bounds.hi[i] - bounds.lo[i]);
    raw[i] = std::log(p / (1.0 - p));
  }
  return raw;
}

using DynDeriv = std::array<double, kNumTargets>;  // dvx, dvy, domega

inline DynDeriv DynamicPart(const VehicleState& d) {
  return {d.vx, d.vy, d.omega};
}

// Jacobian of (dvx, dvy, domega) w.r.t. the eight coefficients. Slip angles
// do not depend on the coefficients.
inline std::array<std::array<double, kNumCoeffs>, kNumTargets>
DerivCoeffJacobian(const VehicleState& s, const ControlInput& u,
                   const PacejkaCoeffs& k, const VehicleParams& p) {
  const SlipAngles a = slip_angles(s, u.steer, p);
  const MagicFormulaJet jf = magic_formula_jet(a.front, k.front);
  const MagicFormulaJet jr = magic_formula_jet(a.rear, k.rear);
  const double cos_d = std::cos(u.steer);
  const double sin_d = std::sin(u.steer);
  // d(deriv)/d(fy_f), d(deriv)/d(fy_r)
  const DynDeriv by_front = {-sin_d / p.m, cos_d / p.m, p.lf * cos_d / p.iz};
  const DynDeriv by_rear = {0.0, 1.0 / p.m, -p.lr / p.iz};
  const std::array<double, 4> df = {jf.d_b, jf.d_c, jf.d_d, jf.d_e};
  const std::array<double, 4> dr = {jr.d_b, jr.d_c, jr.d_d, jr.d_e};
  std::array<std::array<double, kNumCoeffs>, kNumTargets> jac{};
  for (int t = 0; t < kNumTargets; ++t) {
    for (int i = 0; i < 4; ++i) {
      jac[t][i] = by_front[t] * df[i];
      jac[t][4 + i] = by_rear[t] * dr[i];
    }
  }
  return jac;
}

// A trained (or freshly initialized) model plus everything needed to run it.
struct Model {
  ModelKind kind = ModelKind::kDpm;
  Mlp net;
  NormalizationStats input_stats;
  NormalizationStats target_stats;
  CoeffBounds bounds;
  int history = 8;
  double dt = 0.02;
  VehicleParams vehicle;

  int feature_count() const { return FeatureCount(history); }

  static std::vector<int> LayerSizes(ModelKind kind, int history,
                                     std::span<const int> hidden) {
    std::vector<int> sizes{FeatureCount(history)};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(kind == ModelKind::kDpm ? kNumCoeffs : kNumTargets);
    return sizes;
  }

  template <typename Rng>
  static Model Create(ModelKind kind, const VehicleParams& vehicle, int history,
                      double dt, std::span<const int> hidden, Rng& rng) {
    Model m;
    m.kind = kind;
    m.vehicle = vehicle;
    m.history = history;
    m.dt = dt;
    m.bounds = CoeffBounds::Default(vehicle);
    m.net = Mlp::Random(LayerSizes(kind, history, hidden), rng);
    m.input_stats = NormalizationStats::Identity(FeatureCount(history));
    m.target_stats = NormalizationStats::Identity(kNumTargets);
    return m;
  }

  // Normalized network input matrix, one column per feature row.
  Eigen::MatrixXd NormalizedInputs(
      std::span<const std::vector<double>> features) const {
    const auto n = static_cast<Eigen::Index>(features.size());
    Eigen::MatrixXd x(feature_count(), n);
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto& f = features[static_cast<std::size_t>(c)];
      if (f.size() != static_cast<std::size_t>(feature_count())) {
        throw DimensionMismatch("feature row has wrong length");
      }
      for (int j = 0; j < feature_count(); ++j) {
        x(j, c) = input_stats.Normalize(static_cast<std::size_t>(j), f[j]);
      }
    }
    return x;
  }
};

struct DpmOutput {
  PacejkaCoeffs coeffs;
  DynDeriv deriv{};
  TireState tire;
};

// Forward state kept for the backward pass of a batch.
struct ModelBatchForward {
  MlpForward net;
  std::vector<DpmOutput> dpm;        // DPM only
  std::vector<DynDeriv> prediction;  // physical units
};

inline ModelBatchForward model_forward_batch(
    const Model& model, std::span<const std::vector<double>> features,
    std::span<const VehicleState> states,
    std::span<const ControlInput> controls) {
  if (features.size() != states.size() || states.size() != controls.size()) {
    throw DimensionMismatch("model_forward_batch: batch sizes differ");
  }
  ModelBatchForward out;
  out.net = mlp_forward(model.net, model.NormalizedInputs(features));
  const auto n = states.size();
  out.prediction.resize(n);
  if (model.kind == ModelKind::kDpm) {
    out.dpm.resize(n);
    std::array<double, kNumCoeffs> raw{};
    for (std::size_t i = 0; i < n; ++i) {
      for (int j = 0; j < kNumCoeffs; ++j) {
        raw[j] = out.net.output(j, static_cast<Eigen::Index>(i));
      }
      DpmOutput& o = out.dpm[i];
      o.coeffs = squash_to_bounds(raw, model.bounds);
      o.tire = tire_state(states[i], controls[i].steer, o.coeffs, model.vehicle);
      o.deriv = DynamicPart(derivative_from_forces(
          states[i], controls[i], o.tire.fy_f, o.tire.fy_r, model.vehicle));
      out.prediction[i] = o.deriv;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (int t = 0; t < kNumTargets; ++t) {
        out.prediction[i][t] = model.target_stats.Denormalize(
            t, out.net.output(t, static_cast<Eigen::Index>(i)));
      }
    }
  }
  return out;
}

// Gradient of a loss w.r.t. the network parameters, given dL/d prediction
// (physical units) for every sample of the batch.
inline MlpGrad model_backward_batch(const Model& model,
                                    const ModelBatchForward& fwd,
                                    std::span<const VehicleState> states,
                                    std::span<const ControlInput> controls,
                                    std::span<const DynDeriv> grad_pred) {
  const auto n = static_cast<Eigen::Index>(grad_pred.size());
  if (fwd.net.output.cols() != n) {
    throw DimensionMismatch("model_backward_batch: batch size mismatch");
  }
  Eigen::MatrixXd grad_out(model.net.output_size(), n);
  if (model.kind == ModelKind::kDpm) {
    std::array<double, kNumCoeffs> raw{};
    for (Eigen::Index c = 0; c < n; ++c) {
      const auto i = static_cast<std::size_t>(c);
      for (int j = 0; j < kNumCoeffs; ++j) raw[j] = fwd.net.output(j, c);
      const auto jac = DerivCoeffJacobian(states[i], controls[i],
                                          fwd.dpm[i].coeffs, model.vehicle);
      const auto sq = squash_jacobian(raw, model.bounds);
      for (int j = 0; j < kNumCoeffs; ++j) {
        double g = 0.0;
        for (int t = 0; t < kNumTargets; ++t) g += grad_pred[i][t] * jac[t][j];
        grad_out(j, c) = g * sq[j];
      }
    }
  } else {
    for (Eigen::Index c = 0; c < n; ++c) {
      for (int t = 0; t < kNumTargets; ++t) {
        grad_out(t, c) =
            grad_pred[static_cast<std::size_t>(c)][t] * model.target_stats.std[t];
      }
    }
  }
  return mlp_backward(model.net, fwd.net.cache, grad_out).grad;
}

inline DpmOutput dpm_forward(const Model& model, const HistoryWindow& hist,
                             const VehicleState& state, const ControlInput& u) {
  if (model.kind != ModelKind::kDpm) {
    throw std::invalid_argument("dpm_forward: model is not a DPM");
  }
  if (hist.length != model.history) {
    throw DimensionMismatch("dpm_forward: history length mismatch");
  }
  const std::vector<std::vector<double>> f{BuildFeatures(hist, state, u)};
  auto fwd = model_forward_batch(model, f, std::span(&state, 1),
                                 std::span(&u, 1));
  return fwd.dpm.front();
}

// Parameter gradient of a scalar loss L for one sample, given dL/d(deriv).
inline MlpGrad dpm_backward(const Model& model, const HistoryWindow& hist,
                            const VehicleState& state, const ControlInput& u,
                            const DynDeriv& grad_deriv) {
  if (model.kind != ModelKind::kDpm) {
    throw std::invalid_argument("dpm_backward: model is not a DPM");
  }
  if (hist.length != model.history) {
    throw DimensionMismatch("dpm_backward: history length mismatch");
  }
  const std::vector<std::vector<double>> f{BuildFeatures(hist, state, u)};
  const auto fwd = model_forward_batch(model, f, std::span(&state, 1),
                                       std::span(&u, 1));
  const std::vector<DynDeriv> g{grad_deriv};
  return model_backward_batch(model, fwd, std::span(&state, 1),
                              std::span(&u, 1), g);
}

inline DynDeriv baseline_forward(const Model& model, const HistoryWindow& hist,
                                 const VehicleState& state,
                                 const ControlInput& u) {
  if (model.kind != ModelKind::kBaseline) {
    throw std::invalid_argument("baseline_forward: model is not a baseline");
  }
  if (hist.length != model.history) {
    throw DimensionMismatch("baseline_forward: history length mismatch");
  }
  const std::vector<std::vector<double>> f{BuildFeatures(hist, state, u)};
  return model_forward_batch(model, f, std::span(&state, 1), std::span(&u, 1))
      .prediction.front();
}

// The latent lateral forces: the magic formula evaluated with the predicted
// coefficients at the current slip angles. No extra parameters involved.
inline TireState extract_latent_forces(const DpmOutput& out) {
  return out.tire;
}

}  // namespace dpm

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

// Smooth MPPI: perturbations are sampled on the time derivative of the
// action sequence and integrated, so every candidate plan is smooth by
// construction. Plain MPPI (perturbations on the actions themselves) shares
// the same machinery and serves as the ablation baseline.
//
// Rollouts use a model that is prepared once per control step from the
// observation (the learned model predicts magic-formula coefficients from
// the measured history) and then integrates the bicycle physics over the
// horizon with those coefficients held fixed.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpm/dynamics.hpp"
#include "dpm/models.hpp"
#include "dpm/rng.hpp"
#include "dpm/track.hpp"

namespace dpm {

inline constexpr double kInfeasibleCost = 1e9;

class AllInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Sampling { kDerivative, kAction };

struct SmppiConfig {
  int samples = 256;  // K
  int horizon = 30;   // T
  double dt = 0.04;   // s, control period and rollout step
  double lambda = 1.0;
  Sampling sampling = Sampling::kDerivative;
  // Noise std per channel (steer, accel). In derivative space the units are
  // rad/s and m/s^3; in action space rad and m/s^2.
  std::array<double, 2> sigma = {0.6, 8.0};
  std::array<double, 2> rate_limit = {1.0, 15.0};  // rad/s, m/s^3
  double w_track = 2.0;
  double w_head = 2.0;
  double w_vel = 0.5;
  double w_rate = 50.0;
  double w_jerk = 100.0;
  double w_risk = 0.0;
  double rho = 0.85;
  // Velocity scheduling.
  double v0 = 5.0;
  double s_min = 0.2;
  double v_ref_cap = std::numeric_limits<double>::infinity();
  unsigned threads = 1;

  void Validate() const {
    if (samples < 2 || horizon < 2 || !(lambda > 0) || !(sigma[0] > 0) ||
        !(sigma[1] > 0) || !(dt > 0) || !(rho > 0 && rho < 1) ||
        !(rate_limit[0] > 0) || !(rate_limit[1] > 0) || !(v0 > 0) ||
        !(s_min > 0 && s_min <= 1) || w_track < 0 || w_head < 0 ||
        w_vel < 0 || w_rate < 0 || w_jerk < 0 || w_risk < 0) {
      throw std::invalid_argument("SmppiConfig: invalid values");
    }
  }
};

// Action-space noise std that matches derivative-space noise `sigma_d`: the
// horizon-averaged variance of an integrated random walk,
// sigma_d^2 dt^2 (T + 1) / 2.
inline double MatchedActionSigma(double sigma_d, double dt, int horizon) {
  return sigma_d * dt * std::sqrt((horizon + 1) / 2.0);
}

struct ActionSequence {
  std::vector<ControlInput> u;
  double dt = 0.04;

  static ActionSequence Constant(int horizon, double dt, ControlInput value) {
    return {std::vector<ControlInput>(static_cast<std::size_t>(horizon), value),
            dt};
  }
  std::size_t size() const { return u.size(); }
};

using Noise = std::vector<std::vector<ControlInput>>;  // K x T

// Per-sample seeding makes the batch independent of evaluation order.
inline Noise sample_perturbations(const SmppiConfig& cfg,
                                  std::array<double, 2> sigma,
                                  std::uint64_t step_seed) {
  Noise noise(static_cast<std::size_t>(cfg.samples),
              std::vector<ControlInput>(static_cast<std::size_t>(cfg.horizon)));
  for (int k = 1; k < cfg.samples; ++k) {
    Rng rng(DeriveSeed(step_seed, static_cast<std::uint64_t>(k)));
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& e : noise[static_cast<std::size_t>(k)]) {
      e.steer = sigma[0] * n(rng);
      e.accel = sigma[1] * n(rng);
    }
  }
  return noise;
}

inline Noise sample_perturbations(const SmppiConfig& cfg,
                                  std::uint64_t step_seed) {
  return sample_perturbations(cfg, cfg.sigma, step_seed);
}

// Clamps to actuator limits and, row to row, to the rate limits.
inline void ClipSequence(std::vector<ControlInput>& u, double dt,
                         const std::array<double, 2>& rate_limit,
                         const VehicleParams& p) {
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (t > 0) {
      const double ds = rate_limit[0] * dt;
      const double da = rate_limit[1] * dt;
      u[t].steer = std::clamp(u[t].steer, u[t - 1].steer - ds,
                              u[t - 1].steer + ds);
      u[t].accel = std::clamp(u[t].accel, u[t - 1].accel - da,
                              u[t - 1].accel + da);
    }
    u[t] = ClampControl(u[t], p);
  }
}

// U_k[t] = clip(U_prev[t] + cumsum(dU_k)[t] * dt).
inline ActionSequence integrate_actions(const ActionSequence& prev,
                                        const std::vector<ControlInput>& du,
                                        const std::array<double, 2>& rate_limit,
                                        const VehicleParams& p) {
  if (du.size() != prev.size()) {
    throw DimensionMismatch("integrate_actions: horizon mismatch");
  }
  ActionSequence out = prev;
  double cs = 0.0, ca = 0.0;
  for (std::size_t t = 0; t < du.size(); ++t) {
    cs += du[t].steer;
    ca += du[t].accel;
    out.u[t].steer += cs * prev.dt;
    out.u[t].accel += ca * prev.dt;
  }
  ClipSequence(out.u, prev.dt, rate_limit, p);
  return out;
}

// Plain MPPI candidate: U_prev + noise, clipped.
inline ActionSequence perturb_actions(const ActionSequence& prev,
                                      const std::vector<ControlInput>& eps,
                                      const std::array<double, 2>& rate_limit,
                                      const VehicleParams& p) {
  if (eps.size() != prev.size()) {
    throw DimensionMismatch("perturb_actions: horizon mismatch");
  }
  ActionSequence out = prev;
  for (std::size_t t = 0; t < eps.size(); ++t) {
    out.u[t].steer += eps[t].steer;
    out.u[t].accel += eps[t].accel;
  }
  ClipSequence(out.u, prev.dt, rate_limit, p);
  return out;
}

inline std::vector<double> mppi_weights(std::span<const double> costs,
                                        double lambda) {
  if (costs.empty()) throw AllInfeasible("mppi_weights: no costs");
  double min_cost = std::numeric_limits<double>::infinity();
  for (double c : costs) {
    if (std::isfinite(c) && c < kInfeasibleCost) min_cost = std::min(min_cost, c);
  }
  if (!std::isfinite(min_cost)) {
    throw AllInfeasible("every rollout is infeasible");
  }
  std::vector<double> w(costs.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    w[k] = std::isfinite(costs[k]) ? std::exp(-(costs[k] - min_cost) / lambda)
                                   : 0.0;
    sum += w[k];
  }
  for (double& x : w) x /= sum;
  return w;
}

inline double EffectiveSampleSize(std::span<const double> w) {
  double s2 = 0.0;
  for (double x : w) s2 += x * x;
  return s2 > 0 ? 1.0 / s2 : 0.0;
}

struct VelocitySchedule {
  std::array<double, 2> sigma{};
  double w_risk = 0.0;
  double v_ref_cap = 0.0;
};

// Steering noise shrinks as v0 / vx above v0 (floored at s_min); the risk
// weight grows as (vx / v0)^2.
inline VelocitySchedule velocity_schedule(double vx, const SmppiConfig& cfg) {
  vx = std::max(vx, 0.0);
  const double s =
      std::clamp(cfg.v0 / std::max(vx, cfg.v0), cfg.s_min, 1.0);
  return {{cfg.sigma[0] * s, cfg.sigma[1]},
          cfg.w_risk * (vx / cfg.v0) * (vx / cfg.v0),
          cfg.v_ref_cap};
}

// What the controller may see: its own measurements and commands. Friction is
// deliberately absent.
struct Observation {
  double t = 0.0;
  VehicleState state;
  HistoryWindow history;           // previous steps at the model's spacing
  ControlInput last_command;       // currently applied
  ControlInput prev_command;       // the one before
};

template <typename M>
concept RolloutModel = requires(const M& m, const Observation& obs) {
  { m.Prepare(obs) } -> std::convertible_to<PacejkaCoeffs>;
  { m.vehicle() } -> std::convertible_to<VehicleParams>;
};

// Learned model: the DPM predicts coefficients from the measured history.
class DpmRolloutModel {
 public:
  explicit DpmRolloutModel(Model model) : model_(std::move(model)) {
    if (model_.kind != ModelKind::kDpm) {
      throw std::invalid_argument("DpmRolloutModel needs a DPM checkpoint");
    }
  }
  PacejkaCoeffs Prepare(const Observation& obs) const {
    return dpm_forward(model_, obs.history, obs.state, obs.last_command).coeffs;
  }
  const VehicleParams& vehicle() const { return model_.vehicle; }
  const Model& model() const { return model_; }

 private:
  Model model_;
};

// Ground-truth physics. With a friction oracle it is the "mu known"
// reference controller model; without one it assumes a fixed mu.
class PhysicsRolloutModel {
 public:
  PhysicsRolloutModel(VehicleParams p, PacejkaCoeffs k, double mu = 1.0,
                      std::function<double(double)> mu_oracle = {})
      : params_(p), coeffs_(k), mu_(mu), oracle_(std::move(mu_oracle)) {}
  PacejkaCoeffs Prepare(const Observation& obs) const {
    return apply_friction(coeffs_, oracle_ ? oracle_(obs.t) : mu_);
  }
  const VehicleParams& vehicle() const { return params_; }

 private:
  VehicleParams params_;
  PacejkaCoeffs coeffs_;
  double mu_;
  std::function<double(double)> oracle_;
};

struct TrackingTask {
  const Track* track = nullptr;
  // Search window (segments) around the previous projection; 0 = global.
  std::size_t window = 8;
};

struct CostTerms {
  double track = 0.0;
  double heading = 0.0;
  double velocity = 0.0;
  double rate = 0.0;
  double jerk = 0.0;
  double risk = 0.0;

  double Total() const {
    return track + heading + velocity + rate + jerk + risk;
  }
};

struct RolloutResult {
  std::vector<VehicleState> states;  // T + 1 predicted states
  std::vector<TireState> tires;      // T latent tire states
  CostTerms terms;
  double cost = 0.0;
  bool infeasible = false;
  double max_saturation = 0.0;  // max |fy| / D over the horizon
};

// Hinge-squared excess of the latent force over rho times predicted peak.
inline double RiskTerm(const TireState& t, const PacejkaCoeffs& k,
                       double rho) {
  const double ef = std::max(0.0, std::abs(t.fy_f) - rho * k.front.d);
  const double er = std::max(0.0, std::abs(t.fy_r) - rho * k.rear.d);
  return ef * ef + er * er;
}

inline double SquaredNorm(const ControlInput& d, const VehicleParams& p) {
  const double s = d.steer / p.max_steer;
  const double a = d.accel / p.max_accel;
  return s * s + a * a;
}

// Rollout cost S_k. Rate and jerk are measured on actuator-normalized
// channels and include the two commands already applied.
inline RolloutResult rollout_cost(const VehicleParams& params,
                                  const PacejkaCoeffs& coeffs,
                                  const Observation& obs,
                                  const ActionSequence& u,
                                  const TrackingTask& task,
                                  const SmppiConfig& cfg, double w_risk,
                                  double v_ref_cap, bool keep_trajectory) {
  RolloutResult r;
  const std::size_t horizon = u.size();
  if (keep_trajectory) {
    r.states.reserve(horizon + 1);
    r.tires.reserve(horizon);
    r.states.push_back(obs.state);
  }
  VehicleState s = obs.state;
  ControlInput prev = obs.last_command;
  ControlInput prev2 = obs.prev_command;
  std::size_t hint = task.track->Project(s.x, s.y, s.psi).segment;
  auto derivative = [&](const ControlInput& a) {
    return [&, a](const VehicleState& x) {
      return state_derivative(x, a, coeffs, params);
    };
  };
  for (std::size_t t = 0; t < horizon; ++t) {
    const ControlInput& a = u.u[t];
    const TireState tire = tire_state(s, a.steer, coeffs, params);
    r.max_saturation =
        std::max({r.max_saturation, std::abs(tire.fy_f) / coeffs.front.d,
                  std::abs(tire.fy_r) / coeffs.rear.d});
    if (w_risk > 0) r.terms.risk += w_risk * RiskTerm(tire, coeffs, cfg.rho);
    s = rk4_integrate(s, u.dt, derivative(a));
    s.vx = std::max(s.vx, 0.0);
    bool bad = !s.IsFinite();
    for (double v : s.ToArray()) bad = bad || std::abs(v) > kDivergenceLimit;
    if (bad) {
      r.infeasible = true;
      r.cost = kInfeasibleCost;
      return r;
    }
    const Reference ref = task.track->Project(s.x, s.y, s.psi, hint, task.window);
    hint = ref.segment;
    const double v_ref = std::min(ref.v_ref, v_ref_cap);
    r.terms.track += cfg.w_track * ref.lateral * ref.lateral;
    r.terms.heading += cfg.w_head * ref.heading_error * ref.heading_error;
    r.terms.velocity += cfg.w_vel * (s.vx - v_ref) * (s.vx - v_ref);
    const ControlInput d1{a.steer - prev.steer, a.accel - prev.accel};
    const ControlInput d2{a.steer - 2 * prev.steer + prev2.steer,
                          a.accel - 2 * prev.accel + prev2.accel};
    r.terms.rate += cfg.w_rate * SquaredNorm(d1, params);
    r.terms.jerk += cfg.w_jerk * SquaredNorm(d2, params);
    prev2 = prev;
    prev = a;
    if (keep_trajectory) {
      r.states.push_back(s);
      r.tires.push_back(tire);
    }
  }
  r.cost = r.terms.Total();
  if (!std::isfinite(r.cost)) {
    r.infeasible = true;
    r.cost = kInfeasibleCost;
  }
  return r;
}

template <RolloutModel M>
RolloutResult rollout_cost(const M& model, const Observation& obs,
                           const ActionSequence& u, const TrackingTask& task,
                           const SmppiConfig& cfg) {
  const VelocitySchedule vs = velocity_schedule(obs.state.vx, cfg);
  return rollout_cost(model.vehicle(), model.Prepare(obs), obs, u, task, cfg,
                      vs.w_risk, vs.v_ref_cap, true);
}

// Result of one weighted update of a plan.
struct PlanUpdate {
  ActionSequence plan;
  std::vector<double> costs;
  std::vector<double> weights;
  std::size_t best = 0;
};

// Generic sampling update: draws candidates around `prev`, scores each with
// `cost(k, candidate)` and returns the weighted average. Candidates are
// convex combinations of clipped sequences, so the average respects the
// actuator limits.
template <typename CostFn>
PlanUpdate SampledPlanUpdate(const ActionSequence& prev,
                             const SmppiConfig& cfg,
                             std::array<double, 2> sigma,
                             const VehicleParams& params,
                             std::uint64_t step_seed, CostFn&& cost) {
  if (static_cast<int>(prev.size()) != cfg.horizon) {
    throw DimensionMismatch("plan length differs from horizon");
  }
  const Noise noise = sample_perturbations(cfg, sigma, step_seed);
  std::vector<ActionSequence> candidates(noise.size());
  std::vector<double> costs(noise.size());
  ParallelFor(noise.size(), cfg.threads, [&](std::size_t k) {
    candidates[k] =
        cfg.sampling == Sampling::kDerivative
            ? integrate_actions(prev, noise[k], cfg.rate_limit, params)
            : perturb_actions(prev, noise[k], cfg.rate_limit, params);
    costs[k] = cost(k, candidates[k]);
  });
  PlanUpdate out;
  out.weights = mppi_weights(costs, cfg.lambda);
  out.plan = prev;
  for (std::size_t t = 0; t < prev.size(); ++t) {
    double s = 0.0, a = 0.0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      s += out.weights[k] * candidates[k].u[t].steer;
      a += out.weights[k] * candidates[k].u[t].accel;
    }
    out.plan.u[t] = {s, a};
  }
  out.best = static_cast<std::size_t>(
      std::min_element(costs.begin(), costs.end()) - costs.begin());
  out.costs = std::move(costs);
  return out;
}

struct SmppiDiagnostics {
  double effective_sample_size = 0.0;
  double min_cost = 0.0;
  CostTerms mean_terms;
  double predicted_saturation = 0.0;  // of the nominal (zero-noise) rollout
  PacejkaCoeffs coeffs;
  int infeasible = 0;
};

struct SmppiStep {
  ControlInput command;
  ActionSequence next;  // already shifted for the next call
  ActionSequence plan;  // unshifted optimized plan
  SmppiDiagnostics diag;
};

inline ActionSequence ShiftPlan(const ActionSequence& plan) {
  ActionSequence out = plan;
  if (out.u.size() > 1) {
    std::rotate(out.u.begin(), out.u.begin() + 1, out.u.end());
    out.u.back() = out.u[out.u.size() - 2];
  }
  return out;
}

template <RolloutModel M>
SmppiStep smppi_step(const M& model, const Observation& obs,
                     const ActionSequence& prev, const TrackingTask& task,
                     const SmppiConfig& cfg, std::uint64_t step_seed) {
  const VehicleParams& params = model.vehicle();
  const PacejkaCoeffs coeffs = model.Prepare(obs);
  const VelocitySchedule vs = velocity_schedule(obs.state.vx, cfg);
  std::vector<CostTerms> terms(static_cast<std::size_t>(cfg.samples));
  double nominal_sat = 0.0;
  int infeasible = 0;
  std::vector<char> flags(static_cast<std::size_t>(cfg.samples), 0);
  const PlanUpdate upd = SampledPlanUpdate(
      prev, cfg, vs.sigma, params, step_seed,
      [&](std::size_t k, const ActionSequence& u) {
        const RolloutResult r = rollout_cost(params, coeffs, obs, u, task, cfg,
                                             vs.w_risk, vs.v_ref_cap, false);
        terms[k] = r.terms;
        flags[k] = r.infeasible;
        if (k == 0) nominal_sat = r.max_saturation;
        return r.cost;
      });
  SmppiStep out;
  out.plan = upd.plan;
  out.command = upd.plan.u.front();
  out.next = ShiftPlan(upd.plan);
  out.diag.effective_sample_size = EffectiveSampleSize(upd.weights);
  out.diag.min_cost = upd.costs[upd.best];
  for (std::size_t k = 0; k < terms.size(); ++k) {
    infeasible += flags[k];
    out.diag.mean_terms.track += terms[k].track;
    out.diag.mean_terms.heading += terms[k].heading;
    out.diag.mean_terms.velocity += terms[k].velocity;
    out.diag.mean_terms.rate += terms[k].rate;
    out.diag.mean_terms.jerk += terms[k].jerk;
    out.diag.mean_terms.risk += terms[k].risk;
  }
  const double n = double(terms.size());
  out.diag.mean_terms.track /= n;
  out.diag.mean_terms.heading /= n;
  out.diag.mean_terms.velocity /= n;
  out.diag.mean_terms.rate /= n;
  out.diag.mean_terms.jerk /= n;
  out.diag.mean_terms.risk /= n;
  out.diag.predicted_saturation = nominal_sat;
  out.diag.coeffs = coeffs;
  out.diag.infeasible = infeasible;
  return out;
}

// Sum over the plan of the squared (actuator-normalized) second difference.
inline double SecondDifferenceEnergy(const ActionSequence& u,
                                     const VehicleParams& p) {
  double e = 0.0;
  for (std::size_t t = 2; t < u.size(); ++t) {
    e += SquaredNorm({u.u[t].steer - 2 * u.u[t - 1].steer + u.u[t - 2].steer,
                      u.u[t].accel - 2 * u.u[t - 1].accel + u.u[t - 2].accel},
                     p);
  }
  return u.size() > 2 ? e / double(u.size() - 2) : 0.0;
}

}  // namespace dpm

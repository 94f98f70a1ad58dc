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

// Closed-loop experiments: scenarios, the episode runner, metrics computed
// from episode logs, and paired comparisons.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpm/checkpoint.hpp"
#include "dpm/dynamics.hpp"
#include "dpm/models.hpp"
#include "dpm/rng.hpp"
#include "dpm/smppi.hpp"
#include "dpm/track.hpp"
#include "dpm/training.hpp"

namespace dpm {

inline constexpr double kDivergenceLateral = 5.0;

enum class TaskKind { kLapTracking, kDoubleLaneChange };

inline const char* ToString(TaskKind k) {
  return k == TaskKind::kLapTracking ? "lap_tracking" : "double_lane_change";
}

inline TaskKind TaskKindFromString(const std::string& s) {
  if (s == "lap_tracking") return TaskKind::kLapTracking;
  if (s == "double_lane_change") return TaskKind::kDoubleLaneChange;
  throw std::invalid_argument("unknown task kind '" + s + "'");
}

enum class FrictionBasis { kTime, kArcLength };

struct Scenario {
  std::string name = "scenario";
  TaskKind task = TaskKind::kLapTracking;
  Track track;
  FrictionSchedule friction;
  FrictionBasis basis = FrictionBasis::kArcLength;
  VehicleState initial;
  double duration = 25.0;  // s
  double dt = 0.02;        // simulator step
  std::uint64_t seed = 0;
  // Uniform perturbation of the initial lateral offset (m), drawn per seed.
  double initial_offset = 0.5;

  void Validate() const {
    const Reference r = nearest_reference(track, initial.x, initial.y);
    if (std::abs(r.lateral) + initial_offset >= 2.0) {
      throw std::invalid_argument("Scenario: initial state too far off track");
    }
    if (!(duration >= 0) || !(dt > 0 && dt <= 0.1)) {
      throw std::invalid_argument("Scenario: invalid duration or dt");
    }
  }
};

// Oval lap; friction drops from 1.0 to `mu_low` half way around.
inline Scenario MakeOvalScenario(double v_ref, double mu_low,
                                 double straight = 60.0, double radius = 30.0) {
  Scenario s;
  s.name = "oval";
  s.task = TaskKind::kLapTracking;
  s.track = MakeOval(straight, radius, v_ref);
  s.friction = FrictionSchedule({{0.0, 1.0}, {0.5 * s.track.length(), mu_low}});
  s.basis = FrictionBasis::kArcLength;
  s.initial = {5.0, 0.0, 0.0, v_ref, 0.0, 0.0};
  s.duration = std::ceil(1.05 * s.track.length() / v_ref);
  return s;
}

inline Scenario MakeLaneChangeScenario(double v_entry, double mu) {
  Scenario s;
  s.name = "double_lane_change";
  s.task = TaskKind::kDoubleLaneChange;
  s.track = MakeDoubleLaneChange(v_entry);
  s.friction = FrictionSchedule(mu);
  s.basis = FrictionBasis::kTime;
  s.initial = {0.0, 0.0, 0.0, v_entry, 0.0, 0.0};
  s.duration = std::floor(150.0 / v_entry * 10.0) / 10.0;
  return s;
}

// ---------------------------------------------------------------------------
// Controllers.

struct ControllerOutput {
  ControlInput command;
  std::optional<PacejkaCoeffs> latent;  // the controller's coefficient belief
  double effective_sample_size = std::numeric_limits<double>::quiet_NaN();
  double min_cost = std::numeric_limits<double>::quiet_NaN();
  double plan_jerk = std::numeric_limits<double>::quiet_NaN();
  CostTerms mean_terms;
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual void Reset(std::uint64_t seed) = 0;
  virtual ControllerOutput Act(const Observation& obs) = 0;
  virtual double period() const = 0;
  virtual int history() const = 0;
};

template <RolloutModel M>
class SmppiController : public Controller {
 public:
  SmppiController(M model, SmppiConfig cfg, const Track* track,
                  int history = 8)
      : model_(std::move(model)), cfg_(cfg), history_(history) {
    cfg_.Validate();
    task_.track = track;
    Reset(0);
  }

  void Reset(std::uint64_t seed) override {
    rng_.seed(DeriveSeed(seed, "smppi"));
    plan_ = ActionSequence::Constant(cfg_.horizon, cfg_.dt, {});
  }

  ControllerOutput Act(const Observation& obs) override {
    const SmppiStep step =
        smppi_step(model_, obs, plan_, task_, cfg_, rng_());
    plan_ = step.next;
    ControllerOutput out;
    out.command = step.command;
    out.latent = step.diag.coeffs;
    out.effective_sample_size = step.diag.effective_sample_size;
    out.min_cost = step.diag.min_cost;
    out.plan_jerk = SecondDifferenceEnergy(step.plan, model_.vehicle());
    out.mean_terms = step.diag.mean_terms;
    return out;
  }

  double period() const override { return cfg_.dt; }
  int history() const override { return history_; }
  const SmppiConfig& config() const { return cfg_; }

 private:
  M model_;
  SmppiConfig cfg_;
  TrackingTask task_;
  int history_;
  Rng rng_;
  ActionSequence plan_;
};

// ---------------------------------------------------------------------------
// Episode logs and metrics.

// One simulator step. Values are stored rounded to the 9 significant digits
// the CSV log carries, so metrics recomputed from the file are identical.
struct LogRow {
  TrajectoryPoint point;
  double lateral = 0.0;
  double v_ref = 0.0;
  double saturation = 0.0;  // true max |fy| / D
  double latent_fy_f = std::numeric_limits<double>::quiet_NaN();
  double latent_fy_r = std::numeric_limits<double>::quiet_NaN();
  double latent_d_f = std::numeric_limits<double>::quiet_NaN();
  double latent_d_r = std::numeric_limits<double>::quiet_NaN();
  double ess = std::numeric_limits<double>::quiet_NaN();
  double min_cost = std::numeric_limits<double>::quiet_NaN();
  double plan_jerk = std::numeric_limits<double>::quiet_NaN();
  int diverged = 0;
};

inline double Round9(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return std::strtod(buf, nullptr);
}

inline void RoundRow(LogRow& r) {
  auto& p = r.point;
  for (double* v :
       {&p.t, &p.state.x, &p.state.y, &p.state.psi, &p.state.vx, &p.state.vy,
        &p.state.omega, &p.control.steer, &p.control.accel, &p.tire.alpha_f,
        &p.tire.alpha_r, &p.tire.fy_f, &p.tire.fy_r, &p.mu, &r.lateral,
        &r.v_ref, &r.saturation, &r.latent_fy_f, &r.latent_fy_r,
        &r.latent_d_f, &r.latent_d_r, &r.ess, &r.min_cost, &r.plan_jerk}) {
    *v = Round9(*v);
  }
}

using EpisodeLog = std::vector<LogRow>;

inline constexpr const char* kEpisodeExtraColumns =
    "lateral,v_ref,saturation,latent_fy_f,latent_fy_r,latent_d_f,latent_d_r,"
    "ess,min_cost,plan_jerk,diverged";

inline void WriteEpisodeCsv(std::ostream& os, const EpisodeLog& log) {
  os << std::setprecision(9);
  os << kTrajectoryCsvHeader << ',' << kEpisodeExtraColumns << '\n';
  for (const auto& r : log) {
    WriteTrajectoryRow(os, r.point);
    os << ',' << r.lateral << ',' << r.v_ref << ',' << r.saturation << ','
       << r.latent_fy_f << ',' << r.latent_fy_r << ',' << r.latent_d_f << ','
       << r.latent_d_r << ',' << r.ess << ',' << r.min_cost << ','
       << r.plan_jerk << ',' << r.diverged << '\n';
  }
}

inline EpisodeLog ReadEpisodeCsv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  if (line != std::string(kTrajectoryCsvHeader) + "," + kEpisodeExtraColumns) {
    throw std::runtime_error("episode log header mismatch");
  }
  EpisodeLog log;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = std::min(line.find(',', pos), line.size());
      v.push_back(std::strtod(line.substr(pos, next - pos).c_str(), nullptr));
      pos = next + 1;
    }
    if (v.size() != 25) throw std::runtime_error("episode log: bad row");
    LogRow r;
    auto& p = r.point;
    p.t = v[0];
    p.state = {v[1], v[2], v[3], v[4], v[5], v[6]};
    p.control = {v[7], v[8]};
    p.tire = {v[9], v[10], v[11], v[12]};
    p.mu = v[13];
    r.lateral = v[14];
    r.v_ref = v[15];
    r.saturation = v[16];
    r.latent_fy_f = v[17];
    r.latent_fy_r = v[18];
    r.latent_d_f = v[19];
    r.latent_d_r = v[20];
    r.ess = v[21];
    r.min_cost = v[22];
    r.plan_jerk = v[23];
    r.diverged = static_cast<int>(v[24]);
    log.push_back(r);
  }
  return log;
}

struct EpisodeMetrics {
  std::size_t steps = 0;
  double lateral_rms = 0.0;
  double lateral_max = 0.0;
  double speed_rms = 0.0;
  double saturation_max = 0.0;
  double time_above_rho = 0.0;
  bool diverged = false;
  double latent_force_error = 0.0;  // mean |latent fy_f - true fy_f|, N
  double command_jerk = 0.0;        // mean squared 2nd difference of commands
  double plan_jerk = 0.0;           // mean over control steps
  double mean_speed = 0.0;
  double progress_time = 0.0;       // simulated time covered
};

// Pure function of the log.
inline EpisodeMetrics ComputeMetrics(const EpisodeLog& log, double rho,
                                     double dt, const VehicleParams& p) {
  EpisodeMetrics m;
  m.steps = log.size();
  if (log.empty()) return m;
  double lat2 = 0, v2 = 0, lat_err = 0, jerk = 0, pj = 0, vsum = 0;
  std::size_t n_lat = 0, n_jerk = 0, n_pj = 0;
  std::vector<ControlInput> cmds;
  for (const auto& r : log) {
    lat2 += r.lateral * r.lateral;
    m.lateral_max = std::max(m.lateral_max, std::abs(r.lateral));
    const double dv = r.point.state.vx - r.v_ref;
    v2 += dv * dv;
    vsum += r.point.state.vx;
    m.saturation_max = std::max(m.saturation_max, r.saturation);
    if (r.saturation > rho) m.time_above_rho += dt;
    if (std::isfinite(r.latent_fy_f)) {
      lat_err += std::abs(r.latent_fy_f - r.point.tire.fy_f);
      ++n_lat;
    }
    if (std::isfinite(r.plan_jerk)) {
      pj += r.plan_jerk;
      ++n_pj;
    }
    if (cmds.empty() || !(cmds.back() == r.point.control)) {
      cmds.push_back(r.point.control);
    }
    m.diverged = m.diverged || r.diverged != 0;
  }
  for (std::size_t i = 2; i < cmds.size(); ++i) {
    jerk += SquaredNorm({cmds[i].steer - 2 * cmds[i - 1].steer + cmds[i - 2].steer,
                         cmds[i].accel - 2 * cmds[i - 1].accel + cmds[i - 2].accel},
                        p);
    ++n_jerk;
  }
  const double n = double(log.size());
  m.lateral_rms = std::sqrt(lat2 / n);
  m.speed_rms = std::sqrt(v2 / n);
  m.mean_speed = vsum / n;
  m.latent_force_error = n_lat ? lat_err / double(n_lat) : 0.0;
  m.command_jerk = n_jerk ? jerk / double(n_jerk) : 0.0;
  m.plan_jerk = n_pj ? pj / double(n_pj) : 0.0;
  m.progress_time = log.back().point.t;
  return m;
}

inline json EpisodeMetricsToJson(const EpisodeMetrics& m) {
  return {{"steps", m.steps},
          {"lateral_rms", m.lateral_rms},
          {"lateral_max", m.lateral_max},
          {"speed_rms", m.speed_rms},
          {"saturation_max", m.saturation_max},
          {"time_above_rho", m.time_above_rho},
          {"diverged", m.diverged},
          {"latent_force_error", m.latent_force_error},
          {"command_jerk", m.command_jerk},
          {"plan_jerk", m.plan_jerk},
          {"mean_speed", m.mean_speed},
          {"progress_time", m.progress_time}};
}

struct EpisodeResult {
  EpisodeLog log;
  EpisodeMetrics metrics;
};

struct EpisodeOptions {
  double rho = 0.85;
  double divergence_lateral = kDivergenceLateral;
};

// Closed loop between the ground-truth simulator (scheduled friction) and a
// controller that only sees states, its own commands and its own model.
inline EpisodeResult run_episode(const Scenario& sc, Controller& controller,
                                 const VehicleParams& params,
                                 const PacejkaCoeffs& truth,
                                 std::uint64_t seed,
                                 const EpisodeOptions& opt = {}) {
  sc.Validate();
  EpisodeResult res;
  const auto steps = static_cast<int>(std::llround(sc.duration / sc.dt));
  if (steps == 0) return res;
  const int every =
      std::max(1, static_cast<int>(std::llround(controller.period() / sc.dt)));
  if (std::abs(every * sc.dt - controller.period()) > 1e-9) {
    throw std::invalid_argument(
        "controller period must be a multiple of the simulator step");
  }
  controller.Reset(DeriveSeed(seed, "controller"));
  Rng sim_rng(DeriveSeed(seed, "simulator"));
  std::uniform_real_distribution<double> offset(-sc.initial_offset,
                                                sc.initial_offset);
  VehicleState s = sc.initial;
  {
    const Reference r0 = nearest_reference(sc.track, s.x, s.y, s.psi);
    const double heading = s.psi - r0.heading_error;
    const double d = offset(sim_rng);
    s.x += -std::sin(heading) * d;
    s.y += std::cos(heading) * d;
  }

  const int h = controller.history();
  std::vector<std::array<double, kStepFeatures>> past;  // per sim step
  ControlInput command{}, prev_command{};
  ControllerOutput out;
  double arc = 0.0;
  double last_progress = nearest_reference(sc.track, s.x, s.y, s.psi).progress;
  for (int i = 0; i < steps; ++i) {
    const double t = i * sc.dt;
    const Reference ref = nearest_reference(sc.track, s.x, s.y, s.psi);
    double dp = ref.progress - last_progress;
    if (sc.track.closed()) {
      const double len = sc.track.length();
      if (dp < -0.5 * len) dp += len;
      if (dp > 0.5 * len) dp -= len;
    }
    arc += dp;
    last_progress = ref.progress;

    if (i % every == 0) {
      Observation obs;
      obs.t = t;
      obs.state = s;
      obs.history.length = h;
      obs.history.values.reserve(static_cast<std::size_t>(h * kStepFeatures));
      for (int k = 0; k < h; ++k) {
        const int idx = static_cast<int>(past.size()) - h + k;
        const auto f =
            idx >= 0 ? past[static_cast<std::size_t>(idx)]
                     : StepFeatures(s, command);
        obs.history.values.insert(obs.history.values.end(), f.begin(),
                                  f.end());
      }
      obs.last_command = command;
      obs.prev_command = prev_command;
      out = controller.Act(obs);
      prev_command = command;
      command = ClampControl(out.command, params);
    }

    const double mu =
        sc.friction.MuAt(sc.basis == FrictionBasis::kTime ? t : arc);
    const PacejkaCoeffs k = apply_friction(truth, mu);
    LogRow row;
    row.point = {t, s, command, tire_state(s, command.steer, k, params), mu};
    row.lateral = ref.lateral;
    row.v_ref = ref.v_ref;
    row.saturation = std::max(std::abs(row.point.tire.fy_f) / k.front.d,
                              std::abs(row.point.tire.fy_r) / k.rear.d);
    if (out.latent) {
      const TireState lat = tire_state(s, command.steer, *out.latent, params);
      row.latent_fy_f = lat.fy_f;
      row.latent_fy_r = lat.fy_r;
      row.latent_d_f = out.latent->front.d;
      row.latent_d_r = out.latent->rear.d;
    }
    if (i % every == 0) {
      row.ess = out.effective_sample_size;
      row.min_cost = out.min_cost;
      row.plan_jerk = out.plan_jerk;
    }
    bool failed = std::abs(ref.lateral) > opt.divergence_lateral;
    VehicleState next;
    if (!failed) {
      try {
        next = rk4_step(s, command, k, params, sc.dt);
        CheckDivergence(next, static_cast<std::size_t>(i + 1));
      } catch (const NumericalDivergence&) {
        failed = true;
      }
    }
    row.diverged = failed ? 1 : 0;
    RoundRow(row);
    res.log.push_back(row);
    if (failed) break;
    past.push_back(StepFeatures(s, command));
    s = next;
  }
  res.metrics = ComputeMetrics(res.log, opt.rho, sc.dt, params);
  return res;
}

// ---------------------------------------------------------------------------
// Paired comparisons.

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

inline Summary Summarize(std::span<const double> v) {
  Summary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= double(v.size());
  for (double x : v) s.std += (x - s.mean) * (x - s.mean);
  s.std = v.size() > 1 ? std::sqrt(s.std / double(v.size() - 1)) : 0.0;
  return s;
}

using ControllerFactory =
    std::function<std::unique_ptr<Controller>(const Scenario&)>;

struct ClosedLoopArm {
  std::string name;
  ControllerFactory make;
};

struct ClosedLoopPairing {
  std::string name;
  ClosedLoopArm a;
  ClosedLoopArm b;
};

struct ArmResult {
  std::string arm;
  std::vector<EpisodeMetrics> episodes;  // one per seed, seed order
};

struct PairingRow {
  std::string pairing;
  std::string scenario;
  ArmResult a;
  ArmResult b;
};

struct ComparisonReport {
  std::vector<PairingRow> rows;
  // Open-loop model comparison rows (optional).
  struct ModelRow {
    std::string name;
    std::string dataset;
    std::vector<double> rmse_a;
    std::vector<double> rmse_b;
  };
  std::vector<ModelRow> model_rows;
};

inline std::vector<EpisodeMetrics> RunArm(const ClosedLoopArm& arm,
                                          const Scenario& sc,
                                          const VehicleParams& params,
                                          const PacejkaCoeffs& truth,
                                          std::span<const std::uint64_t> seeds,
                                          unsigned threads) {
  std::vector<EpisodeMetrics> out(seeds.size());
  ParallelFor(seeds.size(), threads, [&](std::size_t i) {
    auto ctrl = arm.make(sc);
    out[i] = run_episode(sc, *ctrl, params, truth,
                         DeriveSeed(sc.seed, seeds[i]))
                 .metrics;
  });
  return out;
}

inline ComparisonReport compare(const std::vector<ClosedLoopPairing>& pairings,
                                const std::vector<Scenario>& scenarios,
                                std::span<const std::uint64_t> seeds,
                                const VehicleParams& params,
                                const PacejkaCoeffs& truth,
                                unsigned threads = 1) {
  if (seeds.size() < 5) {
    throw std::invalid_argument("compare: need at least 5 seeds per cell");
  }
  ComparisonReport rep;
  for (const auto& p : pairings) {
    for (const auto& sc : scenarios) {
      PairingRow row;
      row.pairing = p.name;
      row.scenario = sc.name;
      row.a = {p.a.name, RunArm(p.a, sc, params, truth, seeds, threads)};
      row.b = {p.b.name, RunArm(p.b, sc, params, truth, seeds, threads)};
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

inline double DivergenceRate(const std::vector<EpisodeMetrics>& eps) {
  if (eps.empty()) return 0.0;
  double n = 0;
  for (const auto& e : eps) n += e.diverged ? 1 : 0;
  return n / double(eps.size());
}

namespace detail {

template <typename F>
Summary SummarizeField(const std::vector<EpisodeMetrics>& eps, F f) {
  std::vector<double> v;
  for (const auto& e : eps) v.push_back(f(e));
  return Summarize(v);
}

struct MetricField {
  const char* name;
  double (*get)(const EpisodeMetrics&);
};

inline const std::vector<MetricField>& MetricFields() {
  static const std::vector<MetricField> fields = {
      {"lateral_rms", [](const EpisodeMetrics& e) { return e.lateral_rms; }},
      {"lateral_max", [](const EpisodeMetrics& e) { return e.lateral_max; }},
      {"speed_rms", [](const EpisodeMetrics& e) { return e.speed_rms; }},
      {"saturation_max",
       [](const EpisodeMetrics& e) { return e.saturation_max; }},
      {"time_above_rho",
       [](const EpisodeMetrics& e) { return e.time_above_rho; }},
      {"diverged",
       [](const EpisodeMetrics& e) { return e.diverged ? 1.0 : 0.0; }},
      {"latent_force_error",
       [](const EpisodeMetrics& e) { return e.latent_force_error; }},
      {"command_jerk", [](const EpisodeMetrics& e) { return e.command_jerk; }},
      {"plan_jerk", [](const EpisodeMetrics& e) { return e.plan_jerk; }},
      {"mean_speed", [](const EpisodeMetrics& e) { return e.mean_speed; }},
  };
  return fields;
}

}  // namespace detail

inline json ReportToJson(const ComparisonReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json arms = json::object();
    for (const ArmResult* arm : {&r.a, &r.b}) {
      json metrics = json::object();
      for (const auto& f : detail::MetricFields()) {
        const Summary s = detail::SummarizeField(arm->episodes, f.get);
        metrics[f.name] = {{"mean", s.mean}, {"std", s.std}};
      }
      json episodes = json::array();
      for (const auto& e : arm->episodes) {
        episodes.push_back(EpisodeMetricsToJson(e));
      }
      arms[arm->arm] = {{"metrics", metrics},
                        {"divergence_rate", DivergenceRate(arm->episodes)},
                        {"episodes", episodes}};
    }
    rows.push_back({{"pairing", r.pairing},
                    {"scenario", r.scenario},
                    {"arm_a", r.a.arm},
                    {"arm_b", r.b.arm},
                    {"seeds", r.a.episodes.size()},
                    {"arms", arms}});
  }
  json models = json::array();
  for (const auto& m : rep.model_rows) {
    const Summary a = Summarize(m.rmse_a);
    const Summary b = Summarize(m.rmse_b);
    models.push_back({{"pairing", m.name},
                      {"dataset", m.dataset},
                      {"rmse_a", {{"mean", a.mean}, {"std", a.std},
                                  {"values", m.rmse_a}}},
                      {"rmse_b", {{"mean", b.mean}, {"std", b.std},
                                  {"values", m.rmse_b}}}});
  }
  return {{"closed_loop", rows}, {"open_loop", models}};
}

// Flat CSV: one line per (pairing, scenario, arm, metric).
inline void WriteReportCsv(const ComparisonReport& rep, std::ostream& os) {
  os << std::setprecision(9) << "pairing,scenario,arm,metric,mean,std\n";
  for (const auto& r : rep.rows) {
    for (const ArmResult* arm : {&r.a, &r.b}) {
      for (const auto& f : detail::MetricFields()) {
        const Summary s = detail::SummarizeField(arm->episodes, f.get);
        os << r.pairing << ',' << r.scenario << ',' << arm->arm << ','
           << f.name << ',' << s.mean << ',' << s.std << '\n';
      }
    }
  }
  for (const auto& m : rep.model_rows) {
    const Summary a = Summarize(m.rmse_a);
    const Summary b = Summarize(m.rmse_b);
    os << m.name << ',' << m.dataset << ",a,rmse_normalized," << a.mean << ','
       << a.std << '\n';
    os << m.name << ',' << m.dataset << ",b,rmse_normalized," << b.mean << ','
       << b.std << '\n';
  }
}

}  // namespace dpm

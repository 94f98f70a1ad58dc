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

// Run configuration: an INI document with a top-level `seed` and the
// sections [vehicle], [pacejka], [dataset], [train], [smppi], [scenario].
// Every key has a default; unknown keys are rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dpm/dynamics.hpp"
#include "dpm/harness.hpp"
#include "dpm/smppi.hpp"
#include "dpm/training.hpp"

namespace dpm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  int history = 8;
  double dt = 0.02;
  std::vector<double> train_mu = {0.9, 1.0};
  int trajectories_per_mu = 25;
  int steps = 1000;
  std::vector<double> eval_mu = {0.5};
  int eval_trajectories = 10;
  ExcitationPolicy excitation;
};

struct ScenarioConfig {
  TaskKind task = TaskKind::kLapTracking;
  double v_ref = 12.0;
  double mu_low = 0.5;      // oval: friction after the mid-lap drop
  double straight = 60.0;
  double radius = 30.0;
  double mu = 0.6;          // lane change: uniform friction
  double duration = 0.0;    // 0: task default
  double initial_offset = 0.5;
  std::string track_file;   // optional CSV overriding the generated track
  int seeds = 10;
  std::string controller = "smppi-risk";
};

// Controller defaults for runs. The risk weight is in 1/N^2 and applies to
// the smppi-risk arm only.
inline SmppiConfig DefaultRunSmppi() {
  SmppiConfig c;
  c.w_risk = 1e-5;
  return c;
}

struct RunConfig {
  std::uint64_t seed = 1;
  VehicleParams vehicle;
  PacejkaCoeffs pacejka;
  DatasetConfig dataset;
  TrainConfig train;
  ModelKind model = ModelKind::kDpm;
  SmppiConfig smppi = DefaultRunSmppi();
  ScenarioConfig scenario;

  std::uint64_t SubSeed(const std::string& name) const {
    return DeriveSeed(seed, name);
  }
};

namespace config_detail {

using boost::property_tree::ptree;

inline std::vector<double> ParseList(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw std::invalid_argument(item);
    }
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument(s);
  return out;
}

inline const std::map<std::string, std::set<std::string>>& Schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"", {"seed"}},
      {"vehicle", {"m", "iz", "lf", "lr", "max_steer", "max_accel"}},
      {"pacejka", {"b_f", "c_f", "d_f", "e_f", "b_r", "c_r", "d_r", "e_r"}},
      {"dataset",
       {"history", "dt", "train_mu", "trajectories_per_mu", "steps", "eval_mu",
        "eval_trajectories", "lat_accel_std", "steer_tau", "accel_std",
        "accel_tau", "v0_min", "v0_max"}},
      {"train",
       {"model", "epochs", "batch_size", "learning_rate", "beta1", "beta2",
        "eps", "patience", "val_fraction", "hidden"}},
      {"smppi",
       {"samples", "horizon", "dt", "lambda", "sampling", "sigma_steer",
        "sigma_accel", "rate_steer", "rate_accel", "w_track", "w_head",
        "w_vel", "w_rate", "w_jerk", "w_risk", "rho", "v0", "s_min",
        "v_ref_cap", "threads"}},
      {"scenario",
       {"task", "v_ref", "mu_low", "straight", "radius", "mu", "duration",
        "initial_offset", "track_file", "seeds", "controller"}},
  };
  return schema;
}

inline void CheckKeys(const ptree& pt) {
  const auto& schema = Schema();
  for (const auto& [name, node] : pt) {
    if (node.empty()) {
      if (!schema.at("").count(name)) {
        throw ConfigError("unknown top-level key '" + name + "'");
      }
      continue;
    }
    const auto it = schema.find(name);
    if (it == schema.end() || name.empty()) {
      throw ConfigError("unknown section [" + name + "]");
    }
    for (const auto& [key, value] : node) {
      if (!it->second.count(key)) {
        throw ConfigError("unknown key '" + key + "' in section [" + name +
                          "]");
      }
    }
  }
}

class Reader {
 public:
  explicit Reader(const ptree& pt) : pt_(pt) {}

  template <typename T>
  void Get(const std::string& path, T& out) const {
    const auto v = pt_.get_optional<std::string>(ptree::path_type(path, '/'));
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        out = *v;
      } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        out = ParseList(*v);
      } else if constexpr (std::is_same_v<T, std::vector<int>>) {
        out.clear();
        for (double d : ParseList(*v)) out.push_back(static_cast<int>(d));
      } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        std::size_t used = 0;
        out = std::stoull(*v, &used);
        if (used != v->size()) throw std::invalid_argument(*v);
      } else if constexpr (std::is_integral_v<T>) {
        std::size_t used = 0;
        out = static_cast<T>(std::stoll(*v, &used));
        if (used != v->size()) throw std::invalid_argument(*v);
      } else {
        std::size_t used = 0;
        out = std::stod(*v, &used);
        if (used != v->size()) throw std::invalid_argument(*v);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("invalid value '" + *v + "' for " + path);
    }
  }

 private:
  const ptree& pt_;
};

}  // namespace config_detail

// `overrides` maps "section.key" (or "seed") to a value and is applied on top
// of the file.
inline RunConfig ParseRunConfig(
    const boost::property_tree::ptree& file_tree,
    const std::map<std::string, std::string>& overrides = {}) {
  using namespace config_detail;
  ptree pt = file_tree;
  for (const auto& [k, v] : overrides) {
    const auto dot = k.find('.');
    const std::string section = dot == std::string::npos ? "" : k.substr(0, dot);
    const std::string key = dot == std::string::npos ? k : k.substr(dot + 1);
    if (section.empty()) {
      pt.put(ptree::path_type(key, '/'), v);
    } else {
      pt.put(ptree::path_type(section + "/" + key, '/'), v);
    }
  }
  CheckKeys(pt);
  const Reader r(pt);
  RunConfig c;
  r.Get("seed", c.seed);

  auto& v = c.vehicle;
  r.Get("vehicle/m", v.m);
  r.Get("vehicle/iz", v.iz);
  r.Get("vehicle/lf", v.lf);
  r.Get("vehicle/lr", v.lr);
  r.Get("vehicle/max_steer", v.max_steer);
  r.Get("vehicle/max_accel", v.max_accel);
  try {
    v.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  c.pacejka = DefaultCoeffs(v);
  auto& k = c.pacejka;
  r.Get("pacejka/b_f", k.front.b);
  r.Get("pacejka/c_f", k.front.c);
  r.Get("pacejka/d_f", k.front.d);
  r.Get("pacejka/e_f", k.front.e);
  r.Get("pacejka/b_r", k.rear.b);
  r.Get("pacejka/c_r", k.rear.c);
  r.Get("pacejka/d_r", k.rear.d);
  r.Get("pacejka/e_r", k.rear.e);
  if (!k.IsValid()) throw ConfigError("[pacejka] coefficients out of range");

  auto& d = c.dataset;
  r.Get("dataset/history", d.history);
  r.Get("dataset/dt", d.dt);
  r.Get("dataset/train_mu", d.train_mu);
  r.Get("dataset/trajectories_per_mu", d.trajectories_per_mu);
  r.Get("dataset/steps", d.steps);
  r.Get("dataset/eval_mu", d.eval_mu);
  r.Get("dataset/eval_trajectories", d.eval_trajectories);
  r.Get("dataset/lat_accel_std", d.excitation.lat_accel_std);
  r.Get("dataset/steer_tau", d.excitation.steer_tau);
  r.Get("dataset/accel_std", d.excitation.accel_std);
  r.Get("dataset/accel_tau", d.excitation.accel_tau);
  r.Get("dataset/v0_min", d.excitation.v0_min);
  r.Get("dataset/v0_max", d.excitation.v0_max);
  if (d.history <= 0 || !(d.dt > 0 && d.dt <= 0.1) ||
      d.trajectories_per_mu < 0 || d.eval_trajectories < 0 ||
      d.steps <= d.history || !(d.excitation.v0_min > 0) ||
      !(d.excitation.v0_max >= d.excitation.v0_min) ||
      !(d.excitation.steer_tau > 0) || !(d.excitation.accel_tau > 0)) {
    throw ConfigError("[dataset] invalid values");
  }
  for (double mu : d.train_mu) {
    if (!(mu > 0 && mu <= 1.5)) throw ConfigError("[dataset] mu out of range");
  }
  for (double mu : d.eval_mu) {
    if (!(mu > 0 && mu <= 1.5)) throw ConfigError("[dataset] mu out of range");
  }

  auto& t = c.train;
  std::string model = ToString(c.model);
  r.Get("train/model", model);
  try {
    c.model = ModelKindFromString(model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  r.Get("train/epochs", t.epochs);
  r.Get("train/batch_size", t.batch_size);
  r.Get("train/learning_rate", t.learning_rate);
  r.Get("train/beta1", t.beta1);
  r.Get("train/beta2", t.beta2);
  r.Get("train/eps", t.eps);
  r.Get("train/patience", t.patience);
  r.Get("train/val_fraction", t.val_fraction);
  r.Get("train/hidden", t.hidden);
  t.seed = c.SubSeed("train");
  try {
    t.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[train] ") + e.what());
  }

  auto& s = c.smppi;
  std::string sampling = "derivative";
  r.Get("smppi/samples", s.samples);
  r.Get("smppi/horizon", s.horizon);
  r.Get("smppi/dt", s.dt);
  r.Get("smppi/lambda", s.lambda);
  r.Get("smppi/sampling", sampling);
  if (sampling == "derivative") {
    s.sampling = Sampling::kDerivative;
  } else if (sampling == "action") {
    s.sampling = Sampling::kAction;
  } else {
    throw ConfigError("[smppi] sampling must be 'derivative' or 'action'");
  }
  r.Get("smppi/sigma_steer", s.sigma[0]);
  r.Get("smppi/sigma_accel", s.sigma[1]);
  r.Get("smppi/rate_steer", s.rate_limit[0]);
  r.Get("smppi/rate_accel", s.rate_limit[1]);
  r.Get("smppi/w_track", s.w_track);
  r.Get("smppi/w_head", s.w_head);
  r.Get("smppi/w_vel", s.w_vel);
  r.Get("smppi/w_rate", s.w_rate);
  r.Get("smppi/w_jerk", s.w_jerk);
  r.Get("smppi/w_risk", s.w_risk);
  r.Get("smppi/rho", s.rho);
  r.Get("smppi/v0", s.v0);
  r.Get("smppi/s_min", s.s_min);
  r.Get("smppi/v_ref_cap", s.v_ref_cap);
  r.Get("smppi/threads", s.threads);
  try {
    s.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[smppi] ") + e.what());
  }

  auto& sc = c.scenario;
  std::string task = ToString(sc.task);
  r.Get("scenario/task", task);
  try {
    sc.task = TaskKindFromString(task);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  r.Get("scenario/v_ref", sc.v_ref);
  r.Get("scenario/mu_low", sc.mu_low);
  r.Get("scenario/straight", sc.straight);
  r.Get("scenario/radius", sc.radius);
  r.Get("scenario/mu", sc.mu);
  r.Get("scenario/duration", sc.duration);
  r.Get("scenario/initial_offset", sc.initial_offset);
  r.Get("scenario/track_file", sc.track_file);
  r.Get("scenario/seeds", sc.seeds);
  r.Get("scenario/controller", sc.controller);
  if (!(sc.v_ref > 0) || !(sc.mu_low > 0) || !(sc.mu > 0) ||
      !(sc.straight > 0) || !(sc.radius > 0) || sc.duration < 0 ||
      sc.initial_offset < 0 || sc.seeds <= 0) {
    throw ConfigError("[scenario] invalid values");
  }
  if (sc.controller != "mppi" && sc.controller != "smppi" &&
      sc.controller != "smppi-risk") {
    throw ConfigError("[scenario] controller must be mppi, smppi or smppi-risk");
  }
  if (!sc.track_file.empty() && !std::filesystem::exists(sc.track_file)) {
    throw ConfigError("track file not found: " + sc.track_file);
  }
  return c;
}

inline RunConfig LoadRunConfig(
    const std::string& path,
    const std::map<std::string, std::string>& overrides = {}) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("config file not found: " + path);
  }
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse config: ") + e.what());
  }
  return ParseRunConfig(pt, overrides);
}

// Default-valued document listing every key; used by `dpm config`.
inline std::string DefaultConfigText() {
  const RunConfig c;
  const PacejkaCoeffs k = DefaultCoeffs(c.vehicle);
  std::ostringstream os;
  os << std::setprecision(10);
  os << "seed = " << c.seed << "\n\n[vehicle]\n"
     << "m = " << c.vehicle.m << "\niz = " << c.vehicle.iz
     << "\nlf = " << c.vehicle.lf << "\nlr = " << c.vehicle.lr
     << "\nmax_steer = " << c.vehicle.max_steer
     << "\nmax_accel = " << c.vehicle.max_accel << "\n\n[pacejka]\n"
     << "b_f = " << k.front.b << "\nc_f = " << k.front.c
     << "\nd_f = " << k.front.d << "\ne_f = " << k.front.e
     << "\nb_r = " << k.rear.b << "\nc_r = " << k.rear.c
     << "\nd_r = " << k.rear.d << "\ne_r = " << k.rear.e << "\n\n[dataset]\n";
  const auto& d = c.dataset;
  auto list = [](const std::vector<double>& v) {
    std::ostringstream s;
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  os << "history = " << d.history << "\ndt = " << d.dt
     << "\ntrain_mu = " << list(d.train_mu)
     << "\ntrajectories_per_mu = " << d.trajectories_per_mu
     << "\nsteps = " << d.steps << "\neval_mu = " << list(d.eval_mu)
     << "\neval_trajectories = " << d.eval_trajectories
     << "\nlat_accel_std = " << d.excitation.lat_accel_std
     << "\nsteer_tau = " << d.excitation.steer_tau
     << "\naccel_std = " << d.excitation.accel_std
     << "\naccel_tau = " << d.excitation.accel_tau
     << "\nv0_min = " << d.excitation.v0_min
     << "\nv0_max = " << d.excitation.v0_max << "\n\n[train]\n";
  const auto& t = c.train;
  os << "model = dpm\nepochs = " << t.epochs
     << "\nbatch_size = " << t.batch_size
     << "\nlearning_rate = " << t.learning_rate << "\nbeta1 = " << t.beta1
     << "\nbeta2 = " << t.beta2 << "\neps = " << t.eps
     << "\npatience = " << t.patience
     << "\nval_fraction = " << t.val_fraction << "\nhidden = ";
  for (std::size_t i = 0; i < t.hidden.size(); ++i) {
    os << (i ? "," : "") << t.hidden[i];
  }
  const auto& s = c.smppi;
  os << "\n\n[smppi]\nsamples = " << s.samples << "\nhorizon = " << s.horizon
     << "\ndt = " << s.dt << "\nlambda = " << s.lambda
     << "\nsampling = derivative\nsigma_steer = " << s.sigma[0]
     << "\nsigma_accel = " << s.sigma[1] << "\nrate_steer = " << s.rate_limit[0]
     << "\nrate_accel = " << s.rate_limit[1] << "\nw_track = " << s.w_track
     << "\nw_head = " << s.w_head << "\nw_vel = " << s.w_vel
     << "\nw_rate = " << s.w_rate << "\nw_jerk = " << s.w_jerk
     << "\nw_risk = " << s.w_risk << "\nrho = " << s.rho << "\nv0 = " << s.v0
     << "\ns_min = " << s.s_min << "\nv_ref_cap = " << s.v_ref_cap
     << "\nthreads = " << s.threads;
  const auto& sc = c.scenario;
  os << "\n\n[scenario]\ntask = " << ToString(sc.task)
     << "\nv_ref = " << sc.v_ref << "\nmu_low = " << sc.mu_low
     << "\nstraight = " << sc.straight << "\nradius = " << sc.radius
     << "\nmu = " << sc.mu << "\nduration = " << sc.duration
     << "\ninitial_offset = " << sc.initial_offset
     << "\nseeds = " << sc.seeds << "\ncontroller = " << sc.controller
     << "\n";
  return os.str();
}

inline Scenario BuildScenario(const RunConfig& c) {
  const auto& sc = c.scenario;
  Scenario s = sc.task == TaskKind::kLapTracking
                   ? MakeOvalScenario(sc.v_ref, sc.mu_low, sc.straight,
                                      sc.radius)
                   : MakeLaneChangeScenario(sc.v_ref, sc.mu);
  if (!sc.track_file.empty()) {
    s.track = ReadTrackCsv(sc.track_file, sc.task == TaskKind::kLapTracking);
    const auto& w0 = s.track.waypoints()[0];
    const auto& w1 = s.track.waypoints()[1];
    s.initial.x = w0.x;
    s.initial.y = w0.y;
    s.initial.psi = std::atan2(w1.y - w0.y, w1.x - w0.x);
    if (sc.task == TaskKind::kLapTracking) {
      s.friction = FrictionSchedule(
          {{0.0, 1.0}, {0.5 * s.track.length(), sc.mu_low}});
    }
  }
  if (sc.duration > 0) s.duration = sc.duration;
  s.initial_offset = sc.initial_offset;
  s.seed = c.SubSeed("scenario");
  return s;
}

}  // namespace dpm

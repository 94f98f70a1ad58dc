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

// Dynamic bicycle model with lateral magic-formula tires.
//
// The longitudinal channel is driven directly by the commanded acceleration
// (no longitudinal tire model, no load transfer). Friction scales the peak
// force D of both axles. The same functions are the physics layer of the
// hybrid model in models.hpp, so simulator and learned model share one code
// path.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpm {

inline constexpr double kGravity = 9.81;
// Slip-angle denominators use max(vx, kSlipMinSpeed).
inline constexpr double kSlipMinSpeed = 0.5;
inline constexpr double kDivergenceLimit = 1e6;

class NumericalDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct VehicleParams {
  double m = 1500.0;      // kg
  double iz = 2500.0;     // kg m^2
  double lf = 1.2;        // m
  double lr = 1.4;        // m
  double max_steer = 0.45;  // rad
  double max_accel = 4.0;   // m/s^2

  void Validate() const {
    if (!(m > 0 && iz > 0 && lf > 0 && lr > 0 && max_steer > 0 &&
          max_accel > 0)) {
      throw std::invalid_argument("VehicleParams: all fields must be > 0");
    }
  }
};

// Magic-formula coefficients of one axle.
struct AxleCoeffs {
  double b = 10.0;
  double c = 1.9;
  double d = 1.0;
  double e = 0.97;

  bool operator==(const AxleCoeffs&) const = default;
};

struct PacejkaCoeffs {
  AxleCoeffs front;
  AxleCoeffs rear;

  bool operator==(const PacejkaCoeffs&) const = default;

  // Flat order used by the networks: (B, C, D, E) front then rear.
  std::array<double, 8> ToArray() const {
    return {front.b, front.c, front.d, front.e,
            rear.b,  rear.c,  rear.d,  rear.e};
  }
  static PacejkaCoeffs FromArray(std::span<const double, 8> v) {
    return {{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]}};
  }

  bool IsValid() const {
    auto ok = [](const AxleCoeffs& a) {
      return a.b > 0 && a.c > 1 && a.c < 3 && a.d > 0 && a.e <= 1;
    };
    return ok(front) && ok(rear);
  }
};

// Representative passenger-car defaults: B=10, C=1.9, E=0.97 and a peak
// force of 0.9 times the static axle load.
inline PacejkaCoeffs DefaultCoeffs(const VehicleParams& p) {
  const double wheelbase = p.lf + p.lr;
  const double load_front = p.m * kGravity * p.lr / wheelbase;
  const double load_rear = p.m * kGravity * p.lf / wheelbase;
  return {{10.0, 1.9, 0.9 * load_front, 0.97},
          {10.0, 1.9, 0.9 * load_rear, 0.97}};
}

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  bool operator==(const VehicleState&) const = default;

  std::array<double, 6> ToArray() const { return {x, y, psi, vx, vy, omega}; }

  bool IsFinite() const {
    for (double v : ToArray()) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }
};

struct ControlInput {
  double steer = 0.0;  // rad
  double accel = 0.0;  // m/s^2

  bool operator==(const ControlInput&) const = default;
};

inline ControlInput ClampControl(const ControlInput& u, const VehicleParams& p) {
  return {std::clamp(u.steer, -p.max_steer, p.max_steer),
          std::clamp(u.accel, -p.max_accel, p.max_accel)};
}

struct TireState {
  double alpha_f = 0.0;
  double alpha_r = 0.0;
  double fy_f = 0.0;
  double fy_r = 0.0;

  bool operator==(const TireState&) const = default;
};

// Piecewise-constant friction scale over a breakpoint key (time in seconds or
// arc length in meters, depending on the owner).
class FrictionSchedule {
 public:
  struct Breakpoint {
    double key;
    double mu;
  };

  FrictionSchedule() : points_{{0.0, 1.0}} {}
  explicit FrictionSchedule(double mu) : FrictionSchedule({{0.0, mu}}) {}
  explicit FrictionSchedule(std::vector<Breakpoint> points)
      : points_(std::move(points)) {
    if (points_.empty()) {
      throw std::invalid_argument("FrictionSchedule: no breakpoints");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!(points_[i].mu > 0.0)) {
        throw std::invalid_argument("FrictionSchedule: mu must be > 0");
      }
      if (i > 0 && !(points_[i].key > points_[i - 1].key)) {
        throw std::invalid_argument(
            "FrictionSchedule: breakpoints must be strictly increasing");
      }
    }
  }

  // Value of the last breakpoint at or before `key`; the first value before
  // the first breakpoint.
  double MuAt(double key) const {
    double mu = points_.front().mu;
    for (const auto& p : points_) {
      if (p.key <= key) mu = p.mu;
      else break;
    }
    return mu;
  }

  std::span<const Breakpoint> points() const { return points_; }

 private:
  std::vector<Breakpoint> points_;
};

struct SlipAngles {
  double front;
  double rear;
};

inline SlipAngles slip_angles(const VehicleState& s, double steer,
                              const VehicleParams& p) {
  const double vx = std::max(s.vx, kSlipMinSpeed);
  return {steer - std::atan2(s.vy + p.lf * s.omega, vx),
          -std::atan2(s.vy - p.lr * s.omega, vx)};
}

inline double magic_formula(double alpha, double b, double c, double d,
                            double e) {
  const double x = b * alpha;
  return d * std::sin(c * std::atan(x - e * (x - std::atan(x))));
}

inline double magic_formula(double alpha, const AxleCoeffs& k) {
  return magic_formula(alpha, k.b, k.c, k.d, k.e);
}

// Value and partial derivatives of the magic formula.
struct MagicFormulaJet {
  double fy;
  double d_alpha;
  double d_b;
  double d_c;
  double d_d;
  double d_e;
};

inline MagicFormulaJet magic_formula_jet(double alpha, const AxleCoeffs& k) {
  const double x = k.b * alpha;
  const double atan_x = std::atan(x);
  const double phi = x - k.e * (x - atan_x);
  const double atan_phi = std::atan(phi);
  const double sin_term = std::sin(k.c * atan_phi);
  const double cos_term = std::cos(k.c * atan_phi);
  const double dfy_dphi = k.d * cos_term * k.c / (1.0 + phi * phi);
  const double dphi_dx = 1.0 - k.e * x * x / (1.0 + x * x);
  return {k.d * sin_term,
          dfy_dphi * dphi_dx * k.b,
          dfy_dphi * dphi_dx * alpha,
          k.d * cos_term * atan_phi,
          sin_term,
          -dfy_dphi * (x - atan_x)};
}

inline PacejkaCoeffs apply_friction(PacejkaCoeffs coeffs, double mu) {
  coeffs.front.d *= mu;
  coeffs.rear.d *= mu;
  return coeffs;
}

inline TireState tire_state(const VehicleState& s, double steer,
                            const PacejkaCoeffs& k, const VehicleParams& p) {
  const SlipAngles a = slip_angles(s, steer, p);
  return {a.front, a.rear, magic_formula(a.front, k.front),
          magic_formula(a.rear, k.rear)};
}

// Time derivative of the full state for given axle forces.
inline VehicleState derivative_from_forces(const VehicleState& s,
                                           const ControlInput& u, double fy_f,
                                           double fy_r,
                                           const VehicleParams& p) {
  const double cos_psi = std::cos(s.psi);
  const double sin_psi = std::sin(s.psi);
  const double cos_d = std::cos(u.steer);
  const double sin_d = std::sin(u.steer);
  VehicleState d;
  d.x = s.vx * cos_psi - s.vy * sin_psi;
  d.y = s.vx * sin_psi + s.vy * cos_psi;
  d.psi = s.omega;
  d.vx = u.accel - fy_f * sin_d / p.m + s.vy * s.omega;
  d.vy = (fy_f * cos_d + fy_r) / p.m - s.vx * s.omega;
  d.omega = (p.lf * fy_f * cos_d - p.lr * fy_r) / p.iz;
  return d;
}

inline VehicleState state_derivative(const VehicleState& s,
                                     const ControlInput& u,
                                     const PacejkaCoeffs& k,
                                     const VehicleParams& p) {
  const TireState t = tire_state(s, u.steer, k, p);
  return derivative_from_forces(s, u, t.fy_f, t.fy_r, p);
}

namespace detail {

inline VehicleState Axpy(const VehicleState& s, double h,
                         const VehicleState& d) {
  return {s.x + h * d.x,   s.y + h * d.y,   s.psi + h * d.psi,
          s.vx + h * d.vx, s.vy + h * d.vy, s.omega + h * d.omega};
}

}  // namespace detail

// Classical RK4 for an arbitrary state-derivative functor. No clamping.
template <typename Deriv>
VehicleState rk4_integrate(const VehicleState& s, double dt, Deriv&& f) {
  const VehicleState k1 = f(s);
  const VehicleState k2 = f(detail::Axpy(s, 0.5 * dt, k1));
  const VehicleState k3 = f(detail::Axpy(s, 0.5 * dt, k2));
  const VehicleState k4 = f(detail::Axpy(s, dt, k3));
  const double h6 = dt / 6.0;
  VehicleState out;
  out.x = s.x + h6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
  out.y = s.y + h6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
  out.psi = s.psi + h6 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi);
  out.vx = s.vx + h6 * (k1.vx + 2 * k2.vx + 2 * k3.vx + k4.vx);
  out.vy = s.vy + h6 * (k1.vy + 2 * k2.vy + 2 * k3.vy + k4.vy);
  out.omega =
      s.omega + h6 * (k1.omega + 2 * k2.omega + 2 * k3.omega + k4.omega);
  return out;
}

// One RK4 step of the bicycle model; vx is clamped to >= 0 afterwards.
inline VehicleState rk4_step(const VehicleState& s, const ControlInput& u,
                             const PacejkaCoeffs& k, const VehicleParams& p,
                             double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) {
    throw std::invalid_argument("rk4_step: dt must be in (0, 0.1]");
  }
  VehicleState out = rk4_integrate(
      s, dt, [&](const VehicleState& x) { return state_derivative(x, u, k, p); });
  out.vx = std::max(out.vx, 0.0);
  return out;
}

struct TrajectoryPoint {
  double t = 0.0;
  VehicleState state;
  ControlInput control;  // control applied from this state on
  TireState tire;
  double mu = 1.0;
};

using Trajectory = std::vector<TrajectoryPoint>;

inline void CheckDivergence(const VehicleState& s, std::size_t step) {
  for (double v : s.ToArray()) {
    if (!std::isfinite(v) || std::abs(v) > kDivergenceLimit) {
      throw NumericalDivergence("simulation diverged at step " +
                                std::to_string(step));
    }
  }
}

// Open-loop rollout of the ground-truth vehicle. The schedule is keyed by
// time. Returns controls.size() + 1 points; the last point repeats the last
// control for its tire record.
inline Trajectory simulate(const VehicleState& initial,
                           std::span<const ControlInput> controls,
                           const FrictionSchedule& schedule,
                           const VehicleParams& params,
                           const PacejkaCoeffs& coeffs, double dt) {
  if (controls.empty()) {
    throw std::invalid_argument("simulate: empty control sequence");
  }
  Trajectory traj;
  traj.reserve(controls.size() + 1);
  VehicleState s = initial;
  for (std::size_t i = 0; i <= controls.size(); ++i) {
    const double t = static_cast<double>(i) * dt;
    const ControlInput u = controls[std::min(i, controls.size() - 1)];
    const double mu = schedule.MuAt(t);
    const PacejkaCoeffs k = apply_friction(coeffs, mu);
    traj.push_back({t, s, u, tire_state(s, u.steer, k, params), mu});
    if (i == controls.size()) break;
    s = rk4_step(s, u, k, params, dt);
    CheckDivergence(s, i + 1);
  }
  return traj;
}

inline constexpr const char* kTrajectoryCsvHeader =
    "t,x,y,psi,vx,vy,omega,steer,accel,alpha_f,alpha_r,fy_f,fy_r,mu";

inline void WriteTrajectoryRow(std::ostream& os, const TrajectoryPoint& p) {
  const auto& s = p.state;
  os << p.t << ',' << s.x << ',' << s.y << ',' << s.psi << ',' << s.vx << ','
     << s.vy << ',' << s.omega << ',' << p.control.steer << ','
     << p.control.accel << ',' << p.tire.alpha_f << ',' << p.tire.alpha_r
     << ',' << p.tire.fy_f << ',' << p.tire.fy_r << ',' << p.mu;
}

inline void WriteTrajectoryCsv(std::ostream& os, const Trajectory& traj) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << std::setprecision(9);
  os << kTrajectoryCsvHeader << '\n';
  for (const auto& p : traj) {
    WriteTrajectoryRow(os, p);
    os << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace dpm

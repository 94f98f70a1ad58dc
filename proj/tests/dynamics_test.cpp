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

#include "dpm/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

namespace dpm {
namespace {

constexpr double kPi = std::numbers::pi;

VehicleState Moving(double vx, double vy = 0.0, double omega = 0.0) {
  VehicleState s;
  s.vx = vx;
  s.vy = vy;
  s.omega = omega;
  return s;
}

TEST(SlipAnglesTest, StraightDrivingHasNoSlip) {
  const auto a = slip_angles(Moving(10.0), 0.0, VehicleParams{});
  EXPECT_EQ(a.front, 0.0);
  EXPECT_EQ(a.rear, 0.0);
}

TEST(SlipAnglesTest, YawRateExample) {
  // -atan(0.024) and atan(0.028), evaluated independently.
  const auto a = slip_angles(Moving(10.0, 0.0, 0.2), 0.0, VehicleParams{});
  EXPECT_NEAR(a.front, -0.0239954, 1e-6);
  EXPECT_NEAR(a.rear, 0.0279927, 1e-6);
}

TEST(SlipAnglesTest, MirrorNegates) {
  const VehicleParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const VehicleState s = Moving(5 + 10 * std::abs(u(rng)), u(rng), u(rng));
    const double steer = 0.4 * u(rng);
    const auto a = slip_angles(s, steer, p);
    const auto b = slip_angles(Moving(s.vx, -s.vy, -s.omega), -steer, p);
    EXPECT_EQ(a.front, -b.front);
    EXPECT_EQ(a.rear, -b.rear);
  }
}

TEST(SlipAnglesTest, LowSpeedIsFinite) {
  const auto a = slip_angles(Moving(0.0, 0.1, 0.3), 0.2, VehicleParams{});
  EXPECT_TRUE(std::isfinite(a.front));
  EXPECT_TRUE(std::isfinite(a.rear));
}

TEST(MagicFormulaTest, ZeroSlipZeroForce) {
  EXPECT_EQ(magic_formula(0.0, 10, 1.9, 1.0, 0.97), 0.0);
}

TEST(MagicFormulaTest, SmallAngleMatchesCorneringStiffness) {
  EXPECT_NEAR(magic_formula(0.001, 10, 1.9, 1.0, 0.97), 0.019, 1e-4);
}

TEST(MagicFormulaTest, PeakMatchesClosedForm) {
  // The peak satisfies C atan(phi) = pi / 2; solve phi(x) = tan(pi / 2C) for
  // x = B alpha by bisection (phi is increasing for E <= 1).
  const double b = 10, c = 1.9, d = 1.0, e = 0.97;
  const double target = std::tan(kPi / (2 * c));
  double lo = 0.0, hi = 100.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double phi = mid - e * (mid - std::atan(mid));
    (phi < target ? lo : hi) = mid;
  }
  const double alpha_star = 0.5 * (lo + hi) / b;

  double best = -1.0, arg = 0.0;
  for (int i = 0; i <= 5000; ++i) {
    const double alpha = i * 1e-4;
    const double f = magic_formula(alpha, b, c, d, e);
    EXPECT_LE(f, d);
    if (f > best) {
      best = f;
      arg = alpha;
    }
  }
  EXPECT_NEAR(arg, alpha_star, 1e-4);
  EXPECT_NEAR(best, d, 1e-6);
}

TEST(MagicFormulaTest, OddBoundedAndSlopeOverRandomCoeffs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ub(2.0, 25.0), uc(1.05, 2.9),
      ud(100.0, 10000.0), ue(-3.0, 1.0), ua(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const AxleCoeffs k{ub(rng), uc(rng), ud(rng), ue(rng)};
    for (int j = 0; j < 20; ++j) {
      const double a = ua(rng);
      const double f = magic_formula(a, k);
      EXPECT_EQ(magic_formula(-a, k), -f);
      EXPECT_LE(std::abs(f), k.d);
    }
    const double h = 1e-7;
    const double slope = (magic_formula(h, k) - magic_formula(-h, k)) / (2 * h);
    const double bcd = k.b * k.c * k.d;
    EXPECT_NEAR(slope / bcd, 1.0, 1e-6);
  }
}

TEST(MagicFormulaTest, JetMatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ub(4.0, 20.0), uc(1.2, 2.5),
      ud(1000.0, 8000.0), ue(-2.0, 1.0), ua(-0.4, 0.4);
  for (int i = 0; i < 200; ++i) {
    const AxleCoeffs k{ub(rng), uc(rng), ud(rng), ue(rng)};
    const double a = ua(rng);
    const auto jet = magic_formula_jet(a, k);
    EXPECT_DOUBLE_EQ(jet.fy, magic_formula(a, k));
    auto fd = [&](auto perturb, double h) {
      AxleCoeffs p = k, m = k;
      double ap = a, am = a;
      perturb(p, ap, h);
      perturb(m, am, -h);
      return (magic_formula(ap, p) - magic_formula(am, m)) / (2 * h);
    };
    auto rel = [](double x, double y) {
      return std::abs(x - y) / std::max(1.0, std::abs(y));
    };
    EXPECT_LT(rel(jet.d_alpha,
                  fd([](AxleCoeffs&, double& al, double h) { al += h; }, 1e-6)),
              1e-5);
    EXPECT_LT(rel(jet.d_b,
                  fd([](AxleCoeffs& c, double&, double h) { c.b += h; }, 1e-5)),
              1e-5);
    EXPECT_LT(rel(jet.d_c,
                  fd([](AxleCoeffs& c, double&, double h) { c.c += h; }, 1e-6)),
              1e-5);
    EXPECT_LT(rel(jet.d_d,
                  fd([](AxleCoeffs& c, double&, double h) { c.d += h; }, 1e-3)),
              1e-5);
    EXPECT_LT(rel(jet.d_e,
                  fd([](AxleCoeffs& c, double&, double h) { c.e += h; }, 1e-6)),
              1e-5);
  }
}

TEST(StateDerivativeTest, StraightCoast) {
  const VehicleParams p;
  const auto d = state_derivative(Moving(10.0), {}, DefaultCoeffs(p), p);
  EXPECT_EQ(d.vx, 0.0);
  EXPECT_EQ(d.vy, 0.0);
  EXPECT_EQ(d.omega, 0.0);
}

TEST(StateDerivativeTest, Kinematics) {
  const VehicleParams p;
  const auto d = state_derivative(Moving(5.0), {}, DefaultCoeffs(p), p);
  EXPECT_EQ(d.x, 5.0);
  EXPECT_EQ(d.y, 0.0);
}

TEST(StateDerivativeTest, SteadyStateCircleRootSearch) {
  // Newton iteration on (vy, omega) for vy' = omega' = 0 at fixed vx, steer.
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  const ControlInput u{0.05, 0.0};
  auto residual = [&](double vy, double om) {
    const auto d = state_derivative(Moving(10.0, vy, om), u, k, p);
    return std::array<double, 2>{d.vy, d.omega};
  };
  double vy = 0.0, om = 0.1;
  for (int it = 0; it < 50; ++it) {
    const auto r = residual(vy, om);
    const double h = 1e-7;
    const auto rv = residual(vy + h, om);
    const auto ro = residual(vy, om + h);
    const double j00 = (rv[0] - r[0]) / h, j01 = (ro[0] - r[0]) / h;
    const double j10 = (rv[1] - r[1]) / h, j11 = (ro[1] - r[1]) / h;
    const double det = j00 * j11 - j01 * j10;
    vy -= (j11 * r[0] - j01 * r[1]) / det;
    om -= (-j10 * r[0] + j00 * r[1]) / det;
  }
  const auto r = residual(vy, om);
  // Residuals expressed as forces (N) and moments (N m).
  EXPECT_LT(std::abs(r[0] * p.m), 1e-8);
  EXPECT_LT(std::abs(r[1] * p.iz), 1e-8);
  EXPECT_GT(om, 0.0);  // left steer turns left
}

// Pure-kinematic circle: constant speed and yaw rate, forces ignored.
VehicleState KinematicDeriv(const VehicleState& s) {
  VehicleState d;
  d.x = s.vx * std::cos(s.psi);
  d.y = s.vx * std::sin(s.psi);
  d.psi = s.omega;
  return d;
}

double CircleError(double dt, double t_end) {
  VehicleState s = Moving(10.0, 0.0, 0.5);
  const int n = static_cast<int>(std::lround(t_end / dt));
  for (int i = 0; i < n; ++i) s = rk4_integrate(s, dt, KinematicDeriv);
  const double r = 10.0 / 0.5;
  const double ex = r * std::sin(0.5 * t_end);
  const double ey = r * (1 - std::cos(0.5 * t_end));
  return std::hypot(s.x - ex, s.y - ey);
}

TEST(Rk4Test, FourthOrderOnCircle) {
  const double e1 = CircleError(0.1, 4.0);
  const double e2 = CircleError(0.05, 4.0);
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 12.0);
  EXPECT_GE(std::log2(ratio), 3.5);
}

TEST(Rk4Test, SmallStepApproachesIdentity) {
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  const VehicleState s = Moving(10.0, 0.3, 0.2);
  const ControlInput u{0.1, 1.0};
  const auto dist = [&](double dt) {
    const auto n = rk4_step(s, u, k, p, dt);
    return std::hypot(n.x - s.x, n.vx - s.vx, n.vy - s.vy);
  };
  EXPECT_NEAR(dist(1e-4) / dist(1e-3), 0.1, 1e-3);
}

TEST(Rk4Test, RejectsBadStep) {
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  EXPECT_THROW(rk4_step(Moving(1.0), {}, k, p, 0.0), std::invalid_argument);
  EXPECT_THROW(rk4_step(Moving(1.0), {}, k, p, 0.2), std::invalid_argument);
}

TEST(Rk4Test, ClampsReverse) {
  const VehicleParams p;
  const auto s = rk4_step(Moving(0.01), {0.0, -4.0}, DefaultCoeffs(p), p, 0.02);
  EXPECT_EQ(s.vx, 0.0);
}

TEST(Rk4Test, Deterministic) {
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  const VehicleState s = Moving(12.0, 0.4, -0.3);
  const auto a = rk4_step(s, {0.2, 1.5}, k, p, 0.02);
  const auto b = rk4_step(s, {0.2, 1.5}, k, p, 0.02);
  EXPECT_EQ(a, b);
}

TEST(FrictionTest, ScalesPeakOnly) {
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  EXPECT_EQ(apply_friction(k, 1.0), k);
  PacejkaCoeffs c = k;
  c.front.d = 8000.0;
  const PacejkaCoeffs h = apply_friction(c, 0.5);
  EXPECT_EQ(h.front.d, 4000.0);
  EXPECT_EQ(h.front.b, c.front.b);
  EXPECT_EQ(h.front.c, c.front.c);
  EXPECT_EQ(h.front.e, c.front.e);
  double peak_full = 0.0, peak_half = 0.0;
  for (int i = 0; i <= 5000; ++i) {
    peak_full = std::max(peak_full, magic_formula(i * 1e-4, c.front));
    peak_half = std::max(peak_half, magic_formula(i * 1e-4, h.front));
  }
  EXPECT_EQ(peak_half, 0.5 * peak_full);
}

TEST(FrictionScheduleTest, LookupAndValidation) {
  const FrictionSchedule s({{0.0, 1.0}, {10.0, 0.5}});
  EXPECT_EQ(s.MuAt(-1.0), 1.0);
  EXPECT_EQ(s.MuAt(9.99), 1.0);
  EXPECT_EQ(s.MuAt(10.0), 0.5);
  EXPECT_THROW(FrictionSchedule({{0.0, 1.0}, {0.0, 0.5}}),
               std::invalid_argument);
  EXPECT_THROW(FrictionSchedule({{0.0, 0.0}}), std::invalid_argument);
}

TEST(SimulateTest, RestStaysAtRest) {
  const VehicleParams p;
  const std::vector<ControlInput> u(50);
  const auto traj =
      simulate(VehicleState{}, u, FrictionSchedule(), p, DefaultCoeffs(p), 0.02);
  ASSERT_EQ(traj.size(), u.size() + 1);
  for (const auto& pt : traj) EXPECT_EQ(pt.state, VehicleState{});
}

TEST(SimulateTest, ConstantAccelIsQuadratic) {
  const VehicleParams p;
  const std::vector<ControlInput> u(200, ControlInput{0.0, 2.0});
  const auto traj =
      simulate(Moving(3.0), u, FrictionSchedule(), p, DefaultCoeffs(p), 0.02);
  for (const auto& pt : traj) {
    EXPECT_NEAR(pt.state.x, 3.0 * pt.t + pt.t * pt.t, 1e-9);
    EXPECT_EQ(pt.state.y, 0.0);
  }
}

TEST(SimulateTest, RejectsEmptyAndDetectsBlowUp) {
  const VehicleParams p;
  EXPECT_THROW(simulate(VehicleState{}, std::vector<ControlInput>{},
                        FrictionSchedule(), p, DefaultCoeffs(p), 0.02),
               std::invalid_argument);
  const std::vector<ControlInput> u(10, ControlInput{0.0, 1e9});
  EXPECT_THROW(
      simulate(VehicleState{}, u, FrictionSchedule(), p, DefaultCoeffs(p), 0.02),
      NumericalDivergence);
}

TEST(SimulateTest, MirrorSymmetry) {
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ControlInput> u, um;
  double steer = 0.0;
  for (int i = 0; i < 400; ++i) {
    steer = 0.97 * steer + 0.02 * n(rng);
    const ControlInput c{steer, 0.5 * n(rng)};
    u.push_back(c);
    um.push_back({-c.steer, c.accel});
  }
  VehicleState s0 = Moving(12.0, 0.3, 0.1);
  s0.y = 1.0;
  s0.psi = 0.2;
  VehicleState m0 = s0;
  m0.y = -s0.y;
  m0.psi = -s0.psi;
  m0.vy = -s0.vy;
  m0.omega = -s0.omega;
  const auto a = simulate(s0, u, FrictionSchedule(), p, k, 0.02);
  const auto b = simulate(m0, um, FrictionSchedule(), p, k, 0.02);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i].state.x, b[i].state.x, 1e-9);
    EXPECT_NEAR(a[i].state.y, -b[i].state.y, 1e-9);
    EXPECT_NEAR(a[i].state.psi, -b[i].state.psi, 1e-9);
    EXPECT_NEAR(a[i].state.vx, b[i].state.vx, 1e-9);
    EXPECT_NEAR(a[i].state.vy, -b[i].state.vy, 1e-9);
    EXPECT_NEAR(a[i].state.omega, -b[i].state.omega, 1e-9);
  }
}

// With accel = 0 the tires only dissipate: lateral forces oppose the slip
// velocity at each axle, so the kinetic energy (translational plus yaw)
// never grows.
TEST(SimulateTest, CoastingNeverGainsEnergy) {
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ControlInput> ctl;
    for (int i = 0; i < 300; ++i) ctl.push_back({0.3 * u(rng), 0.0});
    const auto traj = simulate(Moving(15.0 + 5 * u(rng), u(rng), 0.3 * u(rng)),
                               ctl, FrictionSchedule(), p, k, 0.02);
    auto energy = [&](const VehicleState& s) {
      return 0.5 * p.m * (s.vx * s.vx + s.vy * s.vy) +
             0.5 * p.iz * s.omega * s.omega;
    };
    for (std::size_t i = 1; i < traj.size(); ++i) {
      const double e0 = energy(traj[i - 1].state);
      EXPECT_LE(energy(traj[i].state), e0 * (1 + 1e-9));
    }
  }
}

TEST(SimulateTest, TireRecordsAreBounded) {
  const VehicleParams p;
  const PacejkaCoeffs k = DefaultCoeffs(p);
  std::vector<ControlInput> u;
  for (int i = 0; i < 300; ++i) u.push_back({0.3 * std::sin(0.05 * i), 0.0});
  const auto traj = simulate(Moving(15.0), u, FrictionSchedule(0.5), p, k, 0.02);
  for (const auto& pt : traj) {
    EXPECT_EQ(pt.mu, 0.5);
    EXPECT_LE(std::abs(pt.tire.fy_f), 0.5 * k.front.d);
    EXPECT_LE(std::abs(pt.tire.fy_r), 0.5 * k.rear.d);
  }
}

TEST(TrajectoryCsvTest, HeaderAndRows) {
  const VehicleParams p;
  const std::vector<ControlInput> u(5, ControlInput{0.1, 1.0});
  const auto traj =
      simulate(Moving(10.0), u, FrictionSchedule(), p, DefaultCoeffs(p), 0.02);
  std::ostringstream os;
  WriteTrajectoryCsv(os, traj);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, kTrajectoryCsvHeader);
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 13);
  }
  EXPECT_EQ(rows, 6);
}

}  // namespace
}  // namespace dpm

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

// Piecewise-linear reference tracks and projection onto them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpm {

inline double WrapAngle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double v_ref = 0.0;
};

struct Reference {
  double lateral = 0.0;  // signed, positive left of travel direction
  double heading_error = 0.0;
  double v_ref = 0.0;
  double progress = 0.0;  // arc length of the projection
  std::size_t segment = 0;
};

class Track {
 public:
  Track() = default;
  Track(std::vector<Waypoint> waypoints, bool closed)
      : waypoints_(std::move(waypoints)), closed_(closed) {
    if (waypoints_.size() < 3) {
      throw std::invalid_argument("Track: need at least 3 waypoints");
    }
    const std::size_t n = num_segments();
    arc_.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = waypoints_[i];
      const auto& b = waypoints_[(i + 1) % waypoints_.size()];
      const double len = std::hypot(b.x - a.x, b.y - a.y);
      if (!(len > 0.0)) {
        throw std::invalid_argument("Track: consecutive waypoints coincide");
      }
      arc_[i + 1] = arc_[i] + len;
    }
  }

  const std::vector<Waypoint>& waypoints() const { return waypoints_; }
  bool closed() const { return closed_; }
  double length() const { return arc_.back(); }
  std::size_t num_segments() const {
    return closed_ ? waypoints_.size() : waypoints_.size() - 1;
  }

  // Projection onto segment i.
  Reference ProjectOnSegment(double px, double py, std::size_t i,
                             double* dist2) const {
    const auto& a = waypoints_[i];
    const auto& b = waypoints_[(i + 1) % waypoints_.size()];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    const double s =
        std::clamp(((px - a.x) * dx + (py - a.y) * dy) / len2, 0.0, 1.0);
    const double qx = a.x + s * dx;
    const double qy = a.y + s * dy;
    *dist2 = (px - qx) * (px - qx) + (py - qy) * (py - qy);
    const double len = std::sqrt(len2);
    Reference r;
    r.lateral = (dx * (py - qy) - dy * (px - qx)) / len;
    r.heading_error = std::atan2(dy, dx);  // segment heading for now
    r.v_ref = a.v_ref + s * (b.v_ref - a.v_ref);
    r.progress = arc_[i] + s * len;
    r.segment = i;
    return r;
  }

  // Nearest point over all segments, or over a window of `window` segments
  // around `hint` when window > 0.
  Reference Project(double px, double py, double psi, std::size_t hint = 0,
                    std::size_t window = 0) const {
    const std::size_t n = num_segments();
    double best = std::numeric_limits<double>::infinity();
    Reference out;
    auto consider = [&](std::size_t i) {
      double d2;
      const Reference r = ProjectOnSegment(px, py, i, &d2);
      if (d2 < best) {
        best = d2;
        out = r;
      }
    };
    if (window == 0 || 2 * window + 1 >= n) {
      for (std::size_t i = 0; i < n; ++i) consider(i);
    } else {
      for (std::size_t k = 0; k <= 2 * window; ++k) {
        const long idx = static_cast<long>(hint) + static_cast<long>(k) -
                         static_cast<long>(window);
        if (closed_) {
          const long m = static_cast<long>(n);
          consider(static_cast<std::size_t>(((idx % m) + m) % m));
        } else if (idx >= 0 && idx < static_cast<long>(n)) {
          consider(static_cast<std::size_t>(idx));
        }
      }
    }
    // Signed distance at a vertex: use the point-to-point distance with the
    // sign from the chosen segment so the value is continuous.
    const double sign = out.lateral >= 0 ? 1.0 : -1.0;
    out.lateral = sign * std::sqrt(best);
    out.heading_error = WrapAngle(psi - out.heading_error);
    return out;
  }

 private:
  std::vector<Waypoint> waypoints_;
  bool closed_ = false;
  std::vector<double> arc_;
};

inline Reference nearest_reference(const Track& track, double x, double y,
                                   double psi = 0.0) {
  return track.Project(x, y, psi);
}

// Closed oval: two straights of `straight` meters joined by semicircles of
// `radius`, driven counter-clockwise starting at the origin heading +x.
inline Track MakeOval(double straight, double radius, double v_ref,
                      double spacing = 2.0) {
  std::vector<Waypoint> w;
  const int n_straight = std::max(1, int(std::round(straight / spacing)));
  const int n_arc =
      std::max(4, int(std::round(std::numbers::pi * radius / spacing)));
  for (int i = 0; i < n_straight; ++i) {
    w.push_back({straight * i / n_straight, 0.0, v_ref});
  }
  for (int i = 0; i < n_arc; ++i) {
    const double a = -std::numbers::pi / 2 + std::numbers::pi * i / n_arc;
    w.push_back({straight + radius * std::cos(a),
                 radius + radius * std::sin(a), v_ref});
  }
  for (int i = 0; i < n_straight; ++i) {
    w.push_back({straight - straight * i / n_straight, 2 * radius, v_ref});
  }
  for (int i = 0; i < n_arc; ++i) {
    const double a = std::numbers::pi / 2 + std::numbers::pi * i / n_arc;
    w.push_back({radius * std::cos(a), radius + radius * std::sin(a), v_ref});
  }
  return Track(std::move(w), true);
}

// Double lane change in the spirit of ISO 3888-1: entry lane, a lateral
// offset of `offset` meters, then back. Open track along +x.
inline Track MakeDoubleLaneChange(double v_ref, double offset = 3.5,
                                  double spacing = 1.0) {
  // Section boundaries (m): entry, first transition, offset lane, second
  // transition, exit.
  const double x1 = 30.0, x2 = 55.0, x3 = 80.0, x4 = 105.0, x_end = 160.0;
  auto lateral = [&](double x) {
    auto blend = [](double s) {  // smooth 0..1
      s = std::clamp(s, 0.0, 1.0);
      return 0.5 - 0.5 * std::cos(std::numbers::pi * s);
    };
    if (x < x1) return 0.0;
    if (x < x2) return offset * blend((x - x1) / (x2 - x1));
    if (x < x3) return offset;
    if (x < x4) return offset * (1.0 - blend((x - x3) / (x4 - x3)));
    return 0.0;
  };
  std::vector<Waypoint> w;
  for (double x = 0.0; x <= x_end + 1e-9; x += spacing) {
    w.push_back({x, lateral(x), v_ref});
  }
  return Track(std::move(w), false);
}

inline void WriteTrackCsv(const Track& track, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << std::setprecision(17) << "x,y,v_ref\n";
  for (const auto& w : track.waypoints()) {
    os << w.x << ',' << w.y << ',' << w.v_ref << '\n';
  }
}

inline Track ReadTrackCsv(const std::string& path, bool closed) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read track " + path);
  std::string line;
  std::getline(is, line);
  if (line != "x,y,v_ref") {
    throw std::runtime_error("track file must start with 'x,y,v_ref'");
  }
  std::vector<Waypoint> w;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    Waypoint p;
    char c1, c2;
    if (!(ss >> p.x >> c1 >> p.y >> c2 >> p.v_ref) || c1 != ',' || c2 != ',') {
      throw std::runtime_error("malformed track row: " + line);
    }
    w.push_back(p);
  }
  return Track(std::move(w), closed);
}

}  // namespace dpm

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

#include "dpm/track.hpp"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

namespace dpm {
namespace {

Track UnitSquare() {
  return Track({{0, 0, 5}, {1, 0, 5}, {1, 1, 5}, {0, 1, 5}}, true);
}

TEST(TrackTest, UnitSquareDeviation) {
  const Track sq = UnitSquare();
  EXPECT_DOUBLE_EQ(sq.length(), 4.0);
  const Reference inside = sq.Project(0.5, 0.1, 0.0);
  EXPECT_NEAR(inside.lateral, 0.1, 1e-15);
  EXPECT_NEAR(inside.progress, 0.5, 1e-15);
  const Reference outside = sq.Project(0.5, -0.1, 0.0);
  EXPECT_NEAR(outside.lateral, -0.1, 1e-15);
  // Closing segment runs from (0, 1) back to the origin.
  const Reference closing = sq.Project(0.2, 0.5, -std::numbers::pi / 2);
  EXPECT_NEAR(closing.lateral, 0.2, 1e-15);
  EXPECT_NEAR(closing.heading_error, 0.0, 1e-15);
  EXPECT_NEAR(closing.progress, 3.5, 1e-15);
}

TEST(TrackTest, WaypointHasZeroDeviation) {
  const Track oval = MakeOval(60, 30, 12.0);
  for (const auto& w : oval.waypoints()) {
    EXPECT_NEAR(oval.Project(w.x, w.y, 0.0).lateral, 0.0, 1e-12);
  }
}

TEST(TrackTest, HeadingErrorIsWrapped) {
  const Track sq = UnitSquare();
  const Reference r = sq.Project(0.5, 0.0, 2 * std::numbers::pi + 0.3);
  EXPECT_NEAR(r.heading_error, 0.3, 1e-12);
  EXPECT_NEAR(WrapAngle(2.5 * std::numbers::pi), 0.5 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(std::abs(WrapAngle(3 * std::numbers::pi)), std::numbers::pi, 1e-12);
  EXPECT_NEAR(WrapAngle(-0.5), -0.5, 1e-15);
}

// Lateral deviation along a path crossing the track, including past the
// vertices of the oval, has no jumps.
TEST(TrackTest, LateralIsContinuous) {
  const Track oval = MakeOval(60, 30, 12.0);
  for (double y : {-1.0, 0.5, 2.0}) {
    double prev = oval.Project(-5.0, y, 0.0).lateral;
    for (double x = -5.0; x <= 65.0; x += 1e-3) {
      const double cur = oval.Project(x, y, 0.0).lateral;
      EXPECT_LT(std::abs(cur - prev), 2e-3);
      prev = cur;
    }
  }
  // Around a convex vertex the lateral equals the point distance.
  const Track sq = UnitSquare();
  EXPECT_NEAR(sq.Project(1.1, -0.1, 0.0).lateral, -std::hypot(0.1, 0.1),
              1e-15);
}

// Fine sweep (step 1e-7 m) through every vertex of the oval, offset to
// either side of the line.
TEST(TrackTest, NoJumpsAcrossVertices) {
  const Track oval = MakeOval(60, 30, 12.0);
  const auto& w = oval.waypoints();
  double worst = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto& a = w[(i + w.size() - 1) % w.size()];
    const auto& b = w[(i + 1) % w.size()];
    const double tx = (b.x - a.x) / std::hypot(b.x - a.x, b.y - a.y);
    const double ty = (b.y - a.y) / std::hypot(b.x - a.x, b.y - a.y);
    for (double side : {-0.7, 0.7}) {
      double prev = NAN;
      for (int k = -1000; k <= 1000; ++k) {
        const double s = 1e-7 * k;
        const double x = w[i].x + s * tx - side * ty;
        const double y = w[i].y + s * ty + side * tx;
        const double lat = oval.Project(x, y, 0.0, i, 2).lateral;
        if (!std::isnan(prev)) worst = std::max(worst, std::abs(lat - prev));
        prev = lat;
      }
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(TrackTest, WindowedMatchesGlobalNearHint) {
  const Track oval = MakeOval(60, 30, 12.0);
  for (const auto& w : oval.waypoints()) {
    const Reference g = oval.Project(w.x + 0.3, w.y - 0.2, 0.1);
    const Reference l = oval.Project(w.x + 0.3, w.y - 0.2, 0.1, g.segment, 4);
    EXPECT_EQ(g.segment, l.segment);
    EXPECT_EQ(g.lateral, l.lateral);
  }
}

TEST(TrackTest, SpeedIsInterpolated) {
  const Track t({{0, 0, 10}, {10, 0, 20}, {20, 0, 20}}, false);
  EXPECT_NEAR(t.Project(2.5, 1.0, 0.0).v_ref, 12.5, 1e-12);
}

TEST(TrackTest, LaneChangeShape) {
  const Track t = MakeDoubleLaneChange(10.0);
  EXPECT_FALSE(t.closed());
  EXPECT_NEAR(t.Project(0.0, 0.0, 0.0).lateral, 0.0, 1e-12);
  EXPECT_NEAR(t.Project(70.0, 3.5, 0.0).lateral, 0.0, 1e-9);
  EXPECT_NEAR(t.Project(150.0, 0.0, 0.0).lateral, 0.0, 1e-12);
}

TEST(TrackTest, OvalGeometry) {
  const Track oval = MakeOval(60, 30, 12.0);
  EXPECT_TRUE(oval.closed());
  // Polygon inscribed in the circle arcs is slightly shorter than the oval.
  const double exact = 2 * 60 + 2 * std::numbers::pi * 30;
  EXPECT_LT(oval.length(), exact);
  EXPECT_GT(oval.length(), 0.999 * exact);
}

TEST(TrackTest, Validation) {
  EXPECT_THROW(Track({{0, 0, 1}, {1, 0, 1}}, false), std::invalid_argument);
  EXPECT_THROW(Track({{0, 0, 1}, {0, 0, 1}, {1, 0, 1}}, false),
               std::invalid_argument);
}

TEST(TrackTest, CsvRoundTrip) {
  const Track oval = MakeOval(20, 10, 8.0, 1.5);
  const auto path = std::filesystem::temp_directory_path() / "dpm_track.csv";
  WriteTrackCsv(oval, path.string());
  const Track back = ReadTrackCsv(path.string(), true);
  ASSERT_EQ(back.waypoints().size(), oval.waypoints().size());
  for (std::size_t i = 0; i < back.waypoints().size(); ++i) {
    EXPECT_EQ(back.waypoints()[i].x, oval.waypoints()[i].x);
    EXPECT_EQ(back.waypoints()[i].y, oval.waypoints()[i].y);
    EXPECT_EQ(back.waypoints()[i].v_ref, oval.waypoints()[i].v_ref);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(ReadTrackCsv(path.string(), true), std::runtime_error);
}

}  // namespace
}  // namespace dpm

// Copyright 2026 The socnav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "socnav/error.hpp"
#include "socnav/observation.hpp"

using namespace socnav;
using namespace socnav::obs;

namespace {

constexpr int N = 48;
constexpr double kRes = 0.1;

// Cell (r, c) covers x in [(24-r-1)res, (24-r)res], y in [(24-c-1)res, (24-c)res]
// of the robot frame: row 0 is the far front, column 0 the far left.
struct Square {
    double x0, x1, y0, y1;
};

Square square(int r, int c) {
    return {(24.0 - r - 1) * kRes, (24.0 - r) * kRes, (24.0 - c - 1) * kRes, (24.0 - c) * kRes};
}

bool square_hits_disc(const Square& s, Vec2 center, double radius) {
    const double dx = std::max({s.x0 - center.x, 0.0, center.x - s.x1});
    const double dy = std::max({s.y0 - center.y, 0.0, center.y - s.y1});
    return dx * dx + dy * dy < radius * radius;
}

bool square_hits_box(const Square& s, double x0, double x1, double y0, double y1) {
    return s.x0 < x1 && x0 < s.x1 && s.y0 < y1 && y0 < s.y1;
}

float at(const std::vector<float>& g, int r, int c, int channel = 0) {
    return g[static_cast<std::size_t>(channel) * N * N + static_cast<std::size_t>(r) * N + c];
}

Pedestrian ped(Vec2 p, Vec2 v = {}) {
    Pedestrian x;
    x.position = p;
    x.velocity = v;
    return x;
}

int count_nonzero(const std::vector<float>& g) {
    return static_cast<int>(std::count_if(g.begin(), g.end(), [](float v) { return v != 0.0f; }));
}

}  // namespace

TEST(Grid, EmptyWorldOnlyFootprint) {
    const auto g = occupancy_grid({}, {3, -2, 0.7}, kRobotRadius, ObservationConfig{});
    ASSERT_EQ(g.size(), static_cast<std::size_t>(N * N));
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            ASSERT_EQ(at(g, r, c), square_hits_disc(square(r, c), {0, 0}, kRobotRadius) ? 1.0f : 0.0f);
        }
    }
    EXPECT_EQ(at(g, 23, 23), 1.0f);
    EXPECT_EQ(at(g, 24, 24), 1.0f);
}

TEST(Grid, WallAheadRasterIndices) {
    // Thin wall spanning x in [1.0, 1.08], y in [-0.95, 0.95] ahead of the robot.
    const std::vector<Obstacle> obs{Obstacle::box({1.04, 0}, 0.08, 1.9)};
    const auto g = occupancy_grid(obs, {0, 0, 0}, kRobotRadius, ObservationConfig{});
    int wall_cells = 0;
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            const Square s = square(r, c);
            const bool want = square_hits_box(s, 1.0, 1.08, -0.95, 0.95) || square_hits_disc(s, {0, 0}, kRobotRadius);
            ASSERT_EQ(at(g, r, c), want ? 1.0f : 0.0f) << r << "," << c;
            if (square_hits_box(s, 1.0, 1.08, -0.95, 0.95)) {
                ++wall_cells;
                EXPECT_EQ(r, 13);  // 10 cells in front of the centre row 23
            }
        }
    }
    EXPECT_EQ(wall_cells, 20);
}

TEST(Grid, DiscOracle) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-2.8, 2.8), rad(0.2, 0.6);
    for (int trial = 0; trial < 100; ++trial) {
        const Vec2 c{u(gen), u(gen)};
        const double r = rad(gen);
        const std::vector<Obstacle> obs{Obstacle::disc(c, r)};
        const auto g = occupancy_grid(obs, {0, 0, 0}, kRobotRadius, ObservationConfig{});
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                const bool want = square_hits_disc(square(i, j), c, r) || square_hits_disc(square(i, j), {0, 0}, kRobotRadius);
                ASSERT_EQ(at(g, i, j), want ? 1.0f : 0.0f);
            }
        }
    }
}

TEST(Grid, RotatedRobotRotatesGrid) {
    const std::vector<Obstacle> obs{Obstacle::box({1.03, 0.41}, 0.37, 1.13), Obstacle::disc({-0.77, 1.21}, 0.33)};
    const auto g0 = occupancy_grid(obs, {0, 0, 0}, kRobotRadius, ObservationConfig{});
    const auto g1 = occupancy_grid(obs, {0, 0, kPi / 2}, kRobotRadius, ObservationConfig{});
    int mismatches = 0;
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            // A world point at robot-frame (x, y) appears at (y, -x) after the turn.
            if (at(g1, c, N - 1 - r) != at(g0, r, c)) ++mismatches;
        }
    }
    EXPECT_LE(mismatches, 4);
    EXPECT_GT(count_nonzero(g0), 50);
}

TEST(Grid, RaycastModeMarksOnlyHits) {
    ObservationConfig cfg;
    cfg.raycast = true;
    const std::vector<Obstacle> obs{Obstacle::box({1.5, 0}, 1.0, 1.0)};
    const auto dense = occupancy_grid(obs, {0, 0, 0}, kRobotRadius, ObservationConfig{});
    const auto rays = occupancy_grid(obs, {0, 0, 0}, kRobotRadius, cfg);
    EXPECT_LT(count_nonzero(rays), count_nonzero(dense));
    for (std::size_t i = 0; i < rays.size(); ++i) {
        if (rays[i] != 0.0f) {
            ASSERT_EQ(dense[i], 1.0f);
        }
    }
}

TEST(PedMaps, NoPedestriansAllZero) {
    const auto m = pedestrian_maps({}, {1, 2, 3}, ObservationConfig{});
    ASSERT_EQ(m.size(), static_cast<std::size_t>(3 * N * N));
    EXPECT_EQ(count_nonzero(m), 0);
}

TEST(PedMaps, OncomingPedestrianAhead) {
    const std::vector<Pedestrian> peds{ped({1, 0}, {-1, 0})};
    const auto m = pedestrian_maps(peds, {0, 0, 0}, ObservationConfig{});
    int cells = 0;
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            const bool in = square_hits_disc(square(r, c), {1, 0}, kPedestrianRadius);
            ASSERT_EQ(at(m, r, c, 0), in ? 1.0f : 0.0f);
            ASSERT_EQ(at(m, r, c, 1), in ? -1.0f : 0.0f);
            ASSERT_EQ(at(m, r, c, 2), 0.0f);
            cells += in;
        }
    }
    EXPECT_GT(cells, 20);
}

TEST(PedMaps, VelocityIsRobotFrame) {
    // Robot facing +y; pedestrian on its left walking along +y (robot forward).
    const std::vector<Pedestrian> peds{ped({-1, 0}, {0, 0.5})};
    const auto m = pedestrian_maps(peds, {0, 0, kPi / 2}, ObservationConfig{});
    // Robot frame: pedestrian at (0, 1), velocity (0.5, 0).
    const int r = 23, c = 14;  // x in [0, 0.1], y in [0.9, 1.0]
    EXPECT_EQ(at(m, r, c, 0), 1.0f);
    EXPECT_NEAR(at(m, r, c, 1), 0.5f, 1e-6);
    EXPECT_NEAR(at(m, r, c, 2), 0.0f, 1e-6);
}

TEST(PedMaps, StationaryPedestrian) {
    const std::vector<Pedestrian> peds{ped({0.5, -1})};
    const auto m = pedestrian_maps(peds, {0, 0, 0}, ObservationConfig{});
    EXPECT_GT(count_nonzero(std::vector<float>(m.begin(), m.begin() + N * N)), 0);
    EXPECT_EQ(count_nonzero(std::vector<float>(m.begin() + N * N, m.end())), 0);
}

TEST(PedMaps, NearestPedestrianOwnsSharedCells) {
    const std::vector<Pedestrian> peds{ped({1.0, 0}, {-1, 0}), ped({1.35, 0}, {1, 0})};
    const auto m = pedestrian_maps(peds, {0, 0, 0}, ObservationConfig{});
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            if (at(m, r, c, 0) == 0.0f) continue;
            const Square s = square(r, c);
            const Vec2 centre{(s.x0 + s.x1) / 2, (s.y0 + s.y1) / 2};
            const bool first = norm(centre - Vec2{1.0, 0}) <= norm(centre - Vec2{1.35, 0});
            const bool in1 = square_hits_disc(s, {1.0, 0}, 0.3), in2 = square_hits_disc(s, {1.35, 0}, 0.3);
            const float want = (in1 && (!in2 || first)) ? -1.0f : 1.0f;
            ASSERT_EQ(at(m, r, c, 1), want);
        }
    }
}

TEST(PedMaps, WindowEdge) {
    // Window half-side 2.4 m; a 0.3 m disc centred 2.75 m ahead stays outside.
    const std::vector<Pedestrian> out{ped({2.75, 0.05})};
    EXPECT_EQ(count_nonzero(pedestrian_maps(out, {0, 0, 0}, ObservationConfig{})), 0);
    const std::vector<Pedestrian> in{ped({2.65, 0.05})};
    EXPECT_GT(count_nonzero(pedestrian_maps(in, {0, 0, 0}, ObservationConfig{})), 0);
}

TEST(PedMaps, ValueRanges) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-3, 3), v(-0.7, 0.7), a(-kPi, kPi);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Pedestrian> peds;
        for (int i = 0; i < 8; ++i) peds.push_back(ped({u(gen), u(gen)}, {v(gen), v(gen)}));
        const auto m = pedestrian_maps(peds, {u(gen), u(gen), a(gen)}, ObservationConfig{});
        for (int i = 0; i < N * N; ++i) {
            ASSERT_TRUE(m[i] == 0.0f || m[i] == 1.0f);
            ASSERT_LE(std::abs(m[N * N + i]), 1.0f);
            ASSERT_LE(std::abs(m[2 * N * N + i]), 1.0f);
        }
    }
}

TEST(Egocentric, DyadicTranslationIsBitwiseInvariant) {
    // Coordinates on a 1/64 lattice translate without rounding.
    const std::vector<Obstacle> obs{Obstacle::box({1.25, 0.5}, 0.5, 0.75), Obstacle::disc({-1.5, 1.0}, 0.375)};
    const std::vector<Pedestrian> peds{ped({0.75, -1.25}, {0.5, 0.25}), ped({-1.0, -0.5}, {0, -0.75})};
    const Pose robot{0.125, -0.0625, 0.0};
    const auto base = observe(obs, peds, robot, kRobotRadius, {4, 2}, ObservationConfig{});
    const Vec2 t{17.0, -9.5};
    std::vector<Obstacle> obs_t{Obstacle::box(Vec2{1.25, 0.5} + t, 0.5, 0.75), Obstacle::disc(Vec2{-1.5, 1.0} + t, 0.375)};
    std::vector<Pedestrian> peds_t = peds;
    for (auto& p : peds_t) p.position += t;
    const auto moved = observe(obs_t, peds_t, {robot.x + t.x, robot.y + t.y, robot.theta}, kRobotRadius, Vec2{4, 2} + t,
                               ObservationConfig{});
    EXPECT_EQ(base, moved);
}

TEST(Egocentric, RandomRigidMotionChangesAlmostNothing) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(-2, 2), far(-50, 50), a(-kPi, kPi);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Pedestrian> peds;
        for (int i = 0; i < 4; ++i) peds.push_back(ped({u(gen), u(gen)}, {u(gen) / 3, u(gen) / 3}));
        const std::vector<Obstacle> obs{Obstacle::disc({u(gen), u(gen)}, 0.4)};
        const Pose robot{0, 0, 0};
        const auto base = observe(obs, peds, robot, kRobotRadius, {3, 1}, ObservationConfig{});

        const double phi = a(gen), c = std::cos(phi), s = std::sin(phi);
        const Vec2 t{far(gen), far(gen)};
        auto move = [&](Vec2 p) { return Vec2{c * p.x - s * p.y, s * p.x + c * p.y} + t; };
        auto turn = [&](Vec2 v) { return Vec2{c * v.x - s * v.y, s * v.x + c * v.y}; };
        std::vector<Pedestrian> peds_m = peds;
        for (auto& p : peds_m) {
            p.position = move(p.position);
            p.velocity = turn(p.velocity);
        }
        const std::vector<Obstacle> obs_m{Obstacle::disc(move(std::get<Disc>(obs[0].shape).center), 0.4)};
        const auto moved = observe(obs_m, peds_m, {t.x, t.y, normalize_angle(phi)}, kRobotRadius, move({3, 1}),
                                   ObservationConfig{});
        int grid_diff = 0, ped_diff = 0;
        for (std::size_t i = 0; i < base.grid.size(); ++i) grid_diff += base.grid[i] != moved.grid[i];
        for (std::size_t i = 0; i < base.ped_maps.size(); ++i) ped_diff += std::abs(base.ped_maps[i] - moved.ped_maps[i]) > 1e-5;
        EXPECT_LE(grid_diff, 2);  // cells grazing a boundary can flip under rounding
        EXPECT_LE(ped_diff, 6);
        EXPECT_NEAR(base.goal_distance, moved.goal_distance, 1e-9);
        EXPECT_NEAR(base.heading_error, moved.heading_error, 1e-9);
    }
}

TEST(RelativeGoal, AtRobot) {
    const RelativeGoal g = relative_goal({1, 1, 0.4}, {1, 1});
    EXPECT_EQ(g.distance, 0.0);
    EXPECT_EQ(g.heading_error, 0.0);
}

TEST(RelativeGoal, DeadAhead) {
    const RelativeGoal g = relative_goal({0, 0, 0}, {2, 0});
    EXPECT_EQ(g.distance, 2.0);
    EXPECT_EQ(g.heading_error, 0.0);
}

TEST(RelativeGoal, ToTheLeft) {
    const RelativeGoal g = relative_goal({0, 0, 0}, {0, 1});
    EXPECT_EQ(g.distance, 1.0);
    EXPECT_NEAR(g.heading_error, kPi / 2, 1e-15);
}

TEST(RelativeGoal, BehindIsPi) {
    const RelativeGoal g = relative_goal({0, 0, 0}, {-1, 0});
    EXPECT_EQ(g.heading_error, kPi);
}

TEST(Config, Validation) {
    ObservationConfig c;
    c.size = 47;
    EXPECT_THROW(validate(c), ValidationError);
    c.size = 48;
    c.resolution = 0;
    EXPECT_THROW(validate(c), ValidationError);
}

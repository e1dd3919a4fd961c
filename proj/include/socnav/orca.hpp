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

/// Optimal reciprocal collision avoidance in velocity space.
///
/// Every neighbor (agent or static obstacle) contributes a half-plane of
/// permitted velocities. The new velocity is the point of the intersection of
/// all half-planes and the max-speed disc that is closest to the preferred
/// velocity (solve_lp2). When the intersection is empty, solve_lp3 instead
/// minimizes the largest penetration into the agent half-planes while keeping
/// the obstacle half-planes hard.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "socnav/core.hpp"

namespace socnav::orca {

/// Half-plane {v : det(direction, v - point) >= 0}; direction is unit length.
struct OrcaLine {
    Vec2 point;
    Vec2 direction;
};

/// True when `v` lies in the permitted half-plane of `line`.
inline bool permits(const OrcaLine& line, const Vec2& v) { return det(line.direction, v - line.point) >= 0.0; }
/// Signed distance by which `v` penetrates the forbidden side (positive = violated).
inline double penetration(const OrcaLine& line, const Vec2& v) { return det(line.direction, line.point - v); }

struct AvoidanceParams {
    double time_horizon_agents = 2.0;
    double time_horizon_obstacles = 1.0;
    double neighbor_range = 5.0;
    int max_neighbors = 10;

    bool operator==(const AvoidanceParams&) const = default;
};

/// Throws ValidationError unless every field is positive.
void validate(const AvoidanceParams& params);

/// Kinematic state of a holonomic disc agent as seen by the solver.
struct AgentState {
    Vec2 position;
    Vec2 velocity;
    Vec2 preferred_velocity;
    double radius = kPedestrianRadius;
    double max_speed = kPedestrianMaxSpeed;
};

/// Smallest change `u` of the relative velocity (self - other) that leaves the
/// velocity obstacle truncated at horizon `tau` (or `dt` when already overlapping).
/// Exact head-on ties resolve toward the agent's left.
Vec2 escape_vector(const AgentState& self, const AgentState& other, double tau, double dt);

/// Constraint induced by `other`: boundary through self.velocity + responsibility * u,
/// normal along u.
OrcaLine agent_orca_line(const AgentState& self, const AgentState& other, double tau, double dt,
                         double responsibility);

/// Constraints induced by a static obstacle; the agent takes all of the
/// avoidance. Empty when the obstacle cannot be reached within `tau_obs`.
std::vector<OrcaLine> obstacle_orca_lines(const AgentState& self, const Obstacle& obstacle, double tau_obs,
                                          double dt = kDefaultDt);

struct Lp2Result {
    Vec2 velocity;
    /// lines.size() on success, else the index of the first line that emptied
    /// the feasible region.
    std::size_t fail_index;
};

Lp2Result solve_lp2(std::span<const OrcaLine> lines, double max_speed, const Vec2& preferred,
                    bool optimize_direction);

/// `current` is the lp2 output at the moment it failed.
Vec2 solve_lp3(std::span<const OrcaLine> lines, std::size_t num_obstacle_lines, std::size_t fail_index,
               double max_speed, const Vec2& current);

/// Obstacle lines first, then one line per neighbor in ascending center
/// distance (index breaks ties, at most max_neighbors, within neighbor_range).
/// `responsibility` is aligned with `neighbors`.
std::vector<OrcaLine> build_lines(const AgentState& self, std::span<const AgentState> neighbors,
                                  std::span<const Obstacle> obstacles, const AvoidanceParams& params, double dt,
                                  std::span<const double> responsibility, std::size_t* num_obstacle_lines = nullptr);

Vec2 new_velocity(const AgentState& self, std::span<const AgentState> neighbors,
                  std::span<const Obstacle> obstacles, const AvoidanceParams& params, double dt,
                  std::span<const double> responsibility);

}  // namespace socnav::orca

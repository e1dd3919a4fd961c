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

/// Fixed-threshold beep rules.
///
///   FD:  beep iff d_min < d_theta, with d_min the surface distance to the
///        nearest pedestrian.
///   FDV: beep iff some pedestrian p has |P_p| < d_theta, |V_p| > v_theta and
///        P_p . V_p > 0, where P_p points from the pedestrian to the robot and
///        V_p is the pedestrian's world-frame velocity (i.e. p approaches).

#pragma once

#include <span>
#include <vector>

#include "socnav/core.hpp"

namespace socnav::interaction {

struct InteractionParams {
    double d_theta = 1.0;  ///< m
    double v_theta = 0.5;  ///< m/s

    bool operator==(const InteractionParams&) const = default;
};

void validate(const InteractionParams& params);

bool fd_policy(double d_min, const InteractionParams& params);

struct RelativePedestrian {
    Vec2 to_robot;  ///< robot position minus pedestrian position
    Vec2 velocity;  ///< world frame
};

bool fdv_policy(std::span<const RelativePedestrian> pedestrians, const InteractionParams& params);

std::vector<RelativePedestrian> relative_pedestrians(const Vec2& robot_pos, std::span<const Pedestrian> pedestrians);

}  // namespace socnav::interaction

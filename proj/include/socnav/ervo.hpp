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

/// Emotional layer over ORCA pedestrians.
///
/// A beep raises the emotion of pedestrians within the audible radius with
/// linear distance attenuation. Emotion decays exponentially and spreads to
/// calmer neighbors (mean-field contagion). Emotion only changes how a
/// pedestrian treats the robot: a larger clearance, a larger share of the
/// avoidance, and a bias of the preferred velocity away from the robot.

#pragma once

#include <span>
#include <vector>

#include "socnav/core.hpp"
#include "socnav/orca.hpp"

namespace socnav::ervo {

struct EmotionParams {
    double audible_radius = 2.0;       ///< m
    double peak_gain = 0.8;            ///< emotion jump at the beep source
    double decay_rate = 0.5;           ///< 1/s
    double contagion_rate = 0.3;       ///< 1/s
    double contagion_radius = 1.5;     ///< m
    double responsibility_gain = 0.5;
    double radius_gain = 0.2;          ///< m
    double repulsion_gain = 0.3;       ///< m/s

    bool operator==(const EmotionParams&) const = default;

    /// Every parameter zero: beeps have no effect at all.
    static EmotionParams inert() { return {0, 0, 0, 0, 0, 0, 0, 0}; }
};

/// Throws ValidationError on any negative or non-finite parameter.
void validate(const EmotionParams& params);

struct BeepEvent {
    Vec2 source;
    int time = 0;
    double audible_radius = 2.0;

    bool operator==(const BeepEvent&) const = default;
};

std::vector<Pedestrian> apply_beep(std::vector<Pedestrian> pedestrians, const BeepEvent& event,
                                   const EmotionParams& params);

/// One simultaneous decay + contagion update over `dt` seconds.
std::vector<Pedestrian> decay_and_contagion(std::vector<Pedestrian> pedestrians, double dt,
                                            const EmotionParams& params);

struct Modulation {
    double extra_radius = 0.0;             ///< added to the robot radius in this pedestrian's view
    double responsibility_vs_robot = 0.5;
    Vec2 repulsion_bias;                   ///< added to the preferred velocity
};

Modulation emotion_modulation(const Pedestrian& pedestrian, const Vec2& robot_pos, const EmotionParams& params);

/// Goal-seeking preferred velocity at max speed, slowing to land exactly on the goal.
Vec2 goal_velocity(const Vec2& position, const Vec2& goal, double max_speed, double dt);

/// ORCA velocities of every pedestrian against the same snapshot. The robot is
/// treated as one more neighbor whose radius and responsibility are modulated
/// by each pedestrian's emotion.
std::vector<Vec2> pedestrian_velocities(std::span<const Pedestrian> pedestrians, const orca::AgentState& robot,
                                        std::span<const Obstacle> obstacles, const orca::AvoidanceParams& avoidance,
                                        const EmotionParams& emotion, double dt);

}  // namespace socnav::ervo

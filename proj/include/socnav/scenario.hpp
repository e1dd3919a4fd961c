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

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "socnav/core.hpp"
#include "socnav/ervo.hpp"
#include "socnav/interaction.hpp"
#include "socnav/observation.hpp"
#include "socnav/orca.hpp"

namespace socnav {

inline constexpr int kScenarioFormatVersion = 1;

struct Bounds {
    Vec2 min{-5.0, -5.0};
    Vec2 max{5.0, 5.0};

    bool contains(const Vec2& p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
    bool operator==(const Bounds&) const = default;
};

/// Everything besides geometry that determines an episode.
struct ScenarioParams {
    orca::AvoidanceParams avoidance;
    ervo::EmotionParams emotion;
    interaction::InteractionParams interaction;
    obs::ObservationConfig observation;
    ActionMode action_mode = ActionMode::Continuous;
    double dt = kDefaultDt;
    int max_steps = 200;
    double goal_tolerance = 0.3;
    double robot_radius = kRobotRadius;
    double pedestrian_radius = kPedestrianRadius;
    double pedestrian_max_speed = kPedestrianMaxSpeed;

    bool operator==(const ScenarioParams&) const = default;
};

struct PedestrianSpec {
    Vec2 start;
    Vec2 goal;
    bool operator==(const PedestrianSpec&) const = default;
};

struct Scenario {
    std::string kind = "custom";  ///< random | circular | canonical | custom
    std::uint64_t seed = 0;
    Pose robot_start;
    Vec2 robot_goal;
    std::vector<PedestrianSpec> pedestrians;
    std::vector<Obstacle> obstacles;
    Bounds bounds;
    ScenarioParams params;

    bool operator==(const Scenario&) const = default;
};

/// Throws ValidationError: overlapping start discs, starts/goals outside the
/// bounds, invalid obstacles or parameters.
void validate(const Scenario& scenario);

/// Minimum surface clearance the generators keep between entities.
inline constexpr double kPlacementClearance = 0.1;
inline constexpr int kMaxPlacementAttempts = 10000;

struct RandomScenarioOptions {
    int pedestrians = 8;
    int obstacles = 4;
    Bounds bounds;
    double min_goal_distance = 3.0;
};

/// Uniform rejection sampling of obstacles, robot and pedestrians.
/// Throws PlacementError naming the entity after kMaxPlacementAttempts rejections.
Scenario gen_random(std::uint64_t seed, const RandomScenarioOptions& options = {},
                    const ScenarioParams& params = {});

struct CircularScenarioOptions {
    int pedestrians = 8;
    double radius_min = 3.0;
    double radius_max = 5.0;
};

/// Robot (slot 0) and pedestrians on a circle of random radius centered at the
/// origin, at jittered angles; every goal is the antipodal point.
Scenario gen_circular(std::uint64_t seed, const CircularScenarioOptions& options = {},
                      const ScenarioParams& params = {});

/// The robot drives along +x toward four pedestrians crossing its path, one
/// behind another; small seeded jitter on the pedestrians' starts.
Scenario gen_canonical_beep(std::uint64_t seed, const ScenarioParams& params = {});

std::string scenario_to_json(const Scenario& scenario);
/// Throws ParseError (JSON path or line:column) on malformed input or unknown
/// fields and ValidationError when the content breaks an invariant.
Scenario scenario_from_json(const std::string& text);

void save_scenario(const Scenario& scenario, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace socnav

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

/// Episode state machine.
///
/// One tick, in order:
///   1. beep: enqueue a BeepEvent at the robot and raise nearby emotions
///   2. emotion decay and contagion
///   3. pedestrian ORCA velocities, all against the pre-tick snapshot
///   4. integrate pedestrians
///   5. integrate the robot (closed-form unicycle)
///   6. collision / goal / timeout checks
/// Collisions take precedence over reaching the goal in the same tick.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "socnav/core.hpp"
#include "socnav/error.hpp"
#include "socnav/ervo.hpp"
#include "socnav/observation.hpp"
#include "socnav/scenario.hpp"

namespace socnav {

enum class Status { Running, Success, PedCollision, ObstacleCollision, Timeout, Aborted };

std::string_view to_string(Status status);
Status parse_status(std::string_view text);

struct RobotState {
    Pose pose;
    ActionCommand command;  ///< command applied during the last tick
    double radius = kRobotRadius;
    Vec2 goal;

    Vec2 velocity() const { return command.v * pose.heading(); }
    bool operator==(const RobotState&) const = default;
};

struct WorldState {
    int step = 0;
    RobotState robot;
    std::vector<Pedestrian> pedestrians;
    std::vector<Obstacle> obstacles;
    std::vector<ervo::BeepEvent> beeps;  ///< beeps emitted so far
    ScenarioParams params;

    bool operator==(const WorldState&) const = default;
};

WorldState make_world(const Scenario& scenario);

struct TickEvents {
    bool beeped = false;
    bool ped_collision = false;
    bool obstacle_collision = false;
    bool reached_goal = false;
    bool timeout = false;
    Status status = Status::Running;
};

/// Signed surface distance from the robot to its nearest pedestrian
/// (negative when interpenetrating, +infinity without pedestrians).
double robot_pedestrian_clearance(const WorldState& world);
/// Signed surface distance from the robot to its nearest obstacle.
double robot_obstacle_clearance(const WorldState& world);
double goal_distance(const WorldState& world);

/// Terminal status implied by the current state (Running if none).
Status evaluate_status(const WorldState& world);

/// Advances `world` in place. Throws ValidationError (and leaves `world`
/// untouched) when the action is invalid for the declared mode.
TickEvents advance(WorldState& world, const ActionCommand& action);

/// Value form of advance().
std::pair<WorldState, TickEvents> tick(WorldState world, const ActionCommand& action);

obs::ObservationFrame observe(const WorldState& world);

// ---------------------------------------------------------------------------
// Controllers

/// Thrown by controllers backed by an external process that stopped answering.
class ControllerAborted : public Error {
public:
    using Error::Error;
};

class NavigationController {
public:
    virtual ~NavigationController() = default;
    /// Command for the coming tick. `frame` is null unless needs_observation().
    /// A returned beep flag is honored (external controllers may beep).
    virtual ActionCommand act(const WorldState& world, const obs::ObservationFrame* frame) = 0;
    virtual bool needs_observation() const { return false; }
    virtual void begin_episode(const WorldState& /*world*/, std::uint64_t /*seed*/) {}
    /// Called once with the terminal state.
    virtual void end_episode(const WorldState& /*world*/, Status /*status*/) {}
};

class InteractionPolicy {
public:
    virtual ~InteractionPolicy() = default;
    /// Consulted after the navigation command for this tick is known.
    virtual bool beep(const WorldState& world, const obs::ObservationFrame* frame, const ActionCommand& next) = 0;
    virtual bool needs_observation() const { return false; }
};

/// Holonomic ORCA toward the goal mapped onto differential drive:
///   omega = clamp(k_theta * e),  v = clamp(|v_orca| * max(0, cos e)),
/// e being the heading error of the ORCA velocity.
class OrcaRobotController : public NavigationController {
public:
    explicit OrcaRobotController(double k_theta = 2.0) : k_theta_(k_theta) {}
    ActionCommand act(const WorldState& world, const obs::ObservationFrame* frame) override;
    /// The holonomic velocity before the differential-drive mapping.
    Vec2 holonomic_velocity(const WorldState& world) const;

private:
    double k_theta_;
};

/// Replays a fixed command list; holds the last command once exhausted.
class ScriptedController : public NavigationController {
public:
    explicit ScriptedController(std::vector<ActionCommand> actions) : actions_(std::move(actions)) {}
    ActionCommand act(const WorldState& world, const obs::ObservationFrame* frame) override;

private:
    std::vector<ActionCommand> actions_;
};

class NoBeepPolicy : public InteractionPolicy {
public:
    bool beep(const WorldState&, const obs::ObservationFrame*, const ActionCommand&) override { return false; }
};

class FdPolicy : public InteractionPolicy {
public:
    explicit FdPolicy(interaction::InteractionParams params) : params_(params) {}
    bool beep(const WorldState& world, const obs::ObservationFrame* frame, const ActionCommand& next) override;

private:
    interaction::InteractionParams params_;
};

class FdvPolicy : public InteractionPolicy {
public:
    explicit FdvPolicy(interaction::InteractionParams params) : params_(params) {}
    bool beep(const WorldState& world, const obs::ObservationFrame* frame, const ActionCommand& next) override;

private:
    interaction::InteractionParams params_;
};

/// Beeps exactly on the listed steps.
class BeepAtStepsPolicy : public InteractionPolicy {
public:
    explicit BeepAtStepsPolicy(std::vector<int> steps) : steps_(std::move(steps)) {}
    bool beep(const WorldState& world, const obs::ObservationFrame* frame, const ActionCommand& next) override;

private:
    std::vector<int> steps_;
};

// ---------------------------------------------------------------------------
// Episodes

struct TrajectoryRow {
    int step = 0;
    Pose pose;
    ActionCommand command;
    std::vector<Pedestrian> pedestrians;  ///< position, velocity, emotion are recorded

    bool operator==(const TrajectoryRow&) const = default;
};

/// Recorded episode plus the static context needed to draw it.
struct Trajectory {
    Vec2 robot_goal;
    double robot_radius = kRobotRadius;
    double pedestrian_radius = kPedestrianRadius;
    double audible_radius = 2.0;
    std::vector<Vec2> pedestrian_goals;
    std::vector<Obstacle> obstacles;
    std::vector<TrajectoryRow> rows;

    bool operator==(const Trajectory&) const = default;
};

struct EpisodeResult {
    Status status = Status::Running;
    int steps = 0;
    int beep_steps = 0;
    /// Episode minimum of the signed robot-pedestrian surface distance.
    double min_surface_distance = kInfiniteDistance;
    double final_goal_distance = 0.0;
    /// Net displacement < 0.5 m over the final 50 steps.
    bool stuck = false;
    std::vector<ActionCommand> actions;  ///< the action applied on every tick
    std::optional<Trajectory> trajectory;

    bool operator==(const EpisodeResult&) const = default;
};

inline constexpr double kStuckDisplacement = 0.5;
inline constexpr int kStuckWindow = 50;

EpisodeResult run_episode(const Scenario& scenario, NavigationController& nav, InteractionPolicy& policy,
                          std::uint64_t seed, bool record);

/// Same loop from an arbitrary state (used by counterfactual rollouts).
EpisodeResult run_from(WorldState world, NavigationController& nav, InteractionPolicy& policy, std::uint64_t seed,
                       bool record, int max_ticks = -1);

struct Metrics {
    int episodes = 0;  ///< non-aborted
    int aborted = 0;
    int successes = 0;
    int ped_collisions = 0;
    int obstacle_collisions = 0;
    int timeouts = 0;
    long long total_steps = 0;
    long long beep_steps = 0;
    double success_rate = 0.0;
    double ped_collision_rate = 0.0;
    double obstacle_collision_rate = 0.0;
    double timeout_rate = 0.0;
    double beep_rate = 0.0;
    double mean_steps_on_success = 0.0;
};

/// Throws ValidationError on an empty list (or only aborted episodes).
Metrics aggregate(std::span<const EpisodeResult> results);

void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path);
std::string trajectory_to_csv(const Trajectory& trajectory);
/// Throws ParseError naming the line on malformed input.
Trajectory trajectory_from_csv(const std::string& text);
Trajectory read_trajectory(const std::filesystem::path& path);

}  // namespace socnav

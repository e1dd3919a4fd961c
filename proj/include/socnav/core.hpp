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

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace socnav {

inline constexpr double kPi = std::numbers::pi;

/// 2D vector; meters for positions, m/s for velocities.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return {s * v.x, s * v.y}; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// 2D cross product (z of a x b).
constexpr double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
constexpr double abs_sq(const Vec2& v) { return dot(v, v); }
inline double norm(const Vec2& v) { return std::sqrt(abs_sq(v)); }
inline Vec2 normalized(const Vec2& v) { return v / norm(v); }
/// Counter-clockwise perpendicular.
constexpr Vec2 perp(const Vec2& v) { return {-v.y, v.x}; }

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Maps any finite angle into (-pi, pi].
inline double normalize_angle(double theta) {
    double a = std::remainder(theta, 2.0 * kPi);
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Vec2 position() const { return {x, y}; }
    Vec2 heading() const { return {std::cos(theta), std::sin(theta)}; }
    bool operator==(const Pose&) const = default;
};

/// World point expressed in the robot frame (robot at origin, heading along +x).
Vec2 to_robot_frame(const Vec2& p_world, const Pose& robot);
Vec2 from_robot_frame(const Vec2& p_robot, const Pose& robot);
/// Rotates a free vector (velocity) into the robot frame.
Vec2 rotate_to_robot_frame(const Vec2& v_world, const Pose& robot);

/// Exact closed-form unicycle integration over `dt` seconds.
Pose step_unicycle(const Pose& pose, double v, double omega, double dt);

// ---------------------------------------------------------------------------
// Obstacles

struct Disc {
    Vec2 center;
    double radius = 0.0;
    bool operator==(const Disc&) const = default;
};

/// Convex polygon, vertices in counter-clockwise order.
struct Polygon {
    std::vector<Vec2> vertices;
    bool operator==(const Polygon&) const = default;
};

struct Obstacle {
    std::variant<Disc, Polygon> shape;

    static Obstacle disc(Vec2 center, double radius) { return {Disc{center, radius}}; }
    /// Axis-aligned box given by its center and side lengths.
    static Obstacle box(Vec2 center, double width, double height);

    bool is_disc() const { return std::holds_alternative<Disc>(shape); }
    bool operator==(const Obstacle&) const = default;
};

/// Throws ValidationError unless the disc radius is positive or the polygon is
/// convex, counter-clockwise and has at least three vertices.
void validate(const Obstacle& obstacle);

/// Euclidean distance from `p` to the obstacle; 0 when `p` is inside.
double distance_to(const Obstacle& obstacle, const Vec2& p);
bool contains(const Obstacle& obstacle, const Vec2& p);
/// Unit vector pointing from the obstacle surface toward `p`; when `p` is inside
/// it is the outward normal of the nearest boundary. Falls back to +x.
Vec2 outward_normal(const Obstacle& obstacle, const Vec2& p);
/// Smallest axis-aligned box containing the obstacle: (min, max).
std::pair<Vec2, Vec2> bounding_box(const Obstacle& obstacle);

// ---------------------------------------------------------------------------
// Agents

/// Defaults shared by robot and pedestrians.
inline constexpr double kPedestrianRadius = 0.3;
inline constexpr double kPedestrianMaxSpeed = 1.0;
inline constexpr double kRobotRadius = 0.3;
inline constexpr double kDefaultDt = 0.1;

struct Pedestrian {
    Vec2 position;
    Vec2 velocity;
    Vec2 goal;
    double radius = kPedestrianRadius;
    double max_speed = kPedestrianMaxSpeed;
    /// In [0, 1].
    double emotion = 0.0;

    bool operator==(const Pedestrian&) const = default;
};

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Surface-to-surface distance from the robot to its nearest pedestrian, clamped
/// at 0; +infinity for an empty crowd.
double min_pedestrian_distance(const Vec2& robot_pos, std::span<const Pedestrian> pedestrians,
                               double robot_radius = kRobotRadius);

// ---------------------------------------------------------------------------
// Actions

enum class ActionMode { Discrete, Continuous };

std::string_view to_string(ActionMode mode);
ActionMode parse_action_mode(std::string_view text);

struct ActionBounds {
    double v_max;
    double omega_max;
};

inline constexpr double kDiscreteLinear[] = {0.0, 1.0};
inline constexpr double kDiscreteAngular[] = {-0.8, -0.4, 0.0, 0.4, 0.8};

ActionBounds action_bounds(ActionMode mode);

struct ActionCommand {
    double v = 0.0;
    double omega = 0.0;
    bool beep = false;

    bool operator==(const ActionCommand&) const = default;
};

/// Throws ValidationError naming the violated bound. Discrete values are matched
/// within 1e-9 of the allowed set; the returned command carries the exact set values.
ActionCommand validate_action(const ActionCommand& action, ActionMode mode);

/// Clamps (continuous) or snaps to the nearest allowed value (discrete).
ActionCommand quantize_action(double v, double omega, bool beep, ActionMode mode);

}  // namespace socnav

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

#include "socnav/core.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "socnav/error.hpp"

namespace socnav {

Vec2 to_robot_frame(const Vec2& p_world, const Pose& robot) {
    return rotate_to_robot_frame(p_world - robot.position(), robot);
}

Vec2 rotate_to_robot_frame(const Vec2& v_world, const Pose& robot) {
    const double c = std::cos(robot.theta);
    const double s = std::sin(robot.theta);
    return {c * v_world.x + s * v_world.y, -s * v_world.x + c * v_world.y};
}

Vec2 from_robot_frame(const Vec2& p_robot, const Pose& robot) {
    const double c = std::cos(robot.theta);
    const double s = std::sin(robot.theta);
    return {robot.x + c * p_robot.x - s * p_robot.y, robot.y + s * p_robot.x + c * p_robot.y};
}

Pose step_unicycle(const Pose& pose, double v, double omega, double dt) {
    if (std::abs(omega) < 1e-9) {
        return {pose.x + v * dt * std::cos(pose.theta), pose.y + v * dt * std::sin(pose.theta),
                normalize_angle(pose.theta + omega * dt)};
    }
    const double theta1 = pose.theta + omega * dt;
    const double r = v / omega;
    return {pose.x + r * (std::sin(theta1) - std::sin(pose.theta)),
            pose.y - r * (std::cos(theta1) - std::cos(pose.theta)), normalize_angle(theta1)};
}

// ---------------------------------------------------------------------------

Obstacle Obstacle::box(Vec2 center, double width, double height) {
    const double hw = 0.5 * width;
    const double hh = 0.5 * height;
    return {Polygon{{{center.x - hw, center.y - hh},
                     {center.x + hw, center.y - hh},
                     {center.x + hw, center.y + hh},
                     {center.x - hw, center.y + hh}}}};
}

void validate(const Obstacle& obstacle) {
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) {
        if (!(d->radius > 0.0) || !is_finite(d->center) || !std::isfinite(d->radius)) {
            throw ValidationError(fmt::format("disc obstacle radius must be positive and finite (got {})", d->radius));
        }
        return;
    }
    const auto& verts = std::get<Polygon>(obstacle.shape).vertices;
    const std::size_t n = verts.size();
    if (n < 3) throw ValidationError(fmt::format("polygon obstacle needs at least 3 vertices (got {})", n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_finite(verts[i])) throw ValidationError(fmt::format("polygon vertex {} is not finite", i));
        const Vec2& a = verts[i];
        const Vec2& b = verts[(i + 1) % n];
        const Vec2& c = verts[(i + 2) % n];
        if (det(b - a, c - b) <= 0.0) {
            throw ValidationError(
                fmt::format("polygon obstacle must be convex and counter-clockwise (vertex {} turns clockwise)", (i + 1) % n));
        }
    }
}

namespace {

/// Closest point on segment [a, b] to p.
Vec2 closest_on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    const Vec2 ab = b - a;
    const double len_sq = abs_sq(ab);
    if (len_sq <= 0.0) return a;
    const double t = std::clamp(dot(p - a, ab) / len_sq, 0.0, 1.0);
    return a + t * ab;
}

bool polygon_contains(const std::vector<Vec2>& verts, const Vec2& p) {
    const std::size_t n = verts.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (det(verts[(i + 1) % n] - verts[i], p - verts[i]) < 0.0) return false;
    }
    return true;
}

}  // namespace

bool contains(const Obstacle& obstacle, const Vec2& p) {
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) return abs_sq(p - d->center) <= d->radius * d->radius;
    return polygon_contains(std::get<Polygon>(obstacle.shape).vertices, p);
}

double distance_to(const Obstacle& obstacle, const Vec2& p) {
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) return std::max(0.0, norm(p - d->center) - d->radius);
    const auto& verts = std::get<Polygon>(obstacle.shape).vertices;
    if (polygon_contains(verts, p)) return 0.0;
    double best = kInfiniteDistance;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        best = std::min(best, abs_sq(p - closest_on_segment(verts[i], verts[(i + 1) % verts.size()], p)));
    }
    return std::sqrt(best);
}

Vec2 outward_normal(const Obstacle& obstacle, const Vec2& p) {
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) {
        const Vec2 rel = p - d->center;
        return abs_sq(rel) > 0.0 ? normalized(rel) : Vec2{1.0, 0.0};
    }
    const auto& verts = std::get<Polygon>(obstacle.shape).vertices;
    const std::size_t n = verts.size();
    if (polygon_contains(verts, p)) {
        // Nearest edge wins; its outward normal points right of the CCW edge.
        double best = kInfiniteDistance;
        Vec2 normal{1.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 edge = verts[(i + 1) % n] - verts[i];
            const Vec2 out = normalized(Vec2{edge.y, -edge.x});
            const double depth = dot(verts[i] - p, out);
            if (depth < best) {
                best = depth;
                normal = out;
            }
        }
        return normal;
    }
    double best = kInfiniteDistance;
    Vec2 closest = verts[0];
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 c = closest_on_segment(verts[i], verts[(i + 1) % n], p);
        const double dsq = abs_sq(p - c);
        if (dsq < best) {
            best = dsq;
            closest = c;
        }
    }
    return best > 0.0 ? normalized(p - closest) : Vec2{1.0, 0.0};
}

std::pair<Vec2, Vec2> bounding_box(const Obstacle& obstacle) {
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) {
        return {d->center - Vec2{d->radius, d->radius}, d->center + Vec2{d->radius, d->radius}};
    }
    const auto& verts = std::get<Polygon>(obstacle.shape).vertices;
    Vec2 lo = verts[0];
    Vec2 hi = verts[0];
    for (const Vec2& v : verts) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------

double min_pedestrian_distance(const Vec2& robot_pos, std::span<const Pedestrian> pedestrians, double robot_radius) {
    double best = kInfiniteDistance;
    for (const Pedestrian& p : pedestrians) {
        best = std::min(best, norm(p.position - robot_pos) - robot_radius - p.radius);
    }
    return std::max(0.0, best);
}

// ---------------------------------------------------------------------------

std::string_view to_string(ActionMode mode) {
    return mode == ActionMode::Discrete ? "discrete" : "continuous";
}

ActionMode parse_action_mode(std::string_view text) {
    if (text == "discrete") return ActionMode::Discrete;
    if (text == "continuous") return ActionMode::Continuous;
    throw ValidationError(fmt::format("unknown action mode '{}' (expected discrete or continuous)", text));
}

ActionBounds action_bounds(ActionMode mode) {
    return mode == ActionMode::Discrete ? ActionBounds{1.0, 0.8} : ActionBounds{0.6, 0.9};
}

namespace {

bool in_set(double value, std::span<const double> allowed) {
    return std::any_of(allowed.begin(), allowed.end(), [&](double a) { return std::abs(value - a) <= 1e-9; });
}

double nearest_in_set(double value, std::span<const double> allowed) {
    double best = allowed[0];
    for (double a : allowed) {
        if (std::abs(value - a) < std::abs(value - best)) best = a;
    }
    return best;
}

}  // namespace

ActionCommand validate_action(const ActionCommand& action, ActionMode mode) {
    if (!std::isfinite(action.v) || !std::isfinite(action.omega)) {
        throw ValidationError("action components must be finite");
    }
    if (mode == ActionMode::Discrete) {
        if (!in_set(action.v, kDiscreteLinear)) {
            throw ValidationError(fmt::format("v={} not in discrete set {{0.0, 1.0}}", action.v));
        }
        if (!in_set(action.omega, kDiscreteAngular)) {
            throw ValidationError(fmt::format("w={} not in discrete set {{-0.8, -0.4, 0.0, 0.4, 0.8}}", action.omega));
        }
        return {nearest_in_set(action.v, kDiscreteLinear), nearest_in_set(action.omega, kDiscreteAngular), action.beep};
    }
    const ActionBounds b = action_bounds(mode);
    if (action.v < 0.0 || action.v > b.v_max) {
        throw ValidationError(fmt::format("v={} outside continuous bound [0, {}]", action.v, b.v_max));
    }
    if (std::abs(action.omega) > b.omega_max) {
        throw ValidationError(fmt::format("w={} outside continuous bound [-{}, {}]", action.omega, b.omega_max, b.omega_max));
    }
    return action;
}

ActionCommand quantize_action(double v, double omega, bool beep, ActionMode mode) {
    if (mode == ActionMode::Discrete) {
        return {nearest_in_set(v, kDiscreteLinear), nearest_in_set(omega, kDiscreteAngular), beep};
    }
    const ActionBounds b = action_bounds(mode);
    return {std::clamp(v, 0.0, b.v_max), std::clamp(omega, -b.omega_max, b.omega_max), beep};
}

}  // namespace socnav

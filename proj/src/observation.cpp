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

#include "socnav/observation.hpp"

#include <algorithm>

#include "socnav/error.hpp"

namespace socnav::obs {

void validate(const ObservationConfig& config) {
    if (config.size < 2 || config.size % 2 != 0) throw ValidationError("observation size must be even and >= 2");
    if (!(config.resolution > 0.0)) throw ValidationError("observation resolution must be positive");
    if (config.beams < 1) throw ValidationError("raycast beam count must be >= 1");
}

ObservationFrame ObservationFrame::zeros(int size) {
    ObservationFrame f;
    f.size = size;
    f.grid.assign(static_cast<std::size_t>(size) * size, 0.0f);
    f.ped_maps.assign(static_cast<std::size_t>(kPedChannels) * size * size, 0.0f);
    return f;
}

Vec2 cell_center(int row, int col, const ObservationConfig& config) {
    const double half = 0.5 * config.size;
    return {(half - row - 0.5) * config.resolution, (half - col - 0.5) * config.resolution};
}

namespace {

struct CellBox {
    double x_lo, x_hi, y_lo, y_hi;
};

CellBox cell_box(int row, int col, const ObservationConfig& config) {
    const double half = 0.5 * config.size;
    const double res = config.resolution;
    return {(half - row - 1) * res, (half - row) * res, (half - col - 1) * res, (half - col) * res};
}

struct CellRange {
    int r0, r1, c0, c1;  // inclusive
    bool empty() const { return r0 > r1 || c0 > c1; }
};

/// Cells whose squares can intersect the robot-frame box [lo, hi].
CellRange cells_touching(const Vec2& lo, const Vec2& hi, const ObservationConfig& config) {
    const double half = 0.5 * config.size;
    const double res = config.resolution;
    const auto clamp_index = [&](double v) {
        return static_cast<int>(std::clamp(v, -1.0, static_cast<double>(config.size)));
    };
    return {clamp_index(std::floor(half - 1 - hi.x / res)), std::min(config.size - 1, clamp_index(std::ceil(half - lo.x / res))),
            clamp_index(std::floor(half - 1 - hi.y / res)), std::min(config.size - 1, clamp_index(std::ceil(half - lo.y / res)))};
}

bool disc_overlaps(const Vec2& center, double radius, const CellBox& box) {
    const double cx = std::clamp(center.x, box.x_lo, box.x_hi);
    const double cy = std::clamp(center.y, box.y_lo, box.y_hi);
    return abs_sq(center - Vec2{cx, cy}) < radius * radius;
}

bool polygon_overlaps(const std::vector<Vec2>& verts, const CellBox& box) {
    const Vec2 corners[4] = {{box.x_lo, box.y_lo}, {box.x_hi, box.y_lo}, {box.x_hi, box.y_hi}, {box.x_lo, box.y_hi}};
    const auto separated = [&](const Vec2& axis) {
        double p_lo = kInfiniteDistance, p_hi = -kInfiniteDistance;
        for (const Vec2& v : verts) {
            p_lo = std::min(p_lo, dot(v, axis));
            p_hi = std::max(p_hi, dot(v, axis));
        }
        double b_lo = kInfiniteDistance, b_hi = -kInfiniteDistance;
        for (const Vec2& v : corners) {
            b_lo = std::min(b_lo, dot(v, axis));
            b_hi = std::max(b_hi, dot(v, axis));
        }
        return p_hi <= b_lo || b_hi <= p_lo;
    };
    if (separated({1.0, 0.0}) || separated({0.0, 1.0})) return false;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Vec2 e = verts[(i + 1) % verts.size()] - verts[i];
        if (separated({-e.y, e.x})) return false;
    }
    return true;
}

std::size_t index(int row, int col, int size) { return static_cast<std::size_t>(row) * size + col; }

void stamp_disc(std::vector<float>& grid, const Vec2& center, double radius, const ObservationConfig& config) {
    const CellRange cr = cells_touching(center - Vec2{radius, radius}, center + Vec2{radius, radius}, config);
    for (int r = std::max(cr.r0, 0); r <= cr.r1; ++r) {
        for (int c = std::max(cr.c0, 0); c <= cr.c1; ++c) {
            if (disc_overlaps(center, radius, cell_box(r, c, config))) grid[index(r, c, config.size)] = 1.0f;
        }
    }
}

void stamp_polygon(std::vector<float>& grid, const std::vector<Vec2>& verts, const ObservationConfig& config) {
    Vec2 lo = verts[0], hi = verts[0];
    for (const Vec2& v : verts) {
        lo = {std::min(lo.x, v.x), std::min(lo.y, v.y)};
        hi = {std::max(hi.x, v.x), std::max(hi.y, v.y)};
    }
    const CellRange cr = cells_touching(lo, hi, config);
    for (int r = std::max(cr.r0, 0); r <= cr.r1; ++r) {
        for (int c = std::max(cr.c0, 0); c <= cr.c1; ++c) {
            if (polygon_overlaps(verts, cell_box(r, c, config))) grid[index(r, c, config.size)] = 1.0f;
        }
    }
}

/// Distance along unit ray `d` from the origin to the obstacle, or infinity.
double ray_hit(const Vec2& d, const Obstacle& obstacle) {
    if (const auto* disc = std::get_if<Disc>(&obstacle.shape)) {
        const double b = dot(d, disc->center);
        const double c = abs_sq(disc->center) - disc->radius * disc->radius;
        if (c <= 0.0) return 0.0;
        const double disc_term = b * b - c;
        if (disc_term < 0.0 || b <= 0.0) return kInfiniteDistance;
        return b - std::sqrt(disc_term);
    }
    const auto& verts = std::get<Polygon>(obstacle.shape).vertices;
    double best = kInfiniteDistance;
    for (std::size_t i = 0; i < verts.size(); ++i) {
        const Vec2 a = verts[i];
        const Vec2 e = verts[(i + 1) % verts.size()] - a;
        const double denom = det(d, e);
        if (std::abs(denom) < 1e-12) continue;
        const double t = det(a, e) / denom;  // along the ray
        const double s = det(a, d) / denom;  // along the edge
        if (t >= 0.0 && s >= 0.0 && s <= 1.0) best = std::min(best, t);
    }
    return best;
}

Obstacle to_robot_frame(const Obstacle& obstacle, const Pose& robot) {
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) {
        return {Disc{socnav::to_robot_frame(d->center, robot), d->radius}};
    }
    Polygon poly;
    for (const Vec2& v : std::get<Polygon>(obstacle.shape).vertices) {
        poly.vertices.push_back(socnav::to_robot_frame(v, robot));
    }
    return {std::move(poly)};
}

}  // namespace

std::vector<float> occupancy_grid(std::span<const Obstacle> obstacles, const Pose& robot, double robot_radius,
                                  const ObservationConfig& config) {
    validate(config);
    std::vector<float> grid(static_cast<std::size_t>(config.size) * config.size, 0.0f);

    std::vector<Obstacle> local;
    local.reserve(obstacles.size());
    for (const Obstacle& o : obstacles) local.push_back(to_robot_frame(o, robot));

    if (config.raycast) {
        const double half = 0.5 * config.size;
        const double max_range = half * config.resolution * std::sqrt(2.0);
        for (int k = 0; k < config.beams; ++k) {
            const double angle = 2.0 * kPi * k / config.beams;
            const Vec2 d{std::cos(angle), std::sin(angle)};
            double t = kInfiniteDistance;
            for (const Obstacle& o : local) t = std::min(t, ray_hit(d, o));
            if (t > max_range) continue;
            const Vec2 hit = (t + 1e-9) * d;  // just past the surface, inside the obstacle
            const int r = static_cast<int>(std::floor(half - hit.x / config.resolution));
            const int c = static_cast<int>(std::floor(half - hit.y / config.resolution));
            if (r >= 0 && r < config.size && c >= 0 && c < config.size) grid[index(r, c, config.size)] = 1.0f;
        }
    } else {
        for (const Obstacle& o : local) {
            if (const auto* d = std::get_if<Disc>(&o.shape)) {
                stamp_disc(grid, d->center, d->radius, config);
            } else {
                stamp_polygon(grid, std::get<Polygon>(o.shape).vertices, config);
            }
        }
    }
    stamp_disc(grid, {0.0, 0.0}, robot_radius, config);
    return grid;
}

std::vector<float> pedestrian_maps(std::span<const Pedestrian> pedestrians, const Pose& robot,
                                   const ObservationConfig& config) {
    validate(config);
    const std::size_t plane = static_cast<std::size_t>(config.size) * config.size;
    std::vector<float> maps(kPedChannels * plane, 0.0f);
    std::vector<double> owner_dist(plane, kInfiniteDistance);

    for (const Pedestrian& p : pedestrians) {
        const Vec2 center = to_robot_frame(p.position, robot);
        const Vec2 vel = rotate_to_robot_frame(p.velocity, robot) / p.max_speed;
        const float vx = static_cast<float>(std::clamp(vel.x, -1.0, 1.0));
        const float vy = static_cast<float>(std::clamp(vel.y, -1.0, 1.0));
        const CellRange cr = cells_touching(center - Vec2{p.radius, p.radius}, center + Vec2{p.radius, p.radius}, config);
        for (int r = std::max(cr.r0, 0); r <= cr.r1; ++r) {
            for (int c = std::max(cr.c0, 0); c <= cr.c1; ++c) {
                if (!disc_overlaps(center, p.radius, cell_box(r, c, config))) continue;
                const std::size_t i = index(r, c, config.size);
                // Nearest pedestrian center to the cell center owns the cell; strict
                // comparison keeps the lower index on ties.
                const double dist = abs_sq(center - cell_center(r, c, config));
                if (dist >= owner_dist[i]) continue;
                owner_dist[i] = dist;
                maps[i] = 1.0f;
                maps[plane + i] = vx;
                maps[2 * plane + i] = vy;
            }
        }
    }
    return maps;
}

RelativeGoal relative_goal(const Pose& robot, const Vec2& goal) {
    const Vec2 delta = goal - robot.position();
    const double distance = norm(delta);
    if (distance == 0.0) return {0.0, 0.0};
    return {distance, normalize_angle(std::atan2(delta.y, delta.x) - robot.theta)};
}

ObservationFrame observe(std::span<const Obstacle> obstacles, std::span<const Pedestrian> pedestrians,
                         const Pose& robot, double robot_radius, const Vec2& goal, const ObservationConfig& config) {
    ObservationFrame f;
    f.size = config.size;
    f.grid = occupancy_grid(obstacles, robot, robot_radius, config);
    f.ped_maps = pedestrian_maps(pedestrians, robot, config);
    const RelativeGoal g = relative_goal(robot, goal);
    f.goal_distance = g.distance;
    f.heading_error = g.heading_error;
    return f;
}

}  // namespace socnav::obs

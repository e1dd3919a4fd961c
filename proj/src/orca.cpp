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

#include "socnav/orca.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "socnav/error.hpp"

namespace socnav::orca {

namespace {

constexpr double kEpsilon = 1e-5;

double sqr(double v) { return v * v; }

}  // namespace

void validate(const AvoidanceParams& params) {
    if (!(params.time_horizon_agents > 0.0) || !(params.time_horizon_obstacles > 0.0) ||
        !(params.neighbor_range > 0.0) || params.max_neighbors < 1) {
        throw ValidationError("avoidance params must be positive and max_neighbors >= 1");
    }
}

// ---------------------------------------------------------------------------
// Agent constraints

namespace {

struct Escape {
    Vec2 u;
    Vec2 direction;
};

Escape compute_escape(const AgentState& self, const AgentState& other, double tau, double dt) {
    Vec2 rel_pos = other.position - self.position;
    const Vec2 rel_vel = self.velocity - other.velocity;
    const double dist_sq = abs_sq(rel_pos);
    const double combined = self.radius + other.radius;
    const double combined_sq = sqr(combined);

    if (dist_sq > combined_sq) {
        const double inv_tau = 1.0 / tau;
        // Vector from the cutoff-circle center to the relative velocity.
        const Vec2 w = rel_vel - inv_tau * rel_pos;
        const double w_len_sq = abs_sq(w);
        const double dot1 = dot(w, rel_pos);

        if (dot1 < 0.0 && sqr(dot1) > combined_sq * w_len_sq) {
            // Project on the cutoff circle.
            const double w_len = std::sqrt(w_len_sq);
            const Vec2 unit_w = w / w_len;
            return {(combined * inv_tau - w_len) * unit_w, {unit_w.y, -unit_w.x}};
        }

        // Project on a leg; exact ties go to the left leg.
        const double leg = std::sqrt(dist_sq - combined_sq);
        Vec2 direction;
        if (det(rel_pos, w) >= 0.0) {
            direction = Vec2{rel_pos.x * leg - rel_pos.y * combined, rel_pos.x * combined + rel_pos.y * leg} / dist_sq;
        } else {
            direction =
                -(Vec2{rel_pos.x * leg + rel_pos.y * combined, -rel_pos.x * combined + rel_pos.y * leg} / dist_sq);
        }
        return {dot(rel_vel, direction) * direction - rel_vel, direction};
    }

    // Overlapping: project on the cutoff circle of horizon dt.
    if (dist_sq == 0.0) rel_pos = {1e-12, 0.0};
    const double inv_dt = 1.0 / dt;
    const Vec2 w = rel_vel - inv_dt * rel_pos;
    const double w_len = norm(w);
    const Vec2 unit_w = w_len > 0.0 ? w / w_len : -normalized(rel_pos);
    return {(combined * inv_dt - w_len) * unit_w, {unit_w.y, -unit_w.x}};
}

}  // namespace

Vec2 escape_vector(const AgentState& self, const AgentState& other, double tau, double dt) {
    return compute_escape(self, other, tau, dt).u;
}

OrcaLine agent_orca_line(const AgentState& self, const AgentState& other, double tau, double dt,
                         double responsibility) {
    const Escape e = compute_escape(self, other, tau, dt);
    return {self.velocity + responsibility * e.u, e.direction};
}

// ---------------------------------------------------------------------------
// Obstacle constraints

namespace {

double dist_sq_point_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    const double r = dot(p - a, b - a) / abs_sq(b - a);
    if (r < 0.0) return abs_sq(p - a);
    if (r > 1.0) return abs_sq(p - b);
    return abs_sq(p - (a + r * (b - a)));
}

/// Lines from one edge (vertex `i1` to `i1 + 1`) of a convex CCW polygon,
/// following the classic obstacle construction with every vertex convex.
/// `lines` holds previously built obstacle lines, used for the coverage test.
void polygon_edge_line(const AgentState& self, const std::vector<Vec2>& verts, std::size_t i1, double tau_obs,
                       std::vector<OrcaLine>& lines) {
    const std::size_t n = verts.size();
    const double inv_tau = 1.0 / tau_obs;
    const double radius = self.radius;
    const auto unit_dir = [&](std::size_t i) { return normalized(verts[(i + 1) % n] - verts[i]); };

    std::size_t o1 = i1;
    std::size_t o2 = (i1 + 1) % n;

    const Vec2 rel1 = verts[o1] - self.position;
    const Vec2 rel2 = verts[o2] - self.position;

    for (const OrcaLine& line : lines) {
        if (det(inv_tau * rel1 - line.point, line.direction) - inv_tau * radius >= -kEpsilon &&
            det(inv_tau * rel2 - line.point, line.direction) - inv_tau * radius >= -kEpsilon) {
            return;  // already covered
        }
    }

    const double dist_sq1 = abs_sq(rel1);
    const double dist_sq2 = abs_sq(rel2);
    const double radius_sq = sqr(radius);

    const Vec2 edge = verts[o2] - verts[o1];
    const double s = dot(-rel1, edge) / abs_sq(edge);
    const double dist_sq_line = abs_sq(-rel1 - s * edge);

    if (s < 0.0 && dist_sq1 <= radius_sq) {
        // Overlapping the left vertex.
        lines.push_back({{0.0, 0.0}, normalized(Vec2{-rel1.y, rel1.x})});
        return;
    }
    if (s > 1.0 && dist_sq2 <= radius_sq) {
        // Overlapping the right vertex; the next edge handles it unless it faces away.
        if (det(rel2, unit_dir(o2)) >= 0.0) lines.push_back({{0.0, 0.0}, normalized(Vec2{-rel2.y, rel2.x})});
        return;
    }
    if (s >= 0.0 && s < 1.0 && dist_sq_line <= radius_sq) {
        // Overlapping the edge.
        lines.push_back({{0.0, 0.0}, -unit_dir(o1)});
        return;
    }

    Vec2 left_leg;
    Vec2 right_leg;
    if (s < 0.0 && dist_sq_line <= radius_sq) {
        // Viewed obliquely: the left vertex defines the velocity obstacle.
        o2 = o1;
        const double leg1 = std::sqrt(dist_sq1 - radius_sq);
        left_leg = Vec2{rel1.x * leg1 - rel1.y * radius, rel1.x * radius + rel1.y * leg1} / dist_sq1;
        right_leg = Vec2{rel1.x * leg1 + rel1.y * radius, -rel1.x * radius + rel1.y * leg1} / dist_sq1;
    } else if (s > 1.0 && dist_sq_line <= radius_sq) {
        // Viewed obliquely: the right vertex defines the velocity obstacle.
        o1 = o2;
        const double leg2 = std::sqrt(dist_sq2 - radius_sq);
        left_leg = Vec2{rel2.x * leg2 - rel2.y * radius, rel2.x * radius + rel2.y * leg2} / dist_sq2;
        right_leg = Vec2{rel2.x * leg2 + rel2.y * radius, -rel2.x * radius + rel2.y * leg2} / dist_sq2;
    } else {
        const double leg1 = std::sqrt(dist_sq1 - radius_sq);
        left_leg = Vec2{rel1.x * leg1 - rel1.y * radius, rel1.x * radius + rel1.y * leg1} / dist_sq1;
        const double leg2 = std::sqrt(dist_sq2 - radius_sq);
        right_leg = Vec2{rel2.x * leg2 + rel2.y * radius, -rel2.x * radius + rel2.y * leg2} / dist_sq2;
    }

    // Legs may not point into the neighboring edges; use those edges instead
    // and drop the constraint if the velocity projects on such a foreign leg.
    const std::size_t left_neighbor = (o1 + n - 1) % n;
    bool left_foreign = false;
    bool right_foreign = false;
    if (det(left_leg, -unit_dir(left_neighbor)) >= 0.0) {
        left_leg = -unit_dir(left_neighbor);
        left_foreign = true;
    }
    if (det(right_leg, unit_dir(o2)) <= 0.0) {
        right_leg = unit_dir(o2);
        right_foreign = true;
    }

    const Vec2 left_cutoff = inv_tau * (verts[o1] - self.position);
    const Vec2 right_cutoff = inv_tau * (verts[o2] - self.position);
    const Vec2 cutoff_vec = right_cutoff - left_cutoff;
    const bool same_vertex = o1 == o2;

    const double t = same_vertex ? 0.5 : dot(self.velocity - left_cutoff, cutoff_vec) / abs_sq(cutoff_vec);
    const double t_left = dot(self.velocity - left_cutoff, left_leg);
    const double t_right = dot(self.velocity - right_cutoff, right_leg);

    if ((t < 0.0 && t_left < 0.0) || (same_vertex && t_left < 0.0 && t_right < 0.0)) {
        const Vec2 unit_w = normalized(self.velocity - left_cutoff);
        lines.push_back({left_cutoff + radius * inv_tau * unit_w, {unit_w.y, -unit_w.x}});
        return;
    }
    if (t > 1.0 && t_right < 0.0) {
        const Vec2 unit_w = normalized(self.velocity - right_cutoff);
        lines.push_back({right_cutoff + radius * inv_tau * unit_w, {unit_w.y, -unit_w.x}});
        return;
    }

    const double inf = kInfiniteDistance;
    const double d_cutoff =
        (t < 0.0 || t > 1.0 || same_vertex) ? inf : abs_sq(self.velocity - (left_cutoff + t * cutoff_vec));
    const double d_left = t_left < 0.0 ? inf : abs_sq(self.velocity - (left_cutoff + t_left * left_leg));
    const double d_right = t_right < 0.0 ? inf : abs_sq(self.velocity - (right_cutoff + t_right * right_leg));

    if (d_cutoff <= d_left && d_cutoff <= d_right) {
        const Vec2 direction = -unit_dir(o1);
        lines.push_back({left_cutoff + radius * inv_tau * Vec2{-direction.y, direction.x}, direction});
    } else if (d_left <= d_right) {
        if (left_foreign) return;
        lines.push_back({left_cutoff + radius * inv_tau * Vec2{-left_leg.y, left_leg.x}, left_leg});
    } else {
        if (right_foreign) return;
        const Vec2 direction = -right_leg;
        lines.push_back({right_cutoff + radius * inv_tau * Vec2{-direction.y, direction.x}, direction});
    }
}

OrcaLine push_out_line(const AgentState& self, const Obstacle& obstacle, double tau_obs) {
    const Vec2 n = outward_normal(obstacle, self.position);
    // Depth of the center below the nearest boundary.
    double depth = 0.0;
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) {
        depth = d->radius - norm(self.position - d->center);
    } else {
        const auto& verts = std::get<Polygon>(obstacle.shape).vertices;
        depth = kInfiniteDistance;
        for (std::size_t i = 0; i < verts.size(); ++i) {
            const Vec2 e = verts[(i + 1) % verts.size()] - verts[i];
            depth = std::min(depth, dot(verts[i] - self.position, normalized(Vec2{e.y, -e.x})));
        }
    }
    const double speed = std::min(self.max_speed, (depth + self.radius) / tau_obs);
    return {speed * n, {n.y, -n.x}};
}

void append_obstacle_lines(const AgentState& self, const Obstacle& obstacle, double tau_obs, double dt,
                           std::vector<OrcaLine>& lines) {
    const double range = tau_obs * self.max_speed + self.radius;
    if (distance_to(obstacle, self.position) >= range) return;
    if (contains(obstacle, self.position)) {
        lines.push_back(push_out_line(self, obstacle, tau_obs));
        return;
    }
    if (const auto* d = std::get_if<Disc>(&obstacle.shape)) {
        const AgentState still{d->center, {0.0, 0.0}, {0.0, 0.0}, d->radius, 0.0};
        lines.push_back(agent_orca_line(self, still, tau_obs, dt, 1.0));
        return;
    }

    const auto& verts = std::get<Polygon>(obstacle.shape).vertices;
    const std::size_t n = verts.size();
    const double range_sq = range * range;
    std::vector<std::pair<double, std::size_t>> edges;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = verts[i];
        const Vec2& b = verts[(i + 1) % n];
        // Only edges that face the agent (agent strictly right of the CCW edge).
        if (det(b - a, self.position - a) >= 0.0) continue;
        const double dsq = dist_sq_point_segment(a, b, self.position);
        if (dsq < range_sq) edges.emplace_back(dsq, i);
    }
    std::stable_sort(edges.begin(), edges.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    for (const auto& [dsq, i] : edges) polygon_edge_line(self, verts, i, tau_obs, lines);
}

}  // namespace

std::vector<OrcaLine> obstacle_orca_lines(const AgentState& self, const Obstacle& obstacle, double tau_obs,
                                          double dt) {
    std::vector<OrcaLine> lines;
    append_obstacle_lines(self, obstacle, tau_obs, dt, lines);
    return lines;
}

// ---------------------------------------------------------------------------
// Linear programs

namespace {

/// Optimizes along line `line_no` subject to lines [0, line_no) and the disc.
bool solve_lp1(std::span<const OrcaLine> lines, std::size_t line_no, double radius, const Vec2& opt,
               bool direction_opt, Vec2& result) {
    const OrcaLine& line = lines[line_no];
    const double dot_product = dot(line.point, line.direction);
    const double discriminant = sqr(dot_product) + sqr(radius) - abs_sq(line.point);
    if (discriminant < 0.0) return false;  // the disc misses this line entirely

    const double sqrt_disc = std::sqrt(discriminant);
    double t_left = -dot_product - sqrt_disc;
    double t_right = -dot_product + sqrt_disc;

    for (std::size_t i = 0; i < line_no; ++i) {
        const double denominator = det(line.direction, lines[i].direction);
        const double numerator = det(lines[i].direction, line.point - lines[i].point);

        if (std::abs(denominator) <= kEpsilon) {
            // Parallel lines.
            if (numerator < 0.0) return false;
            continue;
        }
        const double t = numerator / denominator;
        if (denominator >= 0.0) {
            t_right = std::min(t_right, t);
        } else {
            t_left = std::max(t_left, t);
        }
        if (t_left > t_right) return false;
    }

    if (direction_opt) {
        result = line.point + (dot(opt, line.direction) > 0.0 ? t_right : t_left) * line.direction;
    } else {
        const double t = dot(line.direction, opt - line.point);
        result = line.point + std::clamp(t, t_left, t_right) * line.direction;
    }
    return true;
}

}  // namespace

Lp2Result solve_lp2(std::span<const OrcaLine> lines, double max_speed, const Vec2& preferred,
                    bool optimize_direction) {
    Vec2 result;
    if (optimize_direction) {
        // `preferred` is a unit direction in this mode.
        result = preferred * max_speed;
    } else if (abs_sq(preferred) > sqr(max_speed)) {
        result = normalized(preferred) * max_speed;
    } else {
        result = preferred;
    }

    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) > 0.0) {
            const Vec2 previous = result;
            if (!solve_lp1(lines, i, max_speed, preferred, optimize_direction, result)) {
                result = previous;
                return {result, i};
            }
        }
    }
    return {result, lines.size()};
}

Vec2 solve_lp3(std::span<const OrcaLine> lines, std::size_t num_obstacle_lines, std::size_t fail_index,
               double max_speed, const Vec2& current) {
    Vec2 result = current;
    double distance = 0.0;

    for (std::size_t i = fail_index; i < lines.size(); ++i) {
        if (det(lines[i].direction, lines[i].point - result) <= distance) continue;

        // Lines bisecting line i and each earlier agent line; obstacle lines stay hard.
        std::vector<OrcaLine> projected(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(num_obstacle_lines));
        for (std::size_t j = num_obstacle_lines; j < i; ++j) {
            OrcaLine line;
            const double determinant = det(lines[i].direction, lines[j].direction);
            if (std::abs(determinant) <= kEpsilon) {
                if (dot(lines[i].direction, lines[j].direction) > 0.0) continue;  // same direction
                line.point = 0.5 * (lines[i].point + lines[j].point);
            } else {
                line.point = lines[i].point +
                             (det(lines[j].direction, lines[i].point - lines[j].point) / determinant) * lines[i].direction;
            }
            line.direction = normalized(lines[j].direction - lines[i].direction);
            projected.push_back(line);
        }

        const Vec2 previous = result;
        const Vec2 away{-lines[i].direction.y, lines[i].direction.x};
        const Lp2Result r = solve_lp2(projected, max_speed, away, true);
        // Failure here can only come from round-off; keep the previous result then.
        result = r.fail_index < projected.size() ? previous : r.velocity;
        distance = det(lines[i].direction, lines[i].point - result);
    }
    return result;
}

// ---------------------------------------------------------------------------

std::vector<OrcaLine> build_lines(const AgentState& self, std::span<const AgentState> neighbors,
                                  std::span<const Obstacle> obstacles, const AvoidanceParams& params, double dt,
                                  std::span<const double> responsibility, std::size_t* num_obstacle_lines) {
    if (responsibility.size() != neighbors.size()) {
        throw ValidationError(fmt::format("responsibility list has {} entries for {} neighbors",
                                          responsibility.size(), neighbors.size()));
    }
    std::vector<OrcaLine> lines;

    std::vector<std::pair<double, std::size_t>> obstacle_order;
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
        const double d = distance_to(obstacles[i], self.position);
        if (d < params.neighbor_range) obstacle_order.emplace_back(d, i);
    }
    std::stable_sort(obstacle_order.begin(), obstacle_order.end(),
                     [](const auto& l, const auto& r) { return l.first < r.first; });
    for (const auto& [d, i] : obstacle_order) {
        append_obstacle_lines(self, obstacles[i], params.time_horizon_obstacles, dt, lines);
    }
    if (num_obstacle_lines != nullptr) *num_obstacle_lines = lines.size();

    const double range_sq = sqr(params.neighbor_range);
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        const double dsq = abs_sq(neighbors[i].position - self.position);
        if (dsq < range_sq) order.emplace_back(dsq, i);
    }
    std::sort(order.begin(), order.end());  // (distance, index): deterministic tie-break
    if (order.size() > static_cast<std::size_t>(params.max_neighbors)) {
        order.resize(static_cast<std::size_t>(params.max_neighbors));
    }
    for (const auto& [dsq, i] : order) {
        lines.push_back(agent_orca_line(self, neighbors[i], params.time_horizon_agents, dt, responsibility[i]));
    }
    return lines;
}

Vec2 new_velocity(const AgentState& self, std::span<const AgentState> neighbors,
                  std::span<const Obstacle> obstacles, const AvoidanceParams& params, double dt,
                  std::span<const double> responsibility) {
    std::size_t num_obstacle_lines = 0;
    const std::vector<OrcaLine> lines =
        build_lines(self, neighbors, obstacles, params, dt, responsibility, &num_obstacle_lines);

    const Lp2Result r = solve_lp2(lines, self.max_speed, self.preferred_velocity, false);
    Vec2 v = r.velocity;
    if (r.fail_index < lines.size()) {
        v = solve_lp3(lines, num_obstacle_lines, r.fail_index, self.max_speed, r.velocity);
    }
    // Round-off can leave the LP result a hair outside the disc.
    const double speed_sq = abs_sq(v);
    if (speed_sq > sqr(self.max_speed)) v = v * (self.max_speed / std::sqrt(speed_sq));
    return v;
}

}  // namespace socnav::orca

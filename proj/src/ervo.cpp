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

#include "socnav/ervo.hpp"

#include <algorithm>
#include <cmath>

#include "socnav/error.hpp"

namespace socnav::ervo {

void validate(const EmotionParams& p) {
    for (double v : {p.audible_radius, p.peak_gain, p.decay_rate, p.contagion_rate, p.contagion_radius,
                     p.responsibility_gain, p.radius_gain, p.repulsion_gain}) {
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("emotion params must be finite and nonnegative");
    }
}

std::vector<Pedestrian> apply_beep(std::vector<Pedestrian> pedestrians, const BeepEvent& event,
                                   const EmotionParams& params) {
    if (!(event.audible_radius > 0.0)) throw ValidationError("beep audible radius must be positive");
    for (Pedestrian& p : pedestrians) {
        const double d = norm(p.position - event.source);
        if (d > event.audible_radius) continue;
        p.emotion = std::min(1.0, p.emotion + params.peak_gain * (1.0 - d / event.audible_radius));
    }
    return pedestrians;
}

std::vector<Pedestrian> decay_and_contagion(std::vector<Pedestrian> pedestrians, double dt,
                                            const EmotionParams& params) {
    const std::size_t n = pedestrians.size();
    std::vector<double> before(n);
    for (std::size_t i = 0; i < n; ++i) before[i] = pedestrians[i].emotion;

    const double decay = std::exp(-params.decay_rate * dt);
    const double radius_sq = params.contagion_radius * params.contagion_radius;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            if (abs_sq(pedestrians[j].position - pedestrians[i].position) <= radius_sq) {
                sum += before[j];
                ++count;
            }
        }
        double e = before[i] * decay;
        if (count > 0) e += params.contagion_rate * dt * std::max(0.0, sum / count - before[i]);
        pedestrians[i].emotion = std::clamp(e, 0.0, 1.0);
    }
    return pedestrians;
}

Modulation emotion_modulation(const Pedestrian& pedestrian, const Vec2& robot_pos, const EmotionParams& params) {
    const double e = pedestrian.emotion;
    const Vec2 away = pedestrian.position - robot_pos;
    const Vec2 unit = abs_sq(away) > 0.0 ? normalized(away) : Vec2{1.0, 0.0};
    return {params.radius_gain * e, std::min(1.0, 0.5 + params.responsibility_gain * e),
            (params.repulsion_gain * e) * unit};
}

Vec2 goal_velocity(const Vec2& position, const Vec2& goal, double max_speed, double dt) {
    const Vec2 to_goal = goal - position;
    const double dist = norm(to_goal);
    if (dist <= 0.0) return {0.0, 0.0};
    if (dist < max_speed * dt) return to_goal / dt;
    return to_goal * (max_speed / dist);
}

std::vector<Vec2> pedestrian_velocities(std::span<const Pedestrian> pedestrians, const orca::AgentState& robot,
                                        std::span<const Obstacle> obstacles, const orca::AvoidanceParams& avoidance,
                                        const EmotionParams& emotion, double dt) {
    const std::size_t n = pedestrians.size();
    std::vector<Vec2> result(n);
    std::vector<orca::AgentState> neighbors;
    std::vector<double> responsibility;
    neighbors.reserve(n);
    responsibility.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const Pedestrian& self = pedestrians[i];
        const Modulation mod = emotion_modulation(self, robot.position, emotion);

        Vec2 preferred = goal_velocity(self.position, self.goal, self.max_speed, dt);
        if (mod.repulsion_bias != Vec2{}) {
            preferred += mod.repulsion_bias;
            if (abs_sq(preferred) > self.max_speed * self.max_speed) preferred = normalized(preferred) * self.max_speed;
        }

        neighbors.clear();
        responsibility.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const Pedestrian& o = pedestrians[j];
            neighbors.push_back({o.position, o.velocity, o.velocity, o.radius, o.max_speed});
            responsibility.push_back(0.5);
        }
        orca::AgentState robot_view = robot;
        robot_view.radius += mod.extra_radius;
        neighbors.push_back(robot_view);
        responsibility.push_back(mod.responsibility_vs_robot);

        const orca::AgentState agent{self.position, self.velocity, preferred, self.radius, self.max_speed};
        result[i] = orca::new_velocity(agent, neighbors, obstacles, avoidance, dt, responsibility);
    }
    return result;
}

}  // namespace socnav::ervo

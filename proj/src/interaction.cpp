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

#include "socnav/interaction.hpp"

#include <algorithm>

#include "socnav/error.hpp"

namespace socnav::interaction {

void validate(const InteractionParams& params) {
    if (!(params.d_theta > 0.0)) throw ValidationError("d_theta must be positive");
    if (!(params.v_theta >= 0.0)) throw ValidationError("v_theta must be nonnegative");
}

bool fd_policy(double d_min, const InteractionParams& params) { return d_min < params.d_theta; }

bool fdv_policy(std::span<const RelativePedestrian> pedestrians, const InteractionParams& params) {
    return std::any_of(pedestrians.begin(), pedestrians.end(), [&](const RelativePedestrian& p) {
        return norm(p.to_robot) < params.d_theta && norm(p.velocity) > params.v_theta && dot(p.to_robot, p.velocity) > 0.0;
    });
}

std::vector<RelativePedestrian> relative_pedestrians(const Vec2& robot_pos, std::span<const Pedestrian> pedestrians) {
    std::vector<RelativePedestrian> out;
    out.reserve(pedestrians.size());
    for (const Pedestrian& p : pedestrians) out.push_back({robot_pos - p.position, p.velocity});
    return out;
}

}  // namespace socnav::interaction

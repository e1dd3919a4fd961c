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

/// Egocentric rasters fed to navigation and interaction policies.
///
/// Layout: row-major, `size` x `size`. Row 0 is the far front of the window,
/// column 0 its far left. Cell (r, c) has its center at robot-frame
///   x = (size/2 - r - 0.5) * resolution,  y = (size/2 - c - 0.5) * resolution.
/// A cell is marked when a shape overlaps it with positive area.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "socnav/core.hpp"

namespace socnav::obs {

struct ObservationConfig {
    int size = 48;
    double resolution = 0.1;  ///< m per cell
    /// Mark only the cells hit by `beams` rays instead of full obstacle footprints.
    bool raycast = false;
    int beams = 360;

    bool operator==(const ObservationConfig&) const = default;
};

void validate(const ObservationConfig& config);

inline constexpr int kPedChannels = 3;

struct ObservationFrame {
    int size = 48;
    std::vector<float> grid;      ///< size*size, occupancy in [0, 1]
    std::vector<float> ped_maps;  ///< 3*size*size: occupancy, v_x, v_y (robot frame, / max speed)
    double goal_distance = 0.0;
    double heading_error = 0.0;   ///< (-pi, pi]

    bool operator==(const ObservationFrame&) const = default;

    static ObservationFrame zeros(int size);
};

/// Robot-frame center of a cell.
Vec2 cell_center(int row, int col, const ObservationConfig& config);

std::vector<float> occupancy_grid(std::span<const Obstacle> obstacles, const Pose& robot, double robot_radius,
                                  const ObservationConfig& config);

std::vector<float> pedestrian_maps(std::span<const Pedestrian> pedestrians, const Pose& robot,
                                   const ObservationConfig& config);

struct RelativeGoal {
    double distance = 0.0;
    double heading_error = 0.0;
};

RelativeGoal relative_goal(const Pose& robot, const Vec2& goal);

ObservationFrame observe(std::span<const Obstacle> obstacles, std::span<const Pedestrian> pedestrians,
                         const Pose& robot, double robot_radius, const Vec2& goal, const ObservationConfig& config);

}  // namespace socnav::obs

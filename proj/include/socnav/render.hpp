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

/// Static SVG rendering of a recorded trajectory.
///
/// Element classes (stable, used by tests and downstream tooling):
///   robot-point  one circle per recorded row, light-to-dark blue by step
///   beep         one circle of the audible radius per row with a beep
///   ped-path     one polyline per pedestrian
///   goal         star at the robot goal; ped-goal for pedestrian goals
///   obstacle     one shape per obstacle

#pragma once

#include <filesystem>
#include <string>

#include "socnav/engine.hpp"

namespace socnav {

struct RenderOptions {
    double pixels_per_meter = 50.0;
    double margin = 1.0;  ///< m around the drawn content
};

/// Throws ValidationError for a trajectory without rows.
std::string render_svg(const Trajectory& trajectory, const RenderOptions& options = {});
void write_svg(const Trajectory& trajectory, const std::filesystem::path& path, const RenderOptions& options = {});

}  // namespace socnav

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

#include "socnav/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "socnav/error.hpp"

namespace socnav {

namespace {

struct Frame {
    double min_x, max_y, scale;
    double x(double wx) const { return (wx - min_x) * scale; }
    double y(double wy) const { return (max_y - wy) * scale; }
};

std::string star(const Frame& f, const Vec2& c, double outer, const char* cls, const char* fill) {
    std::string pts;
    for (int i = 0; i < 10; ++i) {
        const double r = (i % 2 == 0 ? outer : 0.4 * outer);
        const double a = std::numbers::pi / 2 + i * std::numbers::pi / 5;
        if (i > 0) pts += ' ';
        pts += fmt::format("{:.2f},{:.2f}", f.x(c.x + r * std::cos(a)), f.y(c.y + r * std::sin(a)));
    }
    return fmt::format("<polygon class=\"{}\" points=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.5\"/>\n", cls,
                       pts, fill);
}

}  // namespace

std::string render_svg(const Trajectory& t, const RenderOptions& options) {
    if (t.rows.empty()) throw ValidationError("cannot render an empty trajectory");

    double min_x = t.robot_goal.x, max_x = t.robot_goal.x, min_y = t.robot_goal.y, max_y = t.robot_goal.y;
    auto grow = [&](const Vec2& p, double r) {
        min_x = std::min(min_x, p.x - r);
        max_x = std::max(max_x, p.x + r);
        min_y = std::min(min_y, p.y - r);
        max_y = std::max(max_y, p.y + r);
    };
    for (const TrajectoryRow& row : t.rows) {
        grow(row.pose.position(), t.robot_radius);
        for (const Pedestrian& p : row.pedestrians) grow(p.position, t.pedestrian_radius);
    }
    for (const Vec2& g : t.pedestrian_goals) grow(g, 0.0);
    for (const Obstacle& o : t.obstacles) {
        const auto [lo, hi] = bounding_box(o);
        grow(lo, 0.0);
        grow(hi, 0.0);
    }
    min_x -= options.margin;
    max_x += options.margin;
    min_y -= options.margin;
    max_y += options.margin;
    const Frame f{min_x, max_y, options.pixels_per_meter};
    const double width = (max_x - min_x) * f.scale;
    const double height = (max_y - min_y) * f.scale;

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" viewBox=\"0 0 {0:.2f} {1:.2f}\">\n",
        width, height);
    svg += fmt::format("<rect width=\"{:.2f}\" height=\"{:.2f}\" fill=\"white\"/>\n", width, height);

    for (const Obstacle& o : t.obstacles) {
        if (const auto* d = std::get_if<Disc>(&o.shape)) {
            svg += fmt::format("<circle class=\"obstacle\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"black\"/>\n",
                               f.x(d->center.x), f.y(d->center.y), d->radius * f.scale);
        } else {
            std::string pts;
            for (const Vec2& v : std::get<Polygon>(o.shape).vertices) {
                if (!pts.empty()) pts += ' ';
                pts += fmt::format("{:.2f},{:.2f}", f.x(v.x), f.y(v.y));
            }
            svg += fmt::format("<polygon class=\"obstacle\" points=\"{}\" fill=\"black\"/>\n", pts);
        }
    }

    const std::size_t n_peds = t.rows.front().pedestrians.size();
    for (std::size_t i = 0; i < n_peds; ++i) {
        std::string pts;
        for (const TrajectoryRow& row : t.rows) {
            if (i >= row.pedestrians.size()) continue;
            if (!pts.empty()) pts += ' ';
            pts += fmt::format("{:.2f},{:.2f}", f.x(row.pedestrians[i].position.x), f.y(row.pedestrians[i].position.y));
        }
        svg += fmt::format("<polyline class=\"ped-path\" points=\"{}\" fill=\"none\" stroke=\"#d62728\" "
                           "stroke-opacity=\"0.6\" stroke-width=\"2\"/>\n",
                           pts);
        const Vec2 last = t.rows.back().pedestrians[i].position;
        svg += fmt::format("<circle class=\"ped-final\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"none\" "
                           "stroke=\"#d62728\"/>\n",
                           f.x(last.x), f.y(last.y), t.pedestrian_radius * f.scale);
    }
    for (const Vec2& g : t.pedestrian_goals) svg += star(f, g, 0.15, "ped-goal", "#f4a6a6");

    for (const TrajectoryRow& row : t.rows) {
        if (!row.command.beep) continue;
        svg += fmt::format("<circle class=\"beep\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"none\" "
                           "stroke=\"#1f77b4\" stroke-opacity=\"0.35\"/>\n",
                           f.x(row.pose.x), f.y(row.pose.y), t.audible_radius * f.scale);
    }
    const double last = static_cast<double>(std::max<std::size_t>(1, t.rows.size() - 1));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        // Light to dark blue along the episode.
        const double s = static_cast<double>(i) / last;
        const int r = static_cast<int>(std::lround(198 - 167 * s));
        const int g = static_cast<int>(std::lround(219 - 100 * s));
        const int b = static_cast<int>(std::lround(239 - 59 * s));
        svg += fmt::format("<circle class=\"robot-point\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" "
                           "fill=\"#{:02x}{:02x}{:02x}\"/>\n",
                           f.x(t.rows[i].pose.x), f.y(t.rows[i].pose.y), 0.08 * f.scale, r, g, b);
    }
    svg += star(f, t.robot_goal, 0.3, "goal", "#ffd700");
    svg += "</svg>\n";
    return svg;
}

void write_svg(const Trajectory& trajectory, const std::filesystem::path& path, const RenderOptions& options) {
    const std::string svg = render_svg(trajectory, options);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << svg;
}

}  // namespace socnav

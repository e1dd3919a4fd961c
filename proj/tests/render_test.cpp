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


#include <regex>
#include <string>

#include <gtest/gtest.h>

#include "socnav/error.hpp"
#include "socnav/render.hpp"
#include "socnav/scenario.hpp"

using namespace socnav;

namespace {

std::size_t count(const std::string& svg, const std::string& needle) {
    std::size_t n = 0;
    for (std::size_t at = svg.find(needle); at != std::string::npos; at = svg.find(needle, at + 1)) ++n;
    return n;
}

Trajectory three_rows() {
    Trajectory t;
    t.robot_goal = {3, 0};
    t.audible_radius = 2.0;
    t.pedestrian_goals = {{-2, 1}};
    t.obstacles = {Obstacle::disc({1.5, 1.5}, 0.3)};
    for (int i = 0; i < 3; ++i) {
        TrajectoryRow r;
        r.step = i;
        r.pose = {0.5 * i, 0.0, 0.0};
        r.command = {0.5, 0.0, i >= 1};
        Pedestrian p;
        p.position = {2.0 - 0.3 * i, 1.0};
        r.pedestrians = {p};
        t.rows.push_back(r);
    }
    return t;
}

}  // namespace

TEST(Render, HandBuiltCounts) {
    const std::string svg = render_svg(three_rows());
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    EXPECT_EQ(count(svg, "class=\"robot-point\""), 3u);
    EXPECT_EQ(count(svg, "class=\"beep\""), 2u);
    EXPECT_EQ(count(svg, "class=\"ped-path\""), 1u);
    EXPECT_EQ(count(svg, "class=\"ped-goal\""), 1u);
    EXPECT_EQ(count(svg, "class=\"goal\""), 1u);
    EXPECT_EQ(count(svg, "class=\"obstacle\""), 1u);
}

TEST(Render, BeepCircleHasAudibleRadius) {
    RenderOptions o;
    o.pixels_per_meter = 40.0;
    const std::string svg = render_svg(three_rows(), o);
    const std::regex beep(R"re(class="beep" cx="[-0-9.]+" cy="[-0-9.]+" r="([0-9.]+)")re");
    std::smatch m;
    ASSERT_TRUE(std::regex_search(svg, m, beep));
    EXPECT_DOUBLE_EQ(std::stod(m[1]), 80.0);
}

TEST(Render, EmptyTrajectoryRejected) {
    Trajectory t;
    EXPECT_THROW(render_svg(t), ValidationError);
}

TEST(Render, RecordedEpisode) {
    const Scenario s = gen_circular(3);
    OrcaRobotController nav;
    FdPolicy fd({1.0, 0.0});
    const EpisodeResult r = run_episode(s, nav, fd, s.seed, true);
    ASSERT_TRUE(r.trajectory.has_value());
    const std::string svg = render_svg(*r.trajectory);
    EXPECT_EQ(count(svg, "class=\"robot-point\""), static_cast<std::size_t>(r.steps) + 1);
    EXPECT_EQ(count(svg, "class=\"ped-path\""), s.pedestrians.size());
    EXPECT_EQ(count(svg, "class=\"ped-goal\""), s.pedestrians.size());
    std::size_t beeps = 0;
    for (const auto& row : r.trajectory->rows) beeps += row.command.beep;
    EXPECT_EQ(count(svg, "class=\"beep\""), beeps);
    EXPECT_EQ(beeps, static_cast<std::size_t>(r.beep_steps));
}

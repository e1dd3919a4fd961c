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

#include "socnav/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "socnav/error.hpp"
#include "socnav/interaction.hpp"
#include "socnav/orca.hpp"

namespace socnav {

std::string_view to_string(Status status) {
    switch (status) {
        case Status::Running: return "Running";
        case Status::Success: return "Success";
        case Status::PedCollision: return "PedCollision";
        case Status::ObstacleCollision: return "ObstacleCollision";
        case Status::Timeout: return "Timeout";
        case Status::Aborted: return "Aborted";
    }
    return "Unknown";
}

Status parse_status(std::string_view text) {
    for (Status s : {Status::Running, Status::Success, Status::PedCollision, Status::ObstacleCollision, Status::Timeout,
                     Status::Aborted}) {
        if (to_string(s) == text) return s;
    }
    throw ValidationError(fmt::format("unknown episode status '{}'", text));
}

WorldState make_world(const Scenario& scenario) {
    validate(scenario);
    WorldState w;
    w.params = scenario.params;
    w.robot.pose = scenario.robot_start;
    w.robot.radius = scenario.params.robot_radius;
    w.robot.goal = scenario.robot_goal;
    w.obstacles = scenario.obstacles;
    for (const PedestrianSpec& p : scenario.pedestrians) {
        Pedestrian ped;
        ped.position = p.start;
        ped.goal = p.goal;
        ped.radius = scenario.params.pedestrian_radius;
        ped.max_speed = scenario.params.pedestrian_max_speed;
        w.pedestrians.push_back(ped);
    }
    return w;
}

double robot_pedestrian_clearance(const WorldState& world) {
    double best = kInfiniteDistance;
    const Vec2 p = world.robot.pose.position();
    for (const Pedestrian& ped : world.pedestrians) {
        best = std::min(best, norm(ped.position - p) - world.robot.radius - ped.radius);
    }
    return best;
}

double robot_obstacle_clearance(const WorldState& world) {
    double best = kInfiniteDistance;
    const Vec2 p = world.robot.pose.position();
    for (const Obstacle& o : world.obstacles) {
        best = std::min(best, (contains(o, p) ? -distance_to(o, p) : distance_to(o, p)) - world.robot.radius);
    }
    return best;
}

double goal_distance(const WorldState& world) { return norm(world.robot.goal - world.robot.pose.position()); }

Status evaluate_status(const WorldState& world) {
    if (robot_pedestrian_clearance(world) < 0.0) return Status::PedCollision;
    if (robot_obstacle_clearance(world) < 0.0) return Status::ObstacleCollision;
    if (goal_distance(world) <= world.params.goal_tolerance) return Status::Success;
    if (world.step >= world.params.max_steps) return Status::Timeout;
    return Status::Running;
}

TickEvents advance(WorldState& world, const ActionCommand& requested) {
    const ActionCommand action = validate_action(requested, world.params.action_mode);
    const ScenarioParams& p = world.params;
    TickEvents events;

    // 1-2: emotions.
    std::vector<Pedestrian> peds = world.pedestrians;
    if (action.beep) {
        const ervo::BeepEvent event{world.robot.pose.position(), world.step, p.emotion.audible_radius};
        world.beeps.push_back(event);
        if (event.audible_radius > 0.0) peds = ervo::apply_beep(std::move(peds), event, p.emotion);
        events.beeped = true;
    }
    peds = ervo::decay_and_contagion(std::move(peds), p.dt, p.emotion);

    // 3: velocities against the pre-tick positions and velocities.
    const orca::AgentState robot_agent{world.robot.pose.position(), world.robot.velocity(), world.robot.velocity(),
                                       world.robot.radius, action_bounds(p.action_mode).v_max};
    const std::vector<Vec2> velocities =
        ervo::pedestrian_velocities(peds, robot_agent, world.obstacles, p.avoidance, p.emotion, p.dt);

    // 4-5: integrate.
    for (std::size_t i = 0; i < peds.size(); ++i) {
        Vec2 v = velocities[i];
        const double speed_sq = abs_sq(v);
        if (speed_sq > peds[i].max_speed * peds[i].max_speed) v = v * (peds[i].max_speed / std::sqrt(speed_sq));
        peds[i].velocity = v;
        peds[i].position += v * p.dt;
    }
    world.pedestrians = std::move(peds);
    world.robot.pose = step_unicycle(world.robot.pose, action.v, action.omega, p.dt);
    world.robot.command = action;
    ++world.step;

    // 6: checks.
    events.status = evaluate_status(world);
    events.ped_collision = events.status == Status::PedCollision;
    events.obstacle_collision = events.status == Status::ObstacleCollision;
    events.reached_goal = events.status == Status::Success;
    events.timeout = events.status == Status::Timeout;
    return events;
}

std::pair<WorldState, TickEvents> tick(WorldState world, const ActionCommand& action) {
    const TickEvents events = advance(world, action);
    return {std::move(world), events};
}

obs::ObservationFrame observe(const WorldState& world) {
    return obs::observe(world.obstacles, world.pedestrians, world.robot.pose, world.robot.radius, world.robot.goal,
                        world.params.observation);
}

// ---------------------------------------------------------------------------
// Controllers

namespace {

struct RobotLines {
    std::vector<orca::OrcaLine> lines;
    std::size_t num_obstacle_lines = 0;
    orca::AgentState self;
};

RobotLines robot_lines(const WorldState& world) {
    const ScenarioParams& p = world.params;
    const double v_max = action_bounds(p.action_mode).v_max;
    const Vec2 pos = world.robot.pose.position();
    RobotLines out;
    out.self = {pos, world.robot.velocity(), ervo::goal_velocity(pos, world.robot.goal, v_max, p.dt),
                world.robot.radius, v_max};
    std::vector<orca::AgentState> neighbors;
    neighbors.reserve(world.pedestrians.size());
    for (const Pedestrian& ped : world.pedestrians) {
        neighbors.push_back({ped.position, ped.velocity, ped.velocity, ped.radius, ped.max_speed});
    }
    const std::vector<double> responsibility(neighbors.size(), 0.5);
    out.lines = orca::build_lines(out.self, neighbors, world.obstacles, p.avoidance, p.dt, responsibility,
                                  &out.num_obstacle_lines);
    return out;
}

Vec2 solve_lines(const RobotLines& rl) {
    const orca::Lp2Result r = orca::solve_lp2(rl.lines, rl.self.max_speed, rl.self.preferred_velocity, false);
    if (r.fail_index < rl.lines.size()) {
        return orca::solve_lp3(rl.lines, rl.num_obstacle_lines, r.fail_index, rl.self.max_speed, r.velocity);
    }
    return r.velocity;
}

}  // namespace

Vec2 OrcaRobotController::holonomic_velocity(const WorldState& world) const { return solve_lines(robot_lines(world)); }

ActionCommand OrcaRobotController::act(const WorldState& world, const obs::ObservationFrame*) {
    const RobotLines rl = robot_lines(world);
    const Vec2 v_orca = solve_lines(rl);
    const double speed = norm(v_orca);
    double heading_error = 0.0;
    if (speed > 1e-9) {
        heading_error = normalize_angle(std::atan2(v_orca.y, v_orca.x) - world.robot.pose.theta);
    } else {
        heading_error = obs::relative_goal(world.robot.pose, world.robot.goal).heading_error;
    }
    double v = speed * std::max(0.0, std::cos(heading_error));
    // The unicycle can only move along its heading: shorten the step so that
    // v * heading stays inside every obstacle half-plane that admits standing
    // still (obstacles take no share of the avoidance).
    const Vec2 h = world.robot.pose.heading();
    for (std::size_t i = 0; i < rl.num_obstacle_lines; ++i) {
        const orca::OrcaLine& line = rl.lines[i];
        if (!orca::permits(line, {0.0, 0.0})) continue;
        const double dh = det(line.direction, h);
        if (dh < 0.0) v = std::min(v, det(line.direction, line.point) / dh);
    }
    return quantize_action(std::max(0.0, v), k_theta_ * heading_error, false, world.params.action_mode);
}

ActionCommand ScriptedController::act(const WorldState& world, const obs::ObservationFrame*) {
    if (actions_.empty()) return {};
    const auto i = std::min(static_cast<std::size_t>(world.step), actions_.size() - 1);
    return actions_[i];
}

bool FdPolicy::beep(const WorldState& world, const obs::ObservationFrame*, const ActionCommand&) {
    return interaction::fd_policy(min_pedestrian_distance(world.robot.pose.position(), world.pedestrians,
                                                          world.robot.radius),
                                  params_);
}

bool FdvPolicy::beep(const WorldState& world, const obs::ObservationFrame*, const ActionCommand&) {
    return interaction::fdv_policy(interaction::relative_pedestrians(world.robot.pose.position(), world.pedestrians),
                                   params_);
}

bool BeepAtStepsPolicy::beep(const WorldState& world, const obs::ObservationFrame*, const ActionCommand&) {
    return std::find(steps_.begin(), steps_.end(), world.step) != steps_.end();
}

// ---------------------------------------------------------------------------
// Episodes

namespace {

TrajectoryRow snapshot(const WorldState& world) {
    return {world.step, world.robot.pose, world.robot.command, world.pedestrians};
}

}  // namespace

EpisodeResult run_from(WorldState world, NavigationController& nav, InteractionPolicy& policy, std::uint64_t seed,
                       bool record, int max_ticks) {
    EpisodeResult result;
    if (record) {
        Trajectory t;
        t.robot_goal = world.robot.goal;
        t.robot_radius = world.robot.radius;
        t.pedestrian_radius = world.params.pedestrian_radius;
        t.audible_radius = world.params.emotion.audible_radius;
        for (const Pedestrian& p : world.pedestrians) t.pedestrian_goals.push_back(p.goal);
        t.obstacles = world.obstacles;
        t.rows.push_back(snapshot(world));
        result.trajectory = std::move(t);
    }
    std::vector<Vec2> positions{world.robot.pose.position()};
    result.min_surface_distance = robot_pedestrian_clearance(world);

    const bool wants_frame = nav.needs_observation() || policy.needs_observation();
    Status status = evaluate_status(world);
    int ticks = 0;
    try {
        nav.begin_episode(world, seed);
        while (status == Status::Running && (max_ticks < 0 || ticks < max_ticks)) {
            std::optional<obs::ObservationFrame> frame;
            if (wants_frame) frame = observe(world);
            const obs::ObservationFrame* fp = frame ? &*frame : nullptr;

            ActionCommand action = nav.act(world, fp);
            action.beep = action.beep || policy.beep(world, fp, action);
            const TickEvents events = advance(world, action);
            ++ticks;

            result.actions.push_back(world.robot.command);
            if (events.beeped) ++result.beep_steps;
            result.min_surface_distance = std::min(result.min_surface_distance, robot_pedestrian_clearance(world));
            positions.push_back(world.robot.pose.position());
            if (record) result.trajectory->rows.push_back(snapshot(world));
            status = events.status;
        }
    } catch (const ControllerAborted&) {
        status = Status::Aborted;
    }
    nav.end_episode(world, status);

    result.status = status;
    result.steps = ticks;
    result.final_goal_distance = goal_distance(world);
    if (positions.size() > static_cast<std::size_t>(kStuckWindow)) {
        result.stuck = norm(positions.back() - positions[positions.size() - 1 - kStuckWindow]) < kStuckDisplacement;
    }
    return result;
}

EpisodeResult run_episode(const Scenario& scenario, NavigationController& nav, InteractionPolicy& policy,
                          std::uint64_t seed, bool record) {
    return run_from(make_world(scenario), nav, policy, seed, record);
}

Metrics aggregate(std::span<const EpisodeResult> results) {
    Metrics m;
    double success_steps = 0.0;
    for (const EpisodeResult& r : results) {
        switch (r.status) {
            case Status::Aborted: ++m.aborted; continue;
            case Status::Success:
                ++m.successes;
                success_steps += r.steps;
                break;
            case Status::PedCollision: ++m.ped_collisions; break;
            case Status::ObstacleCollision: ++m.obstacle_collisions; break;
            case Status::Timeout: ++m.timeouts; break;
            case Status::Running: throw ValidationError("cannot aggregate an unfinished episode");
        }
        ++m.episodes;
        m.total_steps += r.steps;
        m.beep_steps += r.beep_steps;
    }
    if (m.episodes == 0) throw ValidationError("cannot aggregate an empty result list");
    const double n = m.episodes;
    m.success_rate = m.successes / n;
    m.ped_collision_rate = m.ped_collisions / n;
    m.obstacle_collision_rate = m.obstacle_collisions / n;
    m.timeout_rate = m.timeouts / n;
    m.beep_rate = m.total_steps > 0 ? static_cast<double>(m.beep_steps) / static_cast<double>(m.total_steps) : 0.0;
    m.mean_steps_on_success = m.successes > 0 ? success_steps / m.successes : 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// Trajectory files

namespace {

constexpr std::string_view kTrajectoryMagic = "# socnav trajectory v1";

std::string join_points(const std::vector<Vec2>& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) out += ';';
        out += fmt::format("{},{}", pts[i].x, pts[i].y);
    }
    return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    if (s == "inf") return kInfiniteDistance;
    if (s == "-inf") return -kInfiniteDistance;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(where, fmt::format("expected a number, got '{}'", s));
    }
    return v;
}

std::vector<Vec2> parse_points(std::string_view s, const std::string& where) {
    std::vector<Vec2> pts;
    if (s.empty()) return pts;
    for (std::string_view item : split(s, ';')) {
        const auto xy = split(item, ',');
        if (xy.size() != 2) throw ParseError(where, fmt::format("expected x,y pair, got '{}'", item));
        pts.push_back({parse_double(xy[0], where), parse_double(xy[1], where)});
    }
    return pts;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& t) {
    std::string out;
    out += kTrajectoryMagic;
    out += '\n';
    out += fmt::format("# robot_goal={},{}\n", t.robot_goal.x, t.robot_goal.y);
    out += fmt::format("# robot_radius={}\n", t.robot_radius);
    out += fmt::format("# pedestrian_radius={}\n", t.pedestrian_radius);
    out += fmt::format("# audible_radius={}\n", t.audible_radius);
    out += fmt::format("# pedestrian_goals={}\n", join_points(t.pedestrian_goals));
    for (const Obstacle& o : t.obstacles) {
        if (const auto* d = std::get_if<Disc>(&o.shape)) {
            out += fmt::format("# obstacle=disc:{},{},{}\n", d->center.x, d->center.y, d->radius);
        } else {
            out += fmt::format("# obstacle=polygon:{}\n", join_points(std::get<Polygon>(o.shape).vertices));
        }
    }
    out += "step,x,y,theta,v,omega,beep";
    for (std::size_t i = 0; i < t.pedestrian_goals.size(); ++i) {
        out += fmt::format(",p{0}_x,p{0}_y,p{0}_vx,p{0}_vy,p{0}_emotion", i);
    }
    out += '\n';
    for (const TrajectoryRow& r : t.rows) {
        out += fmt::format("{},{},{},{},{},{},{}", r.step, r.pose.x, r.pose.y, r.pose.theta, r.command.v,
                           r.command.omega, r.command.beep ? 1 : 0);
        for (const Pedestrian& p : r.pedestrians) {
            out += fmt::format(",{},{},{},{},{}", p.position.x, p.position.y, p.velocity.x, p.velocity.y, p.emotion);
        }
        out += '\n';
    }
    return out;
}

Trajectory trajectory_from_csv(const std::string& text) {
    Trajectory t;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    bool magic_seen = false;
    std::size_t n_peds = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = fmt::format("line {}", line_no);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line == kTrajectoryMagic) {
                magic_seen = true;
                continue;
            }
            const std::string_view body = std::string_view(line).substr(std::min<std::size_t>(2, line.size()));
            const std::size_t eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            const std::string_view key = body.substr(0, eq);
            const std::string_view value = body.substr(eq + 1);
            if (key == "robot_goal") {
                const auto pts = parse_points(value, where);
                if (pts.size() != 1) throw ParseError(where, "robot_goal needs one point");
                t.robot_goal = pts[0];
            } else if (key == "robot_radius") {
                t.robot_radius = parse_double(value, where);
            } else if (key == "pedestrian_radius") {
                t.pedestrian_radius = parse_double(value, where);
            } else if (key == "audible_radius") {
                t.audible_radius = parse_double(value, where);
            } else if (key == "pedestrian_goals") {
                t.pedestrian_goals = parse_points(value, where);
            } else if (key == "obstacle") {
                if (value.starts_with("disc:")) {
                    const auto f = split(value.substr(5), ',');
                    if (f.size() != 3) throw ParseError(where, "disc obstacle needs cx,cy,r");
                    t.obstacles.push_back(Obstacle::disc({parse_double(f[0], where), parse_double(f[1], where)},
                                                         parse_double(f[2], where)));
                } else if (value.starts_with("polygon:")) {
                    t.obstacles.push_back({Polygon{parse_points(value.substr(8), where)}});
                } else {
                    throw ParseError(where, "unknown obstacle kind");
                }
            }
            continue;
        }
        if (!header_seen) {
            if (!magic_seen) throw ParseError(where, "missing trajectory header comment");
            const auto cols = split(line, ',');
            if (cols.size() < 7 || cols[0] != "step" || (cols.size() - 7) % 5 != 0) {
                throw ParseError(where, "malformed header row");
            }
            n_peds = (cols.size() - 7) / 5;
            if (n_peds != t.pedestrian_goals.size()) {
                throw ParseError(where, "header pedestrian columns disagree with pedestrian_goals");
            }
            header_seen = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 7 + 5 * n_peds) {
            throw ParseError(where, fmt::format("expected {} fields, got {}", 7 + 5 * n_peds, f.size()));
        }
        TrajectoryRow r;
        r.step = static_cast<int>(parse_double(f[0], where));
        r.pose = {parse_double(f[1], where), parse_double(f[2], where), parse_double(f[3], where)};
        r.command = {parse_double(f[4], where), parse_double(f[5], where), f[6] == "1"};
        for (std::size_t i = 0; i < n_peds; ++i) {
            Pedestrian p;
            const std::size_t b = 7 + 5 * i;
            p.position = {parse_double(f[b], where), parse_double(f[b + 1], where)};
            p.velocity = {parse_double(f[b + 2], where), parse_double(f[b + 3], where)};
            p.emotion = parse_double(f[b + 4], where);
            p.goal = t.pedestrian_goals[i];
            p.radius = t.pedestrian_radius;
            r.pedestrians.push_back(p);
        }
        t.rows.push_back(std::move(r));
    }
    if (!header_seen) throw ParseError(fmt::format("line {}", line_no), "no header row");
    return t;
}

void write_trajectory(const Trajectory& trajectory, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << trajectory_to_csv(trajectory);
}

Trajectory read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return trajectory_from_csv(buffer.str());
}

}  // namespace socnav

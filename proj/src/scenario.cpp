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

#include "socnav/scenario.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "socnav/rng.hpp"

namespace socnav {

using detail::json;

// ---------------------------------------------------------------------------
// Validation

namespace {

/// Surface distance between two obstacles (<= 0 when they intersect).
double obstacle_gap(const Obstacle& a, const Obstacle& b) {
    const auto* da = std::get_if<Disc>(&a.shape);
    const auto* db = std::get_if<Disc>(&b.shape);
    if (da && db) return norm(da->center - db->center) - da->radius - db->radius;
    if (da) return (contains(b, da->center) ? -1.0 : distance_to(b, da->center)) - da->radius;
    if (db) return (contains(a, db->center) ? -1.0 : distance_to(a, db->center)) - db->radius;
    double best = kInfiniteDistance;
    for (const Vec2& v : std::get<Polygon>(a.shape).vertices) best = std::min(best, contains(b, v) ? -1.0 : distance_to(b, v));
    for (const Vec2& v : std::get<Polygon>(b.shape).vertices) best = std::min(best, contains(a, v) ? -1.0 : distance_to(a, v));
    return best;
}

/// Surface distance from a disc agent to an obstacle.
double agent_obstacle_gap(const Vec2& center, double radius, const Obstacle& o) {
    return (contains(o, center) ? -1.0 : distance_to(o, center)) - radius;
}

}  // namespace

void validate(const Scenario& s) {
    const ScenarioParams& p = s.params;
    orca::validate(p.avoidance);
    ervo::validate(p.emotion);
    interaction::validate(p.interaction);
    obs::validate(p.observation);
    if (!(p.dt > 0.0)) throw ValidationError("dt must be positive");
    if (p.max_steps < 1) throw ValidationError("max_steps must be >= 1");
    if (!(p.goal_tolerance > 0.0)) throw ValidationError("goal_tolerance must be positive");
    if (!(p.robot_radius > 0.0) || !(p.pedestrian_radius > 0.0) || !(p.pedestrian_max_speed > 0.0)) {
        throw ValidationError("radii and pedestrian max speed must be positive");
    }
    for (std::size_t i = 0; i < s.obstacles.size(); ++i) {
        try {
            validate(s.obstacles[i]);
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("obstacle {}: {}", i, e.what()));
        }
    }

    const auto check_inside = [&](const Vec2& v, const std::string& what) {
        if (!is_finite(v) || !s.bounds.contains(v)) throw ValidationError(what + " lies outside the scenario bounds");
    };
    check_inside(s.robot_start.position(), "robot start");
    check_inside(s.robot_goal, "robot goal");
    for (std::size_t i = 0; i < s.pedestrians.size(); ++i) {
        check_inside(s.pedestrians[i].start, fmt::format("pedestrian {} start", i));
        check_inside(s.pedestrians[i].goal, fmt::format("pedestrian {} goal", i));
    }

    struct Body {
        std::string name;
        Vec2 center;
        double radius;
    };
    std::vector<Body> bodies{{"robot", s.robot_start.position(), p.robot_radius}};
    for (std::size_t i = 0; i < s.pedestrians.size(); ++i) {
        bodies.push_back({fmt::format("pedestrian {}", i), s.pedestrians[i].start, p.pedestrian_radius});
    }
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        for (std::size_t j = i + 1; j < bodies.size(); ++j) {
            if (norm(bodies[i].center - bodies[j].center) < bodies[i].radius + bodies[j].radius) {
                throw ValidationError(fmt::format("{} and {} start overlapping", bodies[i].name, bodies[j].name));
            }
        }
        for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
            if (agent_obstacle_gap(bodies[i].center, bodies[i].radius, s.obstacles[k]) < 0.0) {
                throw ValidationError(fmt::format("{} starts overlapping obstacle {}", bodies[i].name, k));
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Generators

namespace {

Vec2 uniform_point(Rng& rng, const Bounds& b, double margin) {
    return {rng.uniform(b.min.x + margin, b.max.x - margin), rng.uniform(b.min.y + margin, b.max.y - margin)};
}

template <class Accept, class Sample>
auto place(const std::string& entity, Sample&& sample, Accept&& accept) {
    for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
        auto candidate = sample();
        if (accept(candidate)) return candidate;
    }
    throw PlacementError(fmt::format("could not place {} after {} attempts", entity, kMaxPlacementAttempts));
}

double heading_to(const Vec2& from, const Vec2& to) {
    const Vec2 d = to - from;
    return abs_sq(d) > 0.0 ? normalize_angle(std::atan2(d.y, d.x)) : 0.0;
}

}  // namespace

Scenario gen_random(std::uint64_t seed, const RandomScenarioOptions& options, const ScenarioParams& params) {
    if (options.pedestrians < 0 || options.obstacles < 0) throw ValidationError("entity counts must be nonnegative");
    Rng rng(seed);
    Scenario s;
    s.kind = "random";
    s.seed = seed;
    s.bounds = options.bounds;
    s.params = params;
    const double clear = kPlacementClearance;
    const double r_robot = params.robot_radius;
    const double r_ped = params.pedestrian_radius;

    for (int k = 0; k < options.obstacles; ++k) {
        s.obstacles.push_back(place(
            fmt::format("obstacle {}", k),
            [&] {
                if (rng.bernoulli(0.5)) {
                    const double w = rng.uniform(0.4, 1.2);
                    const double h = rng.uniform(0.4, 1.2);
                    const Vec2 c = uniform_point(rng, s.bounds, 0.5 * std::max(w, h));
                    return Obstacle::box(c, w, h);
                }
                const double r = rng.uniform(0.2, 0.6);
                return Obstacle::disc(uniform_point(rng, s.bounds, r), r);
            },
            [&](const Obstacle& o) {
                return std::all_of(s.obstacles.begin(), s.obstacles.end(),
                                   [&](const Obstacle& other) { return obstacle_gap(o, other) >= clear; });
            }));
    }

    const auto clear_of_obstacles = [&](const Vec2& p, double r) {
        return std::all_of(s.obstacles.begin(), s.obstacles.end(),
                           [&](const Obstacle& o) { return agent_obstacle_gap(p, r, o) >= clear; });
    };

    std::vector<std::pair<Vec2, double>> starts;
    std::vector<std::pair<Vec2, double>> goals;
    const auto clear_of = [&](const std::vector<std::pair<Vec2, double>>& placed, const Vec2& p, double r) {
        return std::all_of(placed.begin(), placed.end(),
                           [&](const auto& b) { return norm(b.first - p) - b.second - r >= clear; });
    };

    const Vec2 robot_start = place(
        "robot start", [&] { return uniform_point(rng, s.bounds, r_robot); },
        [&](const Vec2& p) { return clear_of_obstacles(p, r_robot); });
    s.robot_goal = place(
        "robot goal", [&] { return uniform_point(rng, s.bounds, r_robot); },
        [&](const Vec2& p) {
            return norm(p - robot_start) >= options.min_goal_distance && clear_of_obstacles(p, r_robot);
        });
    s.robot_start = {robot_start.x, robot_start.y, heading_to(robot_start, s.robot_goal)};
    starts.emplace_back(robot_start, r_robot);
    goals.emplace_back(s.robot_goal, r_robot);

    for (int k = 0; k < options.pedestrians; ++k) {
        const Vec2 start = place(
            fmt::format("pedestrian {} start", k), [&] { return uniform_point(rng, s.bounds, r_ped); },
            [&](const Vec2& p) { return clear_of_obstacles(p, r_ped) && clear_of(starts, p, r_ped); });
        const Vec2 goal = place(
            fmt::format("pedestrian {} goal", k), [&] { return uniform_point(rng, s.bounds, r_ped); },
            [&](const Vec2& p) {
                return norm(p - start) >= options.min_goal_distance && clear_of_obstacles(p, r_ped) &&
                       clear_of(goals, p, r_ped);
            });
        starts.emplace_back(start, r_ped);
        goals.emplace_back(goal, r_ped);
        s.pedestrians.push_back({start, goal});
    }
    return s;
}

Scenario gen_circular(std::uint64_t seed, const CircularScenarioOptions& options, const ScenarioParams& params) {
    if (options.pedestrians < 0) throw ValidationError("pedestrian count must be nonnegative");
    if (!(options.radius_min > 0.0) || options.radius_max < options.radius_min) {
        throw ValidationError("circle radius range must satisfy 0 < min <= max");
    }
    Rng rng(seed);
    Scenario s;
    s.kind = "circular";
    s.seed = seed;
    s.params = params;
    const double margin = std::max(params.robot_radius, params.pedestrian_radius) + 1.0;
    s.bounds = {{-options.radius_max - margin, -options.radius_max - margin},
                {options.radius_max + margin, options.radius_max + margin}};

    const double radius = rng.uniform(options.radius_min, options.radius_max);
    const int agents = options.pedestrians + 1;
    const double chord = 2.0 * std::max(params.robot_radius, params.pedestrian_radius) + kPlacementClearance;
    const double slot = 2.0 * kPi / agents;
    const double min_sep = chord > 2.0 * radius ? kInfiniteDistance : 2.0 * std::asin(chord / (2.0 * radius));
    if (agents > 1 && slot < min_sep) {
        throw PlacementError(fmt::format("could not place pedestrian {}: circle of radius {} too small for {} agents",
                                         options.pedestrians - 1, radius, agents));
    }
    // Jitter keeps neighbouring angles at least min_sep apart.
    const double jitter = agents > 1 ? 0.5 * (slot - min_sep) : kPi;
    const double offset = rng.uniform(0.0, 2.0 * kPi);

    for (int k = 0; k < agents; ++k) {
        const double angle = offset + k * slot + rng.uniform(-jitter, jitter);
        const Vec2 start = radius * Vec2{std::cos(angle), std::sin(angle)};
        const Vec2 goal = -start;
        if (k == 0) {
            s.robot_start = {start.x, start.y, heading_to(start, goal)};
            s.robot_goal = goal;
        } else {
            s.pedestrians.push_back({start, goal});
        }
    }
    return s;
}

Scenario gen_canonical_beep(std::uint64_t seed, const ScenarioParams& params) {
    Rng rng(seed);
    Scenario s;
    s.kind = "canonical";
    s.seed = seed;
    s.params = params;
    s.bounds = {{-2.0, -5.0}, {12.0, 5.0}};
    s.robot_start = {0.0, 0.0, 0.0};
    s.robot_goal = {10.0, 0.0};
    for (int k = 0; k < 4; ++k) {
        const double x = 1.4 + 0.7 * k + rng.uniform(-0.02, 0.02);
        const double y = -1.6 + rng.uniform(-0.1, 0.1);
        s.pedestrians.push_back({{x, y}, {x, 3.5}});
    }
    return s;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json obstacle_to_json(const Obstacle& o) {
    if (const auto* d = std::get_if<Disc>(&o.shape)) {
        return {{"disc", {{"center", detail::to_json(d->center)}, {"radius", d->radius}}}};
    }
    json verts = json::array();
    for (const Vec2& v : std::get<Polygon>(o.shape).vertices) verts.push_back(detail::to_json(v));
    return {{"polygon", verts}};
}

Obstacle obstacle_from_json(const json& j, const std::string& path) {
    detail::expect_object(j, path);
    if (j.size() != 1) throw ParseError(path, "obstacle must have exactly one of 'disc' or 'polygon'");
    if (j.contains("disc")) {
        const std::string p = detail::child_path(path, "disc");
        const json& d = j["disc"];
        detail::reject_unknown(d, p, {"center", "radius"});
        return Obstacle::disc(detail::as_vec2(detail::required(d, p, "center"), detail::child_path(p, "center")),
                              detail::as_number(detail::required(d, p, "radius"), detail::child_path(p, "radius")));
    }
    if (j.contains("polygon")) {
        const std::string p = detail::child_path(path, "polygon");
        const json& verts = j["polygon"];
        if (!verts.is_array()) throw ParseError(p, "expected an array of [x, y]");
        Polygon poly;
        for (std::size_t i = 0; i < verts.size(); ++i) poly.vertices.push_back(detail::as_vec2(verts[i], detail::child_path(p, i)));
        return {std::move(poly)};
    }
    throw ParseError(detail::child_path(path, j.begin().key()), "unknown field");
}

json params_to_json(const ScenarioParams& p) {
    return {
        {"dt", p.dt},
        {"max_steps", p.max_steps},
        {"goal_tolerance", p.goal_tolerance},
        {"action_mode", std::string(to_string(p.action_mode))},
        {"robot_radius", p.robot_radius},
        {"pedestrian", {{"radius", p.pedestrian_radius}, {"max_speed", p.pedestrian_max_speed}}},
        {"avoidance",
         {{"time_horizon_agents", p.avoidance.time_horizon_agents},
          {"time_horizon_obstacles", p.avoidance.time_horizon_obstacles},
          {"neighbor_range", p.avoidance.neighbor_range},
          {"max_neighbors", p.avoidance.max_neighbors}}},
        {"emotion",
         {{"audible_radius", p.emotion.audible_radius},
          {"peak_gain", p.emotion.peak_gain},
          {"decay_rate", p.emotion.decay_rate},
          {"contagion_rate", p.emotion.contagion_rate},
          {"contagion_radius", p.emotion.contagion_radius},
          {"responsibility_gain", p.emotion.responsibility_gain},
          {"radius_gain", p.emotion.radius_gain},
          {"repulsion_gain", p.emotion.repulsion_gain}}},
        {"interaction", {{"d_theta", p.interaction.d_theta}, {"v_theta", p.interaction.v_theta}}},
        {"observation",
         {{"size", p.observation.size},
          {"resolution", p.observation.resolution},
          {"raycast", p.observation.raycast},
          {"beams", p.observation.beams}}},
    };
}

ScenarioParams params_from_json(const json& j, const std::string& path) {
    using namespace detail;
    reject_unknown(j, path,
                   {"dt", "max_steps", "goal_tolerance", "action_mode", "robot_radius", "pedestrian", "avoidance",
                    "emotion", "interaction", "observation"});
    ScenarioParams p;
    p.dt = number_or(j, path, "dt", p.dt);
    p.max_steps = static_cast<int>(integer_or(j, path, "max_steps", p.max_steps));
    p.goal_tolerance = number_or(j, path, "goal_tolerance", p.goal_tolerance);
    p.robot_radius = number_or(j, path, "robot_radius", p.robot_radius);
    if (j.contains("action_mode")) {
        try {
            p.action_mode = parse_action_mode(string_or(j, path, "action_mode", ""));
        } catch (const ValidationError& e) {
            throw ParseError(child_path(path, "action_mode"), e.what());
        }
    }
    if (j.contains("pedestrian")) {
        const std::string q = child_path(path, "pedestrian");
        const json& o = j["pedestrian"];
        reject_unknown(o, q, {"radius", "max_speed"});
        p.pedestrian_radius = number_or(o, q, "radius", p.pedestrian_radius);
        p.pedestrian_max_speed = number_or(o, q, "max_speed", p.pedestrian_max_speed);
    }
    if (j.contains("avoidance")) {
        const std::string q = child_path(path, "avoidance");
        const json& o = j["avoidance"];
        reject_unknown(o, q, {"time_horizon_agents", "time_horizon_obstacles", "neighbor_range", "max_neighbors"});
        auto& a = p.avoidance;
        a.time_horizon_agents = number_or(o, q, "time_horizon_agents", a.time_horizon_agents);
        a.time_horizon_obstacles = number_or(o, q, "time_horizon_obstacles", a.time_horizon_obstacles);
        a.neighbor_range = number_or(o, q, "neighbor_range", a.neighbor_range);
        a.max_neighbors = static_cast<int>(integer_or(o, q, "max_neighbors", a.max_neighbors));
    }
    if (j.contains("emotion")) {
        const std::string q = child_path(path, "emotion");
        const json& o = j["emotion"];
        reject_unknown(o, q,
                       {"audible_radius", "peak_gain", "decay_rate", "contagion_rate", "contagion_radius",
                        "responsibility_gain", "radius_gain", "repulsion_gain"});
        auto& e = p.emotion;
        e.audible_radius = number_or(o, q, "audible_radius", e.audible_radius);
        e.peak_gain = number_or(o, q, "peak_gain", e.peak_gain);
        e.decay_rate = number_or(o, q, "decay_rate", e.decay_rate);
        e.contagion_rate = number_or(o, q, "contagion_rate", e.contagion_rate);
        e.contagion_radius = number_or(o, q, "contagion_radius", e.contagion_radius);
        e.responsibility_gain = number_or(o, q, "responsibility_gain", e.responsibility_gain);
        e.radius_gain = number_or(o, q, "radius_gain", e.radius_gain);
        e.repulsion_gain = number_or(o, q, "repulsion_gain", e.repulsion_gain);
    }
    if (j.contains("interaction")) {
        const std::string q = child_path(path, "interaction");
        const json& o = j["interaction"];
        reject_unknown(o, q, {"d_theta", "v_theta"});
        p.interaction.d_theta = number_or(o, q, "d_theta", p.interaction.d_theta);
        p.interaction.v_theta = number_or(o, q, "v_theta", p.interaction.v_theta);
    }
    if (j.contains("observation")) {
        const std::string q = child_path(path, "observation");
        const json& o = j["observation"];
        reject_unknown(o, q, {"size", "resolution", "raycast", "beams"});
        auto& c = p.observation;
        c.size = static_cast<int>(integer_or(o, q, "size", c.size));
        c.resolution = number_or(o, q, "resolution", c.resolution);
        c.raycast = bool_or(o, q, "raycast", c.raycast);
        c.beams = static_cast<int>(integer_or(o, q, "beams", c.beams));
    }
    return p;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
    json peds = json::array();
    for (const auto& p : s.pedestrians) peds.push_back({{"start", detail::to_json(p.start)}, {"goal", detail::to_json(p.goal)}});
    json obstacles = json::array();
    for (const auto& o : s.obstacles) obstacles.push_back(obstacle_to_json(o));
    const json doc = {
        {"format_version", kScenarioFormatVersion},
        {"kind", s.kind},
        {"seed", s.seed},
        {"bounds", {{"min", detail::to_json(s.bounds.min)}, {"max", detail::to_json(s.bounds.max)}}},
        {"robot",
         {{"start", json::array({s.robot_start.x, s.robot_start.y, s.robot_start.theta})},
          {"goal", detail::to_json(s.robot_goal)}}},
        {"pedestrians", peds},
        {"obstacles", obstacles},
        {"params", params_to_json(s.params)},
    };
    return doc.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
    using namespace detail;
    const json doc = parse_document(text);
    const std::string root;
    reject_unknown(doc, root, {"format_version", "kind", "seed", "bounds", "robot", "pedestrians", "obstacles", "params"});

    const long long version = integer_or(doc, root, "format_version", -1);
    if (version != kScenarioFormatVersion) {
        throw ParseError("/format_version", fmt::format("unsupported format_version {} (expected {})", version,
                                                        kScenarioFormatVersion));
    }
    Scenario s;
    s.kind = string_or(doc, root, "kind", s.kind);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ParseError("/seed", "expected a nonnegative integer");
        s.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("bounds")) {
        const json& b = doc["bounds"];
        reject_unknown(b, "/bounds", {"min", "max"});
        s.bounds.min = as_vec2(required(b, "/bounds", "min"), "/bounds/min");
        s.bounds.max = as_vec2(required(b, "/bounds", "max"), "/bounds/max");
    }

    const json& robot = required(doc, root, "robot");
    reject_unknown(robot, "/robot", {"start", "goal"});
    const json& start = required(robot, "/robot", "start");
    if (!start.is_array() || start.size() != 3) throw ParseError("/robot/start", "expected [x, y, theta]");
    s.robot_start = {as_number(start[0], "/robot/start/0"), as_number(start[1], "/robot/start/1"),
                     normalize_angle(as_number(start[2], "/robot/start/2"))};
    s.robot_goal = as_vec2(required(robot, "/robot", "goal"), "/robot/goal");

    if (doc.contains("pedestrians")) {
        const json& peds = doc["pedestrians"];
        if (!peds.is_array()) throw ParseError("/pedestrians", "expected an array");
        for (std::size_t i = 0; i < peds.size(); ++i) {
            const std::string p = child_path("/pedestrians", i);
            reject_unknown(peds[i], p, {"start", "goal"});
            s.pedestrians.push_back({as_vec2(required(peds[i], p, "start"), child_path(p, "start")),
                                     as_vec2(required(peds[i], p, "goal"), child_path(p, "goal"))});
        }
    }
    if (doc.contains("obstacles")) {
        const json& obstacles = doc["obstacles"];
        if (!obstacles.is_array()) throw ParseError("/obstacles", "expected an array");
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            s.obstacles.push_back(obstacle_from_json(obstacles[i], child_path("/obstacles", i)));
        }
    }
    if (doc.contains("params")) s.params = params_from_json(doc["params"], "/params");

    validate(s);
    return s;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << scenario_to_json(scenario);
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return scenario_from_json(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ":" + e.where(), e.detail());
    }
}

}  // namespace socnav

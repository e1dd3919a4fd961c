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

#include "socnav/sli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "socnav/base64.hpp"
#include "socnav/error.hpp"
#include "socnav/rng.hpp"

namespace socnav::sli {

RolloutOutcome counterfactual_rollout(const WorldState& start, const ActionCommand& first, const OracleParams& params) {
    WorldState world = start;
    world.params.max_steps = std::numeric_limits<int>::max();
    OrcaRobotController controller(params.k_theta);
    RolloutOutcome out;
    const double d0 = goal_distance(world);
    for (int k = 0; k < params.horizon; ++k) {
        ActionCommand action = first;
        if (k > 0) action = controller.act(world, nullptr);
        const TickEvents events = advance(world, action);
        out.min_surface_distance = std::min(out.min_surface_distance, robot_pedestrian_clearance(world));
        if (events.ped_collision || events.obstacle_collision) {
            out.collided = true;
            break;
        }
        if (events.reached_goal) {
            out.reached_goal = true;
            break;
        }
    }
    out.progress = d0 - goal_distance(world);
    return out;
}

OracleVerdict label_oracle(const WorldState& world, const ActionCommand& candidate, const OracleParams& params) {
    OracleVerdict v;
    ActionCommand quiet = candidate;
    quiet.beep = false;
    ActionCommand loud = candidate;
    loud.beep = true;
    v.quiet = counterfactual_rollout(world, quiet, params);

    const RolloutOutcome& a = v.quiet;
    const bool collides = a.collided;
    const bool too_close = a.min_surface_distance < params.d_safe;
    const bool stalled = !a.reached_goal && a.progress < params.stall;
    if (!collides && !too_close && !stalled) return v;

    v.beeped = counterfactual_rollout(world, loud, params);
    const RolloutOutcome& b = v.beeped;
    v.beep = (collides && !b.collided) ||
             (too_close && b.min_surface_distance > a.min_surface_distance + params.margin) ||
             (stalled && (b.reached_goal || b.progress > a.progress + params.margin));
    return v;
}

// ---------------------------------------------------------------------------
// Dataset generation

namespace {

struct EpisodeSamples {
    std::vector<LabeledSample> kept;
};

Scenario episode_scenario(const DatasetOptions& o, std::size_t episode) {
    const std::uint64_t seed = derive_seed(o.seed, 2 * episode);
    return episode % 2 == 0 ? gen_random(seed, o.random, o.params) : gen_circular(seed, o.circular, o.params);
}

/// Replays one collection episode. In `beeps_only` mode every visited state is
/// labelled and only beep-labelled ones are kept; otherwise states are kept
/// with probability sample_probability, regardless of label.
EpisodeSamples collect_episode(const DatasetOptions& o, std::size_t episode, bool beeps_only) {
    EpisodeSamples out;
    WorldState world = make_world(episode_scenario(o, episode));
    Rng pick(derive_seed(o.seed, 2 * episode + 1));
    OrcaRobotController nav(o.oracle.k_theta);
    // Half of the episodes beep by the distance rule so that states after a
    // beep are represented as well.
    const bool behave_fd = (episode / 2) % 2 == 1;
    FdPolicy fd(o.params.interaction);
    while (evaluate_status(world) == Status::Running) {
        ActionCommand action = nav.act(world, nullptr);
        const bool keep = beeps_only || pick.bernoulli(o.sample_probability);
        if (keep) {
            const OracleVerdict verdict = label_oracle(world, action, o.oracle);
            if (!beeps_only || verdict.beep) {
                out.kept.push_back({obs::pedestrian_maps(world.pedestrians, world.robot.pose, world.params.observation),
                                    action.v, action.omega, verdict.beep});
            }
        }
        action.beep = behave_fd && fd.beep(world, nullptr, action);
        advance(world, action);
    }
    return out;
}

/// Collects episodes [first, first + n) on `threads` workers, in index order.
std::vector<EpisodeSamples> collect_block(const DatasetOptions& o, std::size_t first, std::size_t n, bool beeps_only) {
    std::vector<EpisodeSamples> out(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) out[i] = collect_episode(o, first + i, beeps_only);
    };
    const int threads = std::max(1, o.threads);
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
    return out;
}

}  // namespace

std::vector<LabeledSample> generate_dataset(const DatasetOptions& o, DatasetReport* report) {
    if (o.count < 1) throw ValidationError("dataset count must be >= 1");
    if (!(o.sample_probability > 0.0 && o.sample_probability <= 1.0)) {
        throw ValidationError("sample_probability must lie in (0, 1]");
    }
    if (o.target_beep_fraction < 0.0 || o.target_beep_fraction > 1.0) {
        throw ValidationError("target_beep_fraction must lie in [0, 1]");
    }
    const std::size_t block = 8 * static_cast<std::size_t>(std::max(1, o.threads));
    DatasetReport r;
    std::vector<LabeledSample> samples;
    std::size_t episode = 0;
    while (samples.size() < o.count) {
        for (EpisodeSamples& e : collect_block(o, episode, block, false)) {
            ++r.episodes;
            for (LabeledSample& s : e.kept) {
                if (samples.size() < o.count) samples.push_back(std::move(s));
            }
            if (samples.size() >= o.count) break;
        }
        episode += block;
    }
    r.raw_samples = samples.size();
    r.raw_beeps = static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [](const LabeledSample& s) { return s.beep; }));
    r.beeps = r.raw_beeps;

    if (r.raw_beep_fraction() < o.min_beep_fraction) {
        r.rebalanced = true;
        const auto target = static_cast<std::size_t>(std::ceil(o.target_beep_fraction * static_cast<double>(o.count)));
        std::vector<LabeledSample> extra;
        // Fresh episodes, beyond those already used, with every state labelled.
        std::size_t attempts = 0;
        while (r.raw_beeps + extra.size() < target) {
            std::size_t found = 0;
            for (EpisodeSamples& e : collect_block(o, episode, block, true)) {
                ++r.episodes;
                found += e.kept.size();
                for (LabeledSample& s : e.kept) {
                    if (r.raw_beeps + extra.size() < target) extra.push_back(std::move(s));
                }
            }
            episode += block;
            attempts = found == 0 ? attempts + 1 : 0;
            if (attempts >= 16) throw Error("rebalancing found no beep-labelled states in 16 consecutive blocks");
        }
        // Replace the trailing quiet samples with the extra beep samples.
        std::vector<LabeledSample> merged;
        merged.reserve(o.count);
        const std::size_t quiet_keep = o.count - r.raw_beeps - extra.size();
        std::size_t quiet_taken = 0;
        for (LabeledSample& s : samples) {
            if (s.beep) {
                merged.push_back(std::move(s));
            } else if (quiet_taken < quiet_keep) {
                merged.push_back(std::move(s));
                ++quiet_taken;
            }
        }
        for (LabeledSample& s : extra) merged.push_back(std::move(s));
        samples = std::move(merged);
        r.beeps = r.raw_beeps + extra.size();
    }
    if (report != nullptr) *report = r;
    return samples;
}

// ---------------------------------------------------------------------------
// Dataset files

namespace {

constexpr std::string_view kDatasetMagic = "# socnav dataset v1";

double parse_field(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError(fmt::format("line {}", line), fmt::format("expected a finite number, got '{}'", s));
    }
    return v;
}

}  // namespace

std::string dataset_to_text(std::span<const LabeledSample> samples) {
    std::string out(kDatasetMagic);
    out += '\n';
    for (const LabeledSample& s : samples) {
        out += encode_floats(s.ped_maps);
        out += fmt::format(" {} {} {}\n", s.v, s.omega, s.beep ? 1 : 0);
    }
    return out;
}

std::vector<LabeledSample> dataset_from_text(const std::string& text) {
    std::vector<LabeledSample> out;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        while (!rest.empty()) {
            const std::size_t sp = rest.find(' ');
            f.push_back(rest.substr(0, sp));
            if (sp == std::string_view::npos) break;
            rest.remove_prefix(sp + 1);
        }
        if (f.size() != 4) throw ParseError(fmt::format("line {}", line_no), fmt::format("expected 4 fields, got {}", f.size()));
        LabeledSample s;
        try {
            s.ped_maps = decode_floats(f[0]);
        } catch (const Error& e) {
            throw ParseError(fmt::format("line {}", line_no), e.what());
        }
        if (width == 0) width = s.ped_maps.size();
        if (s.ped_maps.size() != width) {
            throw ParseError(fmt::format("line {}", line_no),
                             fmt::format("maps have {} values, earlier records have {}", s.ped_maps.size(), width));
        }
        for (float x : s.ped_maps) {
            if (!std::isfinite(x)) throw ParseError(fmt::format("line {}", line_no), "non-finite map value");
        }
        s.v = parse_field(f[1], line_no);
        s.omega = parse_field(f[2], line_no);
        if (f[3] != "0" && f[3] != "1") throw ParseError(fmt::format("line {}", line_no), "label must be 0 or 1");
        s.beep = f[3] == "1";
        out.push_back(std::move(s));
    }
    return out;
}

void write_dataset(std::span<const LabeledSample> samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << dataset_to_text(samples);
}

std::vector<LabeledSample> read_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return dataset_from_text(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.where(), e.detail());
    }
}

// ---------------------------------------------------------------------------

SliPolicy::SliPolicy(std::shared_ptr<const ClassifierModel> model) : model_(std::move(model)) {
    if (!model_) throw ValidationError("SLI policy needs a model");
    validate(*model_);
}

bool SliPolicy::beep(const WorldState& world, const obs::ObservationFrame* frame, const ActionCommand& next) {
    if (frame != nullptr) return model_->decide(frame->ped_maps, next.v, next.omega);
    const auto maps = obs::pedestrian_maps(world.pedestrians, world.robot.pose, world.params.observation);
    return model_->decide(maps, next.v, next.omega);
}

}  // namespace socnav::sli

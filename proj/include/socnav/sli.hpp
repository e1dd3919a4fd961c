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

/// Rollout labels, dataset generation and the learned beep policy.

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "socnav/classifier.hpp"
#include "socnav/engine.hpp"

namespace socnav::sli {

struct OracleParams {
    int horizon = 20;          ///< K, ticks per counterfactual rollout
    double d_safe = 0.3;       ///< m, minimum acceptable surface distance
    double stall = 0.15;       ///< m, minimum net goal progress over the horizon
    double margin = 1e-6;      ///< strict-improvement margin
    double k_theta = 2.0;      ///< gain of the goal-seeking controller used after the first tick
};

struct RolloutOutcome {
    bool collided = false;
    double min_surface_distance = kInfiniteDistance;  ///< over post-tick states
    double progress = 0.0;                            ///< goal distance reduction, m
    bool reached_goal = false;
};

/// Applies `first` (with the given beep flag) then the ORCA robot controller
/// for the rest of the horizon. The episode step cap is ignored.
RolloutOutcome counterfactual_rollout(const WorldState& world, const ActionCommand& first, const OracleParams& params);

struct OracleVerdict {
    bool beep = false;
    RolloutOutcome quiet;   ///< rollout A
    RolloutOutcome beeped;  ///< rollout B
};

/// beep iff rollout A violates (collision | distance < d_safe | progress < stall)
/// and rollout B strictly improves one of the violated quantities.
OracleVerdict label_oracle(const WorldState& world, const ActionCommand& candidate, const OracleParams& params = {});

struct DatasetOptions {
    std::size_t count = 10000;
    std::uint64_t seed = 0;
    /// Probability that a visited state is kept.
    double sample_probability = 0.25;
    /// Rebalance when the raw beep share is below `min_beep_fraction`...
    double min_beep_fraction = 0.05;
    /// ...by adding beep-labelled states from further episodes until this share.
    double target_beep_fraction = 0.20;
    RandomScenarioOptions random;
    CircularScenarioOptions circular;
    ScenarioParams params;
    OracleParams oracle;
    int threads = 1;
};

struct DatasetReport {
    std::size_t raw_samples = 0;
    std::size_t raw_beeps = 0;
    bool rebalanced = false;
    std::size_t beeps = 0;
    std::size_t episodes = 0;

    double raw_beep_fraction() const {
        return raw_samples == 0 ? 0.0 : static_cast<double>(raw_beeps) / static_cast<double>(raw_samples);
    }
};

/// States visited by the ORCA robot in alternating random / circular
/// scenarios, labelled by label_oracle. Exactly `count` samples; deterministic
/// per seed for any thread count.
std::vector<LabeledSample> generate_dataset(const DatasetOptions& options, DatasetReport* report = nullptr);

/// One record per line: base64(float32 LE maps) v omega label(0|1).
/// Lines starting with '#' are comments.
void write_dataset(std::span<const LabeledSample> samples, const std::filesystem::path& path);
std::string dataset_to_text(std::span<const LabeledSample> samples);
std::vector<LabeledSample> dataset_from_text(const std::string& text);
std::vector<LabeledSample> read_dataset(const std::filesystem::path& path);

/// Beeps when the classifier says so for the current pedestrian maps and the
/// navigation command about to be applied.
class SliPolicy : public InteractionPolicy {
public:
    explicit SliPolicy(std::shared_ptr<const ClassifierModel> model);
    bool beep(const WorldState& world, const obs::ObservationFrame* frame, const ActionCommand& next) override;
    bool needs_observation() const override { return true; }

private:
    std::shared_ptr<const ClassifierModel> model_;
};

}  // namespace socnav::sli

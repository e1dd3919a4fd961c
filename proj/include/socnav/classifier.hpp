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

/// Beep classifier over pedestrian maps and the next robot command.
///
///   maps 3xSxS -> conv3x3/2 + ReLU (x3) -> flatten ++ (v/v_scale, w/w_scale)
///              -> FC hidden + ReLU -> FC 2 -> softmax (no-beep, beep)
///
/// Parameters, in file order (all row-major):
///   conv_k.weight [C_out, C_in*3*3]   conv_k.bias [C_out]   k = 1..3
///   fc1.weight [hidden, features+2]   fc1.bias [hidden]
///   fc2.weight [2, hidden]            fc2.bias [2]
/// Flattened features are ordered (channel, row, col).

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace socnav::sli {

struct Architecture {
    int input_size = 48;
    int input_channels = 3;
    std::array<int, 3> conv_channels{8, 16, 16};
    int hidden = 64;

    /// Spatial side after the three stride-2 stages.
    int conv_output_size() const;
    /// Flattened conv features (without the two command inputs).
    int feature_count() const;
    int input_count() const { return input_channels * input_size * input_size; }

    bool operator==(const Architecture&) const = default;
};

void validate(const Architecture& arch);

struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    bool operator==(const Tensor&) const = default;
};

struct LabeledSample {
    std::vector<float> ped_maps;  ///< input_channels * size * size
    double v = 0.0;
    double omega = 0.0;
    bool beep = false;

    bool operator==(const LabeledSample&) const = default;
};

struct ClassifierModel {
    Architecture arch;
    double v_scale = 1.0;      ///< v is divided by this before entering the network
    double omega_scale = 1.0;
    std::vector<Tensor> params;

    bool operator==(const ClassifierModel&) const = default;

    /// He-initialised weights, zero biases.
    static ClassifierModel initialize(const Architecture& arch, double v_scale, double omega_scale,
                                      std::uint64_t seed);
    /// All weights zero; the output bias encodes `beep_rate`.
    static ClassifierModel constant(const Architecture& arch, double v_scale, double omega_scale, double beep_rate);

    /// (p_no_beep, p_beep). Throws ValidationError on a shape mismatch.
    std::array<double, 2> probabilities(std::span<const float> ped_maps, double v, double omega) const;
    double infer(std::span<const float> ped_maps, double v, double omega) const {
        return probabilities(ped_maps, v, omega)[1];
    }
    bool decide(std::span<const float> ped_maps, double v, double omega) const {
        return infer(ped_maps, v, omega) >= 0.5;
    }
    /// Beep probability for many samples at once.
    std::vector<double> infer_batch(std::span<const LabeledSample> samples) const;
};

/// Throws ValidationError when the model is internally inconsistent.
void validate(const ClassifierModel& model);

struct TrainConfig {
    int batch_size = 64;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int epochs = 200;
    /// Stop after this many epochs without a better held-out accuracy (0 = never).
    int patience = 25;
    /// Share of the dataset held out for model selection (0 = select the last epoch).
    double validation_fraction = 0.1;
    /// Shuffle the training split every epoch.
    bool shuffle = true;
    std::uint64_t seed = 0;
    Architecture arch;
};

struct EpochStats {
    int epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double validation_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;
    double best_validation_accuracy = 0.0;
    std::size_t train_samples = 0;
    std::size_t validation_samples = 0;
};

/// Minibatch Adam on cross-entropy. Single-threaded and reproducible per seed.
/// Throws ValidationError on an empty or single-class dataset.
ClassifierModel train(std::span<const LabeledSample> dataset, double v_scale, double omega_scale,
                      const TrainConfig& config, TrainReport* report = nullptr);

struct Confusion {
    std::size_t true_beep = 0;
    std::size_t false_beep = 0;
    std::size_t true_quiet = 0;
    std::size_t false_quiet = 0;

    std::size_t total() const { return true_beep + false_beep + true_quiet + false_quiet; }
    double accuracy() const;
};

Confusion evaluate(const ClassifierModel& model, std::span<const LabeledSample> samples);

void save_model(const ClassifierModel& model, const std::filesystem::path& path);
/// Throws ParseError on a malformed file.
ClassifierModel load_model(const std::filesystem::path& path);
std::string model_to_bytes(const ClassifierModel& model);
ClassifierModel model_from_bytes(const std::string& bytes);

}  // namespace socnav::sli

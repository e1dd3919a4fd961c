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

#include "socnav/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Core>
#include <fmt/format.h>
#include <json.hpp>

#include "socnav/error.hpp"
#include "socnav/rng.hpp"

namespace socnav::sli {

namespace {

using Mat = Eigen::MatrixXf;
using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeightMap = Eigen::Map<const RowMat>;
using ConstBiasMap = Eigen::Map<const Eigen::VectorXf>;

constexpr int kKernel = 3;
constexpr int kStride = 2;
constexpr int kPadding = 1;
constexpr int kTaps = kKernel * kKernel;
constexpr int kOutputs = 2;
constexpr std::size_t kParamCount = 10;

int conv_out(int in) { return (in + 2 * kPadding - kKernel) / kStride + 1; }

struct ConvShape {
    int cin = 0;
    int cout = 0;
    int in = 0;
    int out = 0;
};

std::array<ConvShape, 3> conv_shapes(const Architecture& a) {
    std::array<ConvShape, 3> s;
    int cin = a.input_channels;
    int in = a.input_size;
    for (int k = 0; k < 3; ++k) {
        s[k] = {cin, a.conv_channels[k], in, conv_out(in)};
        cin = s[k].cout;
        in = s[k].out;
    }
    return s;
}

std::vector<std::vector<int>> param_shapes(const Architecture& a) {
    std::vector<std::vector<int>> shapes;
    for (const ConvShape& c : conv_shapes(a)) {
        shapes.push_back({c.cout, c.cin * kTaps});
        shapes.push_back({c.cout});
    }
    shapes.push_back({a.hidden, a.feature_count() + 2});
    shapes.push_back({a.hidden});
    shapes.push_back({kOutputs, a.hidden});
    shapes.push_back({kOutputs});
    return shapes;
}

const char* const kParamNames[kParamCount] = {"conv1.weight", "conv1.bias", "conv2.weight", "conv2.bias",
                                              "conv3.weight", "conv3.bias", "fc1.weight",   "fc1.bias",
                                              "fc2.weight",   "fc2.bias"};

std::size_t element_count(const std::vector<int>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           [](std::size_t acc, int d) { return acc * static_cast<std::size_t>(d); });
}

ConstWeightMap weight(const Tensor& t) { return {t.data.data(), t.shape[0], t.shape[1]}; }
ConstBiasMap bias(const Tensor& t) { return {t.data.data(), t.shape[0]}; }

// Activations are (channels) x (batch * side * side), column b*side*side + y*side + x.
void im2col(const Mat& in, const ConvShape& s, int batch, Mat& col) {
    const int in_area = s.in * s.in;
    const int out_area = s.out * s.out;
    col.setZero(s.cin * kTaps, static_cast<Eigen::Index>(batch) * out_area);
    for (int b = 0; b < batch; ++b) {
        for (int oy = 0; oy < s.out; ++oy) {
            for (int ox = 0; ox < s.out; ++ox) {
                const Eigen::Index j = static_cast<Eigen::Index>(b) * out_area + oy * s.out + ox;
                for (int kh = 0; kh < kKernel; ++kh) {
                    const int iy = kStride * oy - kPadding + kh;
                    if (iy < 0 || iy >= s.in) continue;
                    for (int kw = 0; kw < kKernel; ++kw) {
                        const int ix = kStride * ox - kPadding + kw;
                        if (ix < 0 || ix >= s.in) continue;
                        const Eigen::Index src = static_cast<Eigen::Index>(b) * in_area + iy * s.in + ix;
                        for (int ci = 0; ci < s.cin; ++ci) col(ci * kTaps + kh * kKernel + kw, j) = in(ci, src);
                    }
                }
            }
        }
    }
}

void col2im(const Mat& col, const ConvShape& s, int batch, Mat& in_grad) {
    const int in_area = s.in * s.in;
    const int out_area = s.out * s.out;
    in_grad.setZero(s.cin, static_cast<Eigen::Index>(batch) * in_area);
    for (int b = 0; b < batch; ++b) {
        for (int oy = 0; oy < s.out; ++oy) {
            for (int ox = 0; ox < s.out; ++ox) {
                const Eigen::Index j = static_cast<Eigen::Index>(b) * out_area + oy * s.out + ox;
                for (int kh = 0; kh < kKernel; ++kh) {
                    const int iy = kStride * oy - kPadding + kh;
                    if (iy < 0 || iy >= s.in) continue;
                    for (int kw = 0; kw < kKernel; ++kw) {
                        const int ix = kStride * ox - kPadding + kw;
                        if (ix < 0 || ix >= s.in) continue;
                        const Eigen::Index dst = static_cast<Eigen::Index>(b) * in_area + iy * s.in + ix;
                        for (int ci = 0; ci < s.cin; ++ci) in_grad(ci, dst) += col(ci * kTaps + kh * kKernel + kw, j);
                    }
                }
            }
        }
    }
}

/// Everything the backward pass needs from one forward pass.
struct Forward {
    std::array<Mat, 3> cols;  // im2col inputs of each conv stage
    std::array<Mat, 3> acts;  // post-ReLU conv outputs
    Mat x;                    // flattened features ++ command
    Mat hidden;               // post-ReLU
    Mat logits;
};

struct Input {
    const float* maps;
    double v;
    double omega;
};

void forward(const ClassifierModel& m, std::span<const Input> batch, Forward& f) {
    const Architecture& a = m.arch;
    const auto shapes = conv_shapes(a);
    const int n = static_cast<int>(batch.size());
    const int area = a.input_size * a.input_size;

    Mat in(a.input_channels, static_cast<Eigen::Index>(n) * area);
    for (int b = 0; b < n; ++b) {
        for (int c = 0; c < a.input_channels; ++c) {
            const float* src = batch[b].maps + static_cast<std::size_t>(c) * area;
            for (int p = 0; p < area; ++p) in(c, static_cast<Eigen::Index>(b) * area + p) = src[p];
        }
    }

    const Mat* prev = &in;
    for (int k = 0; k < 3; ++k) {
        im2col(*prev, shapes[k], n, f.cols[k]);
        f.acts[k].noalias() = weight(m.params[2 * k]) * f.cols[k];
        f.acts[k].colwise() += bias(m.params[2 * k + 1]);
        f.acts[k] = f.acts[k].cwiseMax(0.0f);
        prev = &f.acts[k];
    }

    const int side = shapes[2].out;
    const int out_area = side * side;
    const int channels = shapes[2].cout;
    const int features = a.feature_count();
    f.x.resize(features + 2, n);
    for (int b = 0; b < n; ++b) {
        for (int c = 0; c < channels; ++c) {
            for (int p = 0; p < out_area; ++p) f.x(c * out_area + p, b) = f.acts[2](c, static_cast<Eigen::Index>(b) * out_area + p);
        }
        f.x(features, b) = static_cast<float>(batch[b].v / m.v_scale);
        f.x(features + 1, b) = static_cast<float>(batch[b].omega / m.omega_scale);
    }

    f.hidden.noalias() = weight(m.params[6]) * f.x;
    f.hidden.colwise() += bias(m.params[7]);
    f.hidden = f.hidden.cwiseMax(0.0f);
    f.logits.noalias() = weight(m.params[8]) * f.hidden;
    f.logits.colwise() += bias(m.params[9]);
}

std::array<double, 2> softmax(float z0, float z1) {
    const double m = std::max(z0, z1);
    const double e0 = std::exp(z0 - m);
    const double e1 = std::exp(z1 - m);
    const double s = e0 + e1;
    return {e0 / s, e1 / s};
}

/// Accumulates parameter gradients of the mean cross-entropy into `grads`.
/// `probs` are the beep probabilities of the forward pass.
void backward(const ClassifierModel& m, const Forward& f, std::span<const std::uint8_t> labels,
              std::span<const double> probs, std::vector<Mat>& grads) {
    const Architecture& a = m.arch;
    const auto shapes = conv_shapes(a);
    const int n = static_cast<int>(labels.size());
    const float inv_n = 1.0f / static_cast<float>(n);

    Mat d_logits(kOutputs, n);
    for (int b = 0; b < n; ++b) {
        const float p1 = static_cast<float>(probs[b]);
        const float y1 = labels[b] ? 1.0f : 0.0f;
        d_logits(1, b) = (p1 - y1) * inv_n;
        d_logits(0, b) = -d_logits(1, b);
    }
    grads[8].noalias() = d_logits * f.hidden.transpose();
    grads[9] = d_logits.rowwise().sum();

    Mat d_hidden = weight(m.params[8]).transpose() * d_logits;
    d_hidden = d_hidden.cwiseProduct((f.hidden.array() > 0.0f).cast<float>().matrix());
    grads[6].noalias() = d_hidden * f.x.transpose();
    grads[7] = d_hidden.rowwise().sum();

    const Mat d_x = weight(m.params[6]).transpose() * d_hidden;
    const int side = shapes[2].out;
    const int out_area = side * side;
    Mat d_act(shapes[2].cout, static_cast<Eigen::Index>(n) * out_area);
    for (int b = 0; b < n; ++b) {
        for (int c = 0; c < shapes[2].cout; ++c) {
            for (int p = 0; p < out_area; ++p) d_act(c, static_cast<Eigen::Index>(b) * out_area + p) = d_x(c * out_area + p, b);
        }
    }

    Mat d_col;
    for (int k = 2; k >= 0; --k) {
        const Mat d_z = d_act.cwiseProduct((f.acts[k].array() > 0.0f).cast<float>().matrix());
        grads[2 * k].noalias() = d_z * f.cols[k].transpose();
        grads[2 * k + 1] = d_z.rowwise().sum();
        if (k == 0) break;
        d_col.noalias() = weight(m.params[2 * k]).transpose() * d_z;
        col2im(d_col, shapes[k], n, d_act);
    }
}

void check_input(const Architecture& a, std::size_t maps_size, double v, double omega) {
    if (maps_size != static_cast<std::size_t>(a.input_count())) {
        throw ValidationError(fmt::format("pedestrian maps have {} values, model expects {} ({}x{}x{})", maps_size,
                                          a.input_count(), a.input_channels, a.input_size, a.input_size));
    }
    if (!std::isfinite(v) || !std::isfinite(omega)) throw ValidationError("command must be finite");
}

constexpr std::size_t kInferChunk = 256;

}  // namespace

int Architecture::conv_output_size() const { return conv_out(conv_out(conv_out(input_size))); }

int Architecture::feature_count() const { return conv_channels[2] * conv_output_size() * conv_output_size(); }

void validate(const Architecture& a) {
    if (a.input_size < 1 || a.input_channels < 1 || a.hidden < 1) {
        throw ValidationError("architecture sizes must be positive");
    }
    for (int c : a.conv_channels) {
        if (c < 1) throw ValidationError("conv channel counts must be positive");
    }
}

void validate(const ClassifierModel& m) {
    validate(m.arch);
    if (!(m.v_scale > 0.0) || !(m.omega_scale > 0.0)) throw ValidationError("command scales must be positive");
    const auto shapes = param_shapes(m.arch);
    if (m.params.size() != shapes.size()) {
        throw ValidationError(fmt::format("model has {} tensors, architecture needs {}", m.params.size(), shapes.size()));
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (m.params[i].shape != shapes[i] || m.params[i].data.size() != element_count(shapes[i])) {
            throw ValidationError(fmt::format("tensor {} has the wrong shape", kParamNames[i]));
        }
    }
}

ClassifierModel ClassifierModel::initialize(const Architecture& arch, double v_scale, double omega_scale,
                                            std::uint64_t seed) {
    validate(arch);
    ClassifierModel m;
    m.arch = arch;
    m.v_scale = v_scale;
    m.omega_scale = omega_scale;
    std::mt19937_64 gen(seed);
    const auto shapes = param_shapes(arch);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        Tensor t{shapes[i], std::vector<float>(element_count(shapes[i]), 0.0f)};
        if (t.shape.size() == 2) {
            const bool last = i + 2 == shapes.size();
            const float stddev = std::sqrt((last ? 1.0f : 2.0f) / static_cast<float>(t.shape[1]));
            std::normal_distribution<float> dist(0.0f, stddev);
            for (float& w : t.data) w = dist(gen);
        }
        m.params.push_back(std::move(t));
    }
    return m;
}

ClassifierModel ClassifierModel::constant(const Architecture& arch, double v_scale, double omega_scale,
                                          double beep_rate) {
    if (!(beep_rate > 0.0 && beep_rate < 1.0)) throw ValidationError("beep_rate must lie in (0, 1)");
    validate(arch);
    ClassifierModel m;
    m.arch = arch;
    m.v_scale = v_scale;
    m.omega_scale = omega_scale;
    for (const auto& shape : param_shapes(arch)) m.params.push_back({shape, std::vector<float>(element_count(shape))});
    m.params.back().data[1] = static_cast<float>(std::log(beep_rate / (1.0 - beep_rate)));
    return m;
}

std::array<double, 2> ClassifierModel::probabilities(std::span<const float> ped_maps, double v, double omega) const {
    check_input(arch, ped_maps.size(), v, omega);
    const Input in{ped_maps.data(), v, omega};
    Forward f;
    forward(*this, std::span(&in, 1), f);
    return softmax(f.logits(0, 0), f.logits(1, 0));
}

std::vector<double> ClassifierModel::infer_batch(std::span<const LabeledSample> samples) const {
    std::vector<double> out;
    out.reserve(samples.size());
    std::vector<Input> inputs;
    Forward f;
    for (std::size_t start = 0; start < samples.size(); start += kInferChunk) {
        const std::size_t end = std::min(samples.size(), start + kInferChunk);
        inputs.clear();
        for (std::size_t i = start; i < end; ++i) {
            check_input(arch, samples[i].ped_maps.size(), samples[i].v, samples[i].omega);
            inputs.push_back({samples[i].ped_maps.data(), samples[i].v, samples[i].omega});
        }
        forward(*this, inputs, f);
        for (Eigen::Index b = 0; b < f.logits.cols(); ++b) out.push_back(softmax(f.logits(0, b), f.logits(1, b))[1]);
    }
    return out;
}

double Confusion::accuracy() const {
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(true_beep + true_quiet) / static_cast<double>(n);
}

Confusion evaluate(const ClassifierModel& model, std::span<const LabeledSample> samples) {
    const std::vector<double> p = model.infer_batch(samples);
    Confusion c;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const bool predicted = p[i] >= 0.5;
        if (predicted && samples[i].beep) ++c.true_beep;
        if (predicted && !samples[i].beep) ++c.false_beep;
        if (!predicted && !samples[i].beep) ++c.true_quiet;
        if (!predicted && samples[i].beep) ++c.false_quiet;
    }
    return c;
}

ClassifierModel train(std::span<const LabeledSample> dataset, double v_scale, double omega_scale,
                      const TrainConfig& config, TrainReport* report) {
    if (dataset.empty()) throw ValidationError("cannot train on an empty dataset");
    if (config.batch_size < 1 || config.epochs < 1 || !(config.learning_rate > 0.0)) {
        throw ValidationError("batch_size, epochs and learning_rate must be positive");
    }
    if (config.validation_fraction < 0.0 || config.validation_fraction >= 1.0) {
        throw ValidationError("validation_fraction must lie in [0, 1)");
    }
    const std::size_t beeps = static_cast<std::size_t>(
        std::count_if(dataset.begin(), dataset.end(), [](const LabeledSample& s) { return s.beep; }));
    if (beeps == 0 || beeps == dataset.size()) {
        throw ValidationError("dataset contains a single class; refusing to train a constant classifier");
    }
    for (const LabeledSample& s : dataset) check_input(config.arch, s.ped_maps.size(), s.v, s.omega);

    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 split_gen(derive_seed(config.seed, 1));
    std::shuffle(order.begin(), order.end(), split_gen);
    std::size_t n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * dataset.size()));
    if (config.validation_fraction > 0.0) n_val = std::clamp<std::size_t>(n_val, 1, dataset.size() - 1);
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
    std::vector<LabeledSample> validation;
    for (std::size_t i = dataset.size() - n_val; i < dataset.size(); ++i) validation.push_back(dataset[order[i]]);
    if (!config.shuffle) std::sort(train_idx.begin(), train_idx.end());

    ClassifierModel model = ClassifierModel::initialize(config.arch, v_scale, omega_scale, derive_seed(config.seed, 0));
    ClassifierModel best = model;
    TrainReport local;
    local.train_samples = train_idx.size();
    local.validation_samples = n_val;
    local.best_validation_accuracy = -1.0;

    std::vector<Mat> grads(kParamCount);
    std::vector<Eigen::ArrayXf> m1(kParamCount), m2(kParamCount);
    for (std::size_t i = 0; i < kParamCount; ++i) {
        m1[i] = Eigen::ArrayXf::Zero(static_cast<Eigen::Index>(model.params[i].data.size()));
        m2[i] = m1[i];
    }
    std::mt19937_64 shuffle_gen(derive_seed(config.seed, 2));
    long long t = 0;
    int since_best = 0;
    Forward f;
    std::vector<Input> inputs;
    std::vector<std::uint8_t> labels;
    std::vector<double> probs;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) std::shuffle(train_idx.begin(), train_idx.end(), shuffle_gen);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < train_idx.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end = std::min(train_idx.size(), start + static_cast<std::size_t>(config.batch_size));
            inputs.clear();
            labels.clear();
            probs.clear();
            for (std::size_t i = start; i < end; ++i) {
                const LabeledSample& s = dataset[train_idx[i]];
                inputs.push_back({s.ped_maps.data(), s.v, s.omega});
                labels.push_back(s.beep ? 1 : 0);
            }
            forward(model, inputs, f);
            for (std::size_t b = 0; b < labels.size(); ++b) {
                const auto p = softmax(f.logits(0, static_cast<Eigen::Index>(b)), f.logits(1, static_cast<Eigen::Index>(b)));
                probs.push_back(p[1]);
                loss_sum -= std::log(std::max(p[labels[b]], 1e-12));
                if ((p[1] >= 0.5) == (labels[b] != 0)) ++correct;
            }
            backward(model, f, labels, probs, grads);

            ++t;
            const double lr_t = config.learning_rate * std::sqrt(1.0 - std::pow(config.beta2, static_cast<double>(t))) /
                                (1.0 - std::pow(config.beta1, static_cast<double>(t)));
            const float b1 = static_cast<float>(config.beta1);
            const float b2 = static_cast<float>(config.beta2);
            for (std::size_t i = 0; i < kParamCount; ++i) {
                Eigen::Map<Eigen::ArrayXf> p(model.params[i].data.data(), m1[i].size());
                // Row-major tensors and column-major gradients: transpose into tensor order.
                Eigen::ArrayXf g(m1[i].size());
                if (model.params[i].shape.size() == 2) {
                    RowMat rm = grads[i];
                    g = Eigen::Map<Eigen::ArrayXf>(rm.data(), rm.size());
                } else {
                    g = Eigen::Map<Eigen::ArrayXf>(grads[i].data(), grads[i].size());
                }
                m1[i] = b1 * m1[i] + (1.0f - b1) * g;
                m2[i] = b2 * m2[i] + (1.0f - b2) * g.square();
                p -= static_cast<float>(lr_t) * m1[i] / (m2[i].sqrt() + static_cast<float>(config.epsilon));
            }
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = loss_sum / static_cast<double>(train_idx.size());
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_idx.size());
        if (n_val > 0) {
            stats.validation_accuracy = evaluate(model, validation).accuracy();
            if (stats.validation_accuracy > local.best_validation_accuracy) {
                local.best_validation_accuracy = stats.validation_accuracy;
                local.best_epoch = epoch;
                best = model;
                since_best = 0;
            } else {
                ++since_best;
            }
        } else {
            best = model;
            local.best_epoch = epoch;
        }
        local.epochs.push_back(stats);
        if (config.patience > 0 && n_val > 0 && since_best >= config.patience) break;
    }
    if (n_val == 0) local.best_validation_accuracy = 0.0;
    if (report != nullptr) *report = std::move(local);
    return best;
}

// ---------------------------------------------------------------------------
// Model files

namespace {

constexpr std::string_view kMagic = "CBW1";

}  // namespace

std::string model_to_bytes(const ClassifierModel& model) {
    validate(model);
    nlohmann::json header;
    header["input_size"] = model.arch.input_size;
    header["input_channels"] = model.arch.input_channels;
    header["conv_channels"] = model.arch.conv_channels;
    header["kernel"] = kKernel;
    header["stride"] = kStride;
    header["padding"] = kPadding;
    header["hidden"] = model.arch.hidden;
    header["outputs"] = kOutputs;
    header["v_scale"] = model.v_scale;
    header["omega_scale"] = model.omega_scale;
    header["dtype"] = "float32le";
    nlohmann::json tensors = nlohmann::json::array();
    for (std::size_t i = 0; i < model.params.size(); ++i) {
        tensors.push_back({{"name", kParamNames[i]}, {"shape", model.params[i].shape}});
    }
    header["tensors"] = tensors;

    std::string out(kMagic);
    out += '\n';
    out += header.dump();
    out += '\n';
    for (const Tensor& t : model.params) {
        out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
    }
    return out;
}

ClassifierModel model_from_bytes(const std::string& bytes) {
    static_assert(std::endian::native == std::endian::little);
    if (bytes.size() < kMagic.size() + 1 || bytes.compare(0, kMagic.size(), kMagic) != 0 || bytes[kMagic.size()] != '\n') {
        throw ParseError("byte 0", "missing CBW1 magic");
    }
    const std::size_t header_start = kMagic.size() + 1;
    const std::size_t header_end = bytes.find('\n', header_start);
    if (header_end == std::string::npos) throw ParseError(fmt::format("byte {}", header_start), "unterminated header");
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(header_start),
                                  bytes.begin() + static_cast<std::ptrdiff_t>(header_end));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("byte {}", header_start), e.what());
    }

    ClassifierModel m;
    try {
        if (h.at("kernel").get<int>() != kKernel || h.at("stride").get<int>() != kStride ||
            h.at("padding").get<int>() != kPadding || h.at("outputs").get<int>() != kOutputs ||
            h.at("dtype").get<std::string>() != "float32le") {
            throw ParseError("header", "unsupported layer geometry or dtype");
        }
        m.arch.input_size = h.at("input_size").get<int>();
        m.arch.input_channels = h.at("input_channels").get<int>();
        m.arch.conv_channels = h.at("conv_channels").get<std::array<int, 3>>();
        m.arch.hidden = h.at("hidden").get<int>();
        m.v_scale = h.at("v_scale").get<double>();
        m.omega_scale = h.at("omega_scale").get<double>();
        validate(m.arch);
        const auto shapes = param_shapes(m.arch);
        const auto& tensors = h.at("tensors");
        if (tensors.size() != shapes.size()) throw ParseError("header/tensors", "wrong tensor count");
        std::size_t offset = header_end + 1;
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            if (tensors[i].at("shape").get<std::vector<int>>() != shapes[i]) {
                throw ParseError(fmt::format("header/tensors/{}", i), "shape disagrees with the architecture");
            }
            Tensor t{shapes[i], std::vector<float>(element_count(shapes[i]))};
            const std::size_t n = t.data.size() * sizeof(float);
            if (offset + n > bytes.size()) throw ParseError(fmt::format("byte {}", offset), "truncated weights");
            std::memcpy(t.data.data(), bytes.data() + offset, n);
            offset += n;
            m.params.push_back(std::move(t));
        }
        if (offset != bytes.size()) throw ParseError(fmt::format("byte {}", offset), "trailing bytes after weights");
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("header", e.what());
    }
    validate(m);
    return m;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
    out << model_to_bytes(model);
}

ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot read {}", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return model_from_bytes(buffer.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.where(), e.detail());
    }
}

}  // namespace socnav::sli

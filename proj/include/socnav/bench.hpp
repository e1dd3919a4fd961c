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

/// Batch benchmarking: methods x scenario kinds x seeds, per-episode CSV and
/// aggregate tables.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "socnav/engine.hpp"
#include "socnav/scenario.hpp"

namespace socnav::bench {

/// base | fd(d) | fdv(d,v) | sli(path) | bridge(host:port)
struct MethodSpec {
    enum class Kind { Base, Fd, Fdv, Sli, Bridge };
    Kind kind = Kind::Base;
    double d_theta = 1.0;
    double v_theta = 0.0;
    std::string argument;  ///< model path or endpoint

    /// Canonical spelling, e.g. "fdv(1.0,0.3)".
    std::string id() const;
    bool operator==(const MethodSpec&) const = default;
};

/// Throws ValidationError naming the problem.
MethodSpec parse_method(std::string_view text);

/// Navigation controller and interaction policy for one episode of a method.
struct MethodInstance {
    std::unique_ptr<NavigationController> nav;
    std::unique_ptr<InteractionPolicy> policy;
};

class MethodFactory {
public:
    explicit MethodFactory(MethodSpec spec, double k_theta = 2.0);
    MethodInstance make() const;
    const MethodSpec& spec() const { return spec_; }

private:
    MethodSpec spec_;
    double k_theta_;
    std::shared_ptr<const void> model_;  // loaded once for sli
};

struct BenchSpec {
    std::vector<std::string> kinds{"random", "circular"};
    std::uint64_t seed_start = 0;
    int episodes = 500;  ///< per scenario kind
    std::vector<MethodSpec> methods;
    /// When non-empty, these replace the generated scenarios (one episode each).
    std::vector<std::filesystem::path> scenario_files;
    ScenarioParams params;
    RandomScenarioOptions random;
    CircularScenarioOptions circular;
    double k_theta = 2.0;
    int parallel = 1;
};

void validate(const BenchSpec& spec);

/// Scenario of a generator kind ("random" | "circular" | "canonical").
Scenario generate(const std::string& kind, std::uint64_t seed, const BenchSpec& spec);

struct BenchRow {
    std::string scenario_kind;
    std::uint64_t seed = 0;
    std::string method;
    Status status = Status::Running;
    int steps = 0;
    int beep_steps = 0;
    double min_surface_distance = kInfiniteDistance;
    double final_goal_distance = 0.0;
    bool stuck = false;

    bool operator==(const BenchRow&) const = default;
};

/// Rows ordered by (kind order, seed, method order) regardless of `parallel`.
std::vector<BenchRow> run_bench(const BenchSpec& spec,
                                const std::function<void(std::size_t done, std::size_t total)>& progress = {});

inline constexpr std::string_view kCsvSchema = "# socnav bench v1";

std::string rows_to_csv(const std::vector<BenchRow>& rows);
/// Throws ParseError naming the line.
std::vector<BenchRow> rows_from_csv(const std::string& text);

struct AggregateRow {
    std::string scenario_kind;
    std::string method;
    Metrics metrics;
};

/// Grouped by (kind, method) in first-appearance order.
std::vector<AggregateRow> aggregate_rows(const std::vector<BenchRow>& rows);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);
/// Plain-text table per scenario kind: Method, Success, PedColl, Beep, ...
std::string aggregate_table(const std::vector<AggregateRow>& rows);

}  // namespace socnav::bench

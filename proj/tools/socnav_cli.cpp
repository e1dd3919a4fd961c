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

// socnav: run, benchmark, label, train, replay and serve.
//
// Exit codes: 0 Success, 2 PedCollision, 3 ObstacleCollision, 4 Timeout,
// 5 Aborted, 64 usage, 65 data, 70 internal.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "socnav/bench.hpp"
#include "socnav/bridge.hpp"
#include "socnav/classifier.hpp"
#include "socnav/engine.hpp"
#include "socnav/error.hpp"
#include "socnav/render.hpp"
#include "socnav/scenario.hpp"
#include "socnav/sli.hpp"

namespace {

using namespace socnav;

constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitInternal = 70;

/// Wrong flags or method strings; reported as a usage error.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int exit_code(Status s) {
    switch (s) {
        case Status::Success: return 0;
        case Status::PedCollision: return 2;
        case Status::ObstacleCollision: return 3;
        case Status::Timeout: return 4;
        case Status::Aborted: return 5;
        case Status::Running: break;
    }
    return kExitInternal;
}

/// Either a scenario file or a generator spec.
struct ScenarioSource {
    std::string file;
    std::string kind = "random";
    std::uint64_t seed = 0;
    std::string mode;

    void add_to(CLI::App* app) {
        app->add_option("--scenario", file, "Scenario JSON file (overrides --kind/--seed)");
        app->add_option("--kind", kind, "Generator: random | circular | canonical")
            ->check(CLI::IsMember({"random", "circular", "canonical"}));
        app->add_option("--seed", seed, "Generator seed");
        app->add_option("--mode", mode, "Action mode for generated scenarios: discrete | continuous")
            ->check(CLI::IsMember({"discrete", "continuous"}));
    }

    ScenarioParams params() const {
        ScenarioParams p;
        if (!mode.empty()) p.action_mode = parse_action_mode(mode);
        return p;
    }

    Scenario make(std::uint64_t offset = 0) const {
        if (!file.empty()) return load_scenario(file);
        bench::BenchSpec spec;
        spec.params = params();
        return bench::generate(kind, seed + offset, spec);
    }
};

bench::MethodSpec method_or_usage(const std::string& text) {
    try {
        return bench::parse_method(text);
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
}

nlohmann::ordered_json result_json(const EpisodeResult& r) {
    nlohmann::ordered_json j;
    j["status"] = std::string(to_string(r.status));
    j["steps"] = r.steps;
    j["beep_steps"] = r.beep_steps;
    j["min_surface_distance"] = std::isfinite(r.min_surface_distance) ? nlohmann::json(r.min_surface_distance)
                                                                      : nlohmann::json(nullptr);
    j["final_goal_distance"] = r.final_goal_distance;
    j["stuck"] = r.stuck;
    return j;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write {}", path));
    out << text;
}

void print_confusion(const sli::Confusion& c) {
    fmt::print("accuracy {:.4f} over {} samples\n", c.accuracy(), c.total());
    fmt::print("confusion (rows: label, cols: predicted)\n");
    fmt::print("            quiet    beep\n");
    fmt::print("  quiet  {:>8} {:>7}\n", c.true_quiet, c.false_beep);
    fmt::print("  beep   {:>8} {:>7}\n", c.false_quiet, c.true_beep);
}

void print_balance(std::span<const sli::LabeledSample> samples) {
    std::size_t beeps = 0;
    for (const auto& s : samples) beeps += s.beep ? 1 : 0;
    fmt::print("samples {} beep {} ({:.3f}) quiet {} ({:.3f})\n", samples.size(), beeps,
               samples.empty() ? 0.0 : static_cast<double>(beeps) / samples.size(), samples.size() - beeps,
               samples.empty() ? 0.0 : static_cast<double>(samples.size() - beeps) / samples.size());
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGPIPE, SIG_IGN);
    CLI::App app{"Social navigation simulator and beep-policy benchmark"};
    app.require_subcommand(1);
    int result_code = 0;

    // run ------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run one episode and print its result");
    ScenarioSource run_src;
    run_src.add_to(run);
    std::string run_method = "base";
    std::string run_record;
    double run_k = 2.0;
    run->add_option("--method", run_method, "base | fd(d) | fdv(d,v) | sli(model) | bridge(host:port)");
    run->add_option("--record", run_record, "Write the trajectory CSV here");
    run->add_option("--k-theta", run_k, "Heading gain of the ORCA robot controller");

    // bench ----------------------------------------------------------------
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark methods over seeded scenarios");
    std::vector<std::string> bench_kinds{"random", "circular"};
    std::vector<std::string> bench_methods;
    std::vector<std::string> bench_files;
    int bench_episodes = 500;
    std::uint64_t bench_seed = 0;
    int bench_parallel = 1;
    std::string bench_csv, bench_aggregate, bench_mode;
    double bench_k = 2.0;
    bench_cmd->add_option("--kinds", bench_kinds, "Scenario kinds")->delimiter(',');
    bench_cmd->add_option("-m,--method", bench_methods, "Method (repeatable)")->required();
    bench_cmd->add_option("--scenario-file", bench_files, "Explicit scenario files instead of generators");
    bench_cmd->add_option("--episodes", bench_episodes, "Episodes per scenario kind");
    bench_cmd->add_option("--seed-start", bench_seed, "First scenario seed");
    bench_cmd->add_option("--parallel", bench_parallel, "Worker threads")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--csv", bench_csv, "Per-episode CSV output");
    bench_cmd->add_option("--aggregate", bench_aggregate, "Aggregate CSV output");
    bench_cmd->add_option("--mode", bench_mode, "Action mode")->check(CLI::IsMember({"discrete", "continuous"}));
    bench_cmd->add_option("--k-theta", bench_k, "Heading gain of the ORCA robot controller");

    // gen-scenario ---------------------------------------------------------
    auto* gen_scn = app.add_subcommand("gen-scenario", "Write a generated scenario file");
    ScenarioSource gen_src;
    gen_src.add_to(gen_scn);
    std::string gen_out;
    gen_scn->add_option("--out", gen_out, "Output path")->required();

    // gen-labels -----------------------------------------------------------
    auto* gen_labels = app.add_subcommand("gen-labels", "Generate an oracle-labelled dataset");
    sli::DatasetOptions ds;
    std::string labels_out;
    gen_labels->add_option("-n,--count", ds.count, "Samples")->check(CLI::PositiveNumber);
    gen_labels->add_option("--seed", ds.seed, "Seed");
    gen_labels->add_option("--threads", ds.threads, "Worker threads")->check(CLI::PositiveNumber);
    gen_labels->add_option("--sample-probability", ds.sample_probability, "Share of visited states kept");
    gen_labels->add_option("--out", labels_out, "Dataset file")->required();

    // train ----------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train the beep classifier");
    sli::TrainConfig tc;
    std::string train_data, train_out, train_mode = "continuous";
    int train_holdout = 0;
    train_cmd->add_option("--dataset", train_data, "Dataset file")->required();
    train_cmd->add_option("--out", train_out, "Model file")->required();
    train_cmd->add_option("--epochs", tc.epochs, "Maximum epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--batch", tc.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
    train_cmd->add_option("--lr", tc.learning_rate, "Adam learning rate");
    train_cmd->add_option("--patience", tc.patience, "Early-stopping patience (0 = off)");
    train_cmd->add_option("--validation", tc.validation_fraction, "Held-out share for model selection");
    train_cmd->add_option("--seed", tc.seed, "Seed");
    train_cmd->add_option("--holdout", train_holdout, "Reserve the last N records as a test set");
    train_cmd->add_option("--mode", train_mode, "Action mode of the commands (sets input scaling)")
        ->check(CLI::IsMember({"discrete", "continuous"}));

    // eval-model -----------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval-model", "Evaluate a model on a dataset");
    std::string eval_model, eval_data;
    eval_cmd->add_option("--model", eval_model, "Model file")->required();
    eval_cmd->add_option("--dataset", eval_data, "Dataset file")->required();

    // replay ---------------------------------------------------------------
    auto* replay = app.add_subcommand("replay", "Render a recorded trajectory");
    std::string replay_in, replay_svg;
    replay->add_option("trajectory", replay_in, "Trajectory CSV")->required();
    replay->add_option("--svg", replay_svg, "SVG output")->required();

    // serve ----------------------------------------------------------------
    auto* serve = app.add_subcommand("serve", "Expose the engine over the step protocol");
    ScenarioSource serve_src;
    serve_src.add_to(serve);
    bool serve_stdio = false;
    std::string serve_listen;
    std::size_t serve_episodes = 1;
    std::size_t serve_sessions = 0;
    int serve_timeout = 10000;
    serve->add_flag("--stdio", serve_stdio, "Speak the protocol on stdin/stdout");
    serve->add_option("--listen", serve_listen, "TCP host:port");
    serve->add_option("--episodes", serve_episodes, "Episode budget per session")->check(CLI::PositiveNumber);
    serve->add_option("--sessions", serve_sessions, "Stop after this many TCP sessions (0 = never)");
    serve->add_option("--timeout-ms", serve_timeout, "Act timeout")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) {
            const bench::MethodSpec m = method_or_usage(run_method);
            const Scenario s = run_src.make();
            auto inst = bench::MethodFactory(m, run_k).make();
            const EpisodeResult r = run_episode(s, *inst.nav, *inst.policy, s.seed, !run_record.empty());
            if (!run_record.empty()) write_trajectory(*r.trajectory, run_record);
            auto j = result_json(r);
            j["scenario_kind"] = s.kind;
            j["seed"] = s.seed;
            j["method"] = m.id();
            fmt::print("{}\n", j.dump());
            result_code = exit_code(r.status);
        } else if (*bench_cmd) {
            bench::BenchSpec spec;
            spec.kinds = bench_kinds;
            for (const std::string& m : bench_methods) spec.methods.push_back(method_or_usage(m));
            for (const std::string& f : bench_files) spec.scenario_files.emplace_back(f);
            spec.episodes = bench_episodes;
            spec.seed_start = bench_seed;
            spec.parallel = bench_parallel;
            spec.k_theta = bench_k;
            if (!bench_mode.empty()) spec.params.action_mode = parse_action_mode(bench_mode);
            try {
                bench::validate(spec);
            } catch (const ValidationError& e) {
                throw UsageError(e.what());
            }
            const auto rows = bench::run_bench(spec);
            if (!bench_csv.empty()) write_text(bench_csv, bench::rows_to_csv(rows));
            const auto agg = bench::aggregate_rows(rows);
            if (!bench_aggregate.empty()) write_text(bench_aggregate, bench::aggregate_csv(agg));
            fmt::print("{}", bench::aggregate_table(agg));
        } else if (*gen_scn) {
            save_scenario(gen_src.make(), gen_out);
        } else if (*gen_labels) {
            sli::DatasetReport report;
            const auto samples = sli::generate_dataset(ds, &report);
            sli::write_dataset(samples, labels_out);
            fmt::print("episodes {} raw beep share {:.3f} rebalanced {}\n", report.episodes, report.raw_beep_fraction(),
                       report.rebalanced ? "yes" : "no");
            print_balance(samples);
        } else if (*train_cmd) {
            auto data = sli::read_dataset(train_data);
            std::vector<sli::LabeledSample> test;
            if (train_holdout > 0) {
                if (static_cast<std::size_t>(train_holdout) >= data.size()) {
                    throw ValidationError("holdout must leave training samples");
                }
                test.assign(data.end() - train_holdout, data.end());
                data.resize(data.size() - static_cast<std::size_t>(train_holdout));
            }
            print_balance(data);
            const ActionBounds b = action_bounds(parse_action_mode(train_mode));
            sli::TrainReport report;
            const auto model = sli::train(data, b.v_max, b.omega_max, tc, &report);
            sli::save_model(model, train_out);
            fmt::print("epochs {} best epoch {} validation accuracy {:.4f}\n", report.epochs.size(), report.best_epoch,
                       report.best_validation_accuracy);
            if (!test.empty()) {
                fmt::print("holdout:\n");
                print_confusion(sli::evaluate(model, test));
            }
        } else if (*eval_cmd) {
            const auto model = sli::load_model(eval_model);
            const auto data = sli::read_dataset(eval_data);
            print_balance(data);
            print_confusion(sli::evaluate(model, data));
        } else if (*replay) {
            write_svg(read_trajectory(replay_in), replay_svg);
        } else if (*serve) {
            if (serve_stdio == !serve_listen.empty()) throw UsageError("give exactly one of --stdio or --listen");
            bridge::ServeOptions opt;
            const ScenarioSource src = serve_src;
            opt.scenarios = [src](std::size_t e) { return src.make(src.file.empty() ? e : 0); };
            opt.episode_budget = serve_episodes;
            opt.act_timeout = std::chrono::milliseconds(serve_timeout);
            opt.hello_timeout = opt.act_timeout;
            opt.seed = serve_src.seed;
            if (serve_stdio) {
                bridge::FdChannel channel(0, 1);
                const auto summary = bridge::serve_session(channel, opt);
                fmt::print(stderr, "session: handshake {} episodes {} rejected {}\n", summary.handshake,
                           summary.results.size(), summary.rejected_messages);
            } else {
                const int fd = bridge::tcp_listen(bridge::parse_endpoint(serve_listen));
                fmt::print(stderr, "listening on port {}\n", bridge::bound_port(fd));
                bridge::serve_tcp(fd, opt, serve_sessions, nullptr, [](const bridge::SessionSummary& s) {
                    fmt::print(stderr, "session: handshake {} episodes {} rejected {}\n", s.handshake,
                               s.results.size(), s.rejected_messages);
                });
            }
        }
    } catch (const UsageError& e) {
        fmt::print(stderr, "usage error: {}\n", e.what());
        return kExitUsage;
    } catch (const ValidationError& e) {
        fmt::print(stderr, "invalid data: {}\n", e.what());
        return kExitData;
    } catch (const ParseError& e) {
        fmt::print(stderr, "parse error: {}\n", e.what());
        return kExitData;
    } catch (const IoError& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitData;
    } catch (const PlacementError& e) {
        fmt::print(stderr, "placement failed: {}\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitInternal;
    }
    return result_code;
}

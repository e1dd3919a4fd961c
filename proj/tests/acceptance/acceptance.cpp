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


// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// leaves the bench CSV, aggregate table and model in the output
// directory (first argument, default ./acceptance_out).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>
#include <json.hpp>

#include "bridge_session.hpp"
#include "interaction_props.hpp"
#include "orca_oracle.hpp"
#include "socnav/bench.hpp"
#include "socnav/bridge.hpp"
#include "socnav/classifier.hpp"
#include "socnav/engine.hpp"
#include "socnav/rng.hpp"
#include "socnav/scenario.hpp"
#include "socnav/sli.hpp"

using namespace socnav;
namespace fs = std::filesystem;
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

class Report {
public:
    void add(int id, const std::string& name, const std::function<Verdict()>& check) {
        const auto t0 = Clock::now();
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = {false, fmt::format("exception: {}", e.what())};
        }
        lines_[id] = fmt::format("{} {}: {} ({}) [{:.1f}s]", v.pass ? "PASS" : "FAIL", id, name, v.detail,
                                 seconds_since(t0));
        failed_ = failed_ || !v.pass;
        fmt::print("  {}\n", lines_[id]);
        std::fflush(stdout);
    }

    int finish() const {
        fmt::print("\n");
        for (const auto& [id, line] : lines_) fmt::print("{}\n", line);
        return failed_ ? 1 : 0;
    }

private:
    std::map<int, std::string> lines_;
    bool failed_ = false;
};

const bench::AggregateRow& find_row(const std::vector<bench::AggregateRow>& rows, const std::string& kind,
                                    const std::string& method) {
    for (const auto& r : rows) {
        if (r.scenario_kind == kind && r.method == method) return r;
    }
    throw std::runtime_error(fmt::format("no aggregate row for {} / {}", kind, method));
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// ---------------------------------------------------------------------------

Verdict lp2_oracle() {
    using namespace socnav::oracle;
    std::mt19937_64 gen(2026);
    int feasible = 0, infeasible = 0, verdict_mismatch = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        auto lines = random_lines(gen, 1 + static_cast<int>(gen() % 14), 1.0);
        if (trial % 2 == 0) {
            // orient every line to admit a random anchor: feasible by construction
            const Vec2 anchor = random_in_disc(gen, 1.0);
            for (auto& l : lines) {
                if (!orca::permits(l, anchor)) l.direction = -l.direction;
            }
        }
        const Vec2 pref = random_in_disc(gen, 1.5);
        const orca::Lp2Result r = orca::solve_lp2(lines, 1.0, pref, false);
        const auto best = sampled_optimum(lines, 1.0, pref);
        const bool solved = r.fail_index == lines.size();
        if (solved != best.has_value()) {
            ++verdict_mismatch;
            continue;
        }
        if (!best) {
            ++infeasible;
            continue;
        }
        ++feasible;
        worst = std::max(worst, norm(r.velocity - *best));
    }
    return {verdict_mismatch == 0 && worst <= 1e-3,
            fmt::format("{} feasible, {} infeasible, verdict mismatches {}, max |v - v_oracle| {:.2e} m/s", feasible,
                        infeasible, verdict_mismatch, worst)};
}

Verdict pairwise_safety() {
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> u(0, 1);
    double worst = std::numeric_limits<double>::infinity();
    for (int pair = 0; pair < 50; ++pair) {
        const bool head_on = pair < 25;
        const Vec2 center{u(gen) * 2 - 1, u(gen) * 2 - 1};
        const double phi = u(gen) * 2 * kPi;
        const double psi = phi + (head_on ? kPi : kPi / 2) + (u(gen) - 0.5) * 0.4;
        std::vector<orca::AgentState> agents(2);
        std::vector<Vec2> goals(2);
        for (int i = 0; i < 2; ++i) {
            const double ang = i == 0 ? phi : psi;
            const Vec2 dir{std::cos(ang), std::sin(ang)};
            const double r0 = 3 + 2 * u(gen);
            const double r1 = 3 + 2 * u(gen);
            agents[i].position = center - dir * r0;
            goals[i] = center + dir * r1;
        }
        worst = std::min(worst, oracle::rollout_min_separation(agents, goals, 200));
    }
    return {worst >= 0.0, fmt::format("25 head-on + 25 crossing pairs, 200 steps, min surface distance {:.3e} m", worst)};
}

Verdict ervo_effect() {
    int not_worse = 0;
    double sum_beep = 0.0, sum_quiet = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Scenario s = gen_canonical_beep(seed);
        OrcaRobotController nav_a, nav_b;
        BeepAtStepsPolicy beep({10});
        NoBeepPolicy quiet;
        const double with = run_episode(s, nav_a, beep, s.seed, false).min_surface_distance;
        const double without = run_episode(s, nav_b, quiet, s.seed, false).min_surface_distance;
        not_worse += with >= without;
        sum_beep += with;
        sum_quiet += without;
    }
    return {not_worse >= 45 && sum_beep > sum_quiet,
            fmt::format("beep >= no-beep in {}/50 seeds, mean min distance {:.4f} vs {:.4f} m", not_worse,
                        sum_beep / 50, sum_quiet / 50)};
}

// Classifier: dataset, training, held-out accuracy, reproducibility.
struct SliOutcome {
    Verdict training;
    fs::path model;
};

SliOutcome train_classifier(const fs::path& out) {
    const auto t_gen = Clock::now();
    sli::DatasetOptions o;
    o.count = 10000;
    o.seed = 1;
    sli::DatasetReport rep;
    const auto train_set = sli::generate_dataset(o, &rep);
    sli::DatasetOptions h = o;
    h.count = 2000;
    h.seed = 2;
    const auto held_out = sli::generate_dataset(h);
    fmt::print("  dataset: {} + {} samples in {:.1f}s, beep share {:.3f} (raw {:.3f}, rebalanced {})\n",
               train_set.size(), held_out.size(), seconds_since(t_gen),
               static_cast<double>(rep.beeps) / static_cast<double>(train_set.size()), rep.raw_beep_fraction(),
               rep.rebalanced ? "yes" : "no");

    sli::TrainConfig cfg;  // 200 epochs, early stopping on held-out share
    cfg.batch_size = 1024;
    cfg.learning_rate = 1e-4;
    cfg.seed = 3;
    const ActionBounds b = action_bounds(ActionMode::Continuous);

    const auto t0 = Clock::now();
    sli::TrainReport tr;
    const sli::ClassifierModel model = sli::train(train_set, b.v_max, b.omega_max, cfg, &tr);
    const double train_s = seconds_since(t0);
    const fs::path model_path = out / "sli.model";
    sli::save_model(model, model_path);
    const sli::Confusion c = sli::evaluate(model, held_out);
    fmt::print("  trained {} epochs (best {}) in {:.1f}s, held-out accuracy {:.4f}\n", tr.epochs.size(), tr.best_epoch,
               train_s, c.accuracy());

    const sli::ClassifierModel again = sli::train(train_set, b.v_max, b.omega_max, cfg);
    sli::save_model(again, out / "sli_retrained.model");
    const bool identical = again == model && slurp(out / "sli_retrained.model") == slurp(model_path);

    return {{c.accuracy() >= 0.85 && train_s < 15 * 60 && identical,
             fmt::format("held-out accuracy {:.4f} on {} samples, training {:.1f}s, retrain identical {}",
                         c.accuracy(), held_out.size(), train_s, identical ? "yes" : "no")},
            model_path};
}

// ---------------------------------------------------------------------------

Verdict accounting(const std::vector<bench::BenchRow>& rows) {
    std::map<std::pair<std::string, std::string>, std::pair<long long, long long>> sums;
    int bad_success = 0;
    for (const auto& r : rows) {
        auto& s = sums[{r.scenario_kind, r.method}];
        if (r.status == Status::Aborted) continue;
        s.first += r.beep_steps;
        s.second += r.steps;
        bad_success += r.status == Status::Success && !(r.final_goal_distance <= 0.3);
    }
    double worst_sum = 0.0;
    int beep_mismatch = 0;
    for (const auto& a : bench::aggregate_rows(rows)) {
        const Metrics& m = a.metrics;
        worst_sum = std::max(worst_sum, std::abs(m.success_rate + m.ped_collision_rate + m.obstacle_collision_rate +
                                                 m.timeout_rate - 1.0));
        const auto [beeps, steps] = sums[{a.scenario_kind, a.method}];
        beep_mismatch += !same_bits(m.beep_rate, static_cast<double>(beeps) / static_cast<double>(steps));
    }
    return {worst_sum <= 1e-9 && beep_mismatch == 0 && bad_success == 0,
            fmt::format("{} rows, max |sum of rates - 1| {:.1e}, beep-rate mismatches {}, Success rows beyond 0.3 m {}",
                        rows.size(), worst_sum, beep_mismatch, bad_success)};
}

Verdict determinism(const std::vector<bench::BenchRow>& full, const bench::BenchSpec& full_spec,
                    const std::string& sli_method) {
    std::vector<std::string> problems;

    // trajectory files
    const fs::path dir = fs::temp_directory_path() / "socnav_acceptance_traj";
    fs::create_directories(dir);
    int files = 0;
    for (const std::string kind : {"random", "circular"}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const Scenario s = bench::generate(kind, seed, full_spec);
            for (const auto& spec : full_spec.methods) {
                const bench::MethodFactory f(spec);
                std::string bytes[2];
                for (int k = 0; k < 2; ++k) {
                    bench::MethodInstance m = f.make();
                    const EpisodeResult r = run_episode(s, *m.nav, *m.policy, s.seed, true);
                    const fs::path p = dir / fmt::format("t{}.csv", k);
                    write_trajectory(*r.trajectory, p);
                    bytes[k] = slurp(p);
                }
                ++files;
                if (bytes[0] != bytes[1]) problems.push_back(fmt::format("trajectory {} {} {}", kind, seed, spec.id()));
            }
        }
    }
    fs::remove_all(dir);

    // worker-count invariance: the first 100 seeds again, serially
    bench::BenchSpec serial = full_spec;
    serial.episodes = 100;
    serial.parallel = 1;
    const auto rows = bench::run_bench(serial);
    std::vector<bench::BenchRow> subset;
    for (const auto& r : full) {
        if (r.seed < 100) subset.push_back(r);
    }
    if (rows != subset) problems.push_back("bench rows differ between worker counts");
    if (bench::aggregate_csv(bench::aggregate_rows(rows)) != bench::aggregate_csv(bench::aggregate_rows(subset))) {
        problems.push_back("aggregates differ between worker counts");
    }

    // bridge echo
    const std::uint64_t session_seed = 91;
    auto scenario_of = [](std::size_t e) { return e < 3 ? gen_random(e) : gen_circular(e); };
    std::vector<EpisodeResult> local;
    for (std::size_t e = 0; e < 6; ++e) {
        OrcaRobotController nav;
        FdPolicy fd({1.0, 0.0});
        local.push_back(run_episode(scenario_of(e), nav, fd, derive_seed(session_seed, e), false));
    }
    oracle::Harness h(scenario_of, local.size(), session_seed);
    h.client.hello();
    for (const EpisodeResult& expected : local) {
        for (int step = 0;; ++step) {
            const json m = json::parse(h.client.receive());
            if (m["done"].get<bool>()) break;
            h.client.act(expected.actions.at(static_cast<std::size_t>(step)));
        }
        h.client.receive();  // episode result
    }
    h.client.receive();  // session summary
    const bridge::SessionSummary summary = h.finish();
    int echoed = 0;
    for (std::size_t e = 0; e < local.size(); ++e) {
        const bool same = e < summary.results.size() && summary.results[e] == local[e] &&
                          same_bits(summary.results[e].min_surface_distance, local[e].min_surface_distance) &&
                          same_bits(summary.results[e].final_goal_distance, local[e].final_goal_distance);
        echoed += same;
    }
    if (echoed != static_cast<int>(local.size())) problems.push_back(fmt::format("bridge echo {}/6", echoed));

    std::string detail = fmt::format(
        "{} trajectory pairs byte-identical checks, {} rows serial vs {} workers, {}/6 bridge echoes bitwise (sli model {})",
        files, rows.size(), full_spec.parallel, echoed, sli_method);
    for (const auto& p : problems) detail += "; " + p;
    return {problems.empty(), detail};
}

Verdict protocol() {
    std::vector<std::string> problems;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) problems.push_back(what);
    };
    auto has_keys = [](const json& j, std::initializer_list<const char*> keys) {
        for (const char* k : keys) {
            if (!j.contains(k)) return false;
        }
        return true;
    };

    // episode 1 is robot-only and is played to the goal by echoing local actions
    Scenario open;
    open.robot_start = {0, 0, 0};
    open.robot_goal = {3, 0};
    auto scenario_of = [&](std::size_t e) { return e == 1 ? open : gen_random(40 + e); };
    const std::uint64_t seed = 5;
    OrcaRobotController nav;
    NoBeepPolicy quiet;
    const EpisodeResult to_goal = run_episode(open, nav, quiet, derive_seed(seed, 1), false);

    oracle::Harness h(scenario_of, 3, seed, std::chrono::milliseconds(300));
    const json hello = json::parse(h.client.hello());
    expect(hello["type"] == "hello" && hello["version"] == bridge::kProtocolVersion &&
               has_keys(hello, {"action_mode", "v_max", "omega_max", "grid_shape", "ped_maps_shape", "episodes", "dt",
                                "reward_version"}),
           "hello schema");

    // episode 0: rejections, one valid step, reset
    const std::string obs0 = h.client.receive();
    const bridge::ObservationMessage m0 = bridge::decode_observation(obs0);
    expect(m0.episode == 0 && m0.step == 0 && !m0.done, "first observation");
    h.client.send_raw(R"({"type":"act","v":0.1,)");
    json e = json::parse(h.client.receive());
    expect(e["type"] == "error" && e["code"] == "malformed" && e.contains("offset"), "malformed line error");
    expect(h.client.receive() == obs0, "no advance after malformed line");
    h.client.act({0.6, 5.0, false});
    e = json::parse(h.client.receive());
    expect(e["code"] == "invalid_action", "out-of-range action error");
    expect(h.client.receive() == obs0, "no advance after out-of-range action");
    h.client.send_raw(R"({"type":"act","v":0.1,"w":0,"beep":false,"extra":1})");
    expect(json::parse(h.client.receive())["code"] == "malformed", "unknown field error");
    expect(h.client.receive() == obs0, "no advance after unknown field");
    h.client.act({0.2, 0.0, false});
    const bridge::ObservationMessage m1 = bridge::decode_observation(h.client.receive());
    expect(m1.step == 1 && m1.episode == 0, "valid act advances one step");
    h.client.reset();
    json r = json::parse(h.client.receive());
    expect(r["type"] == "result" && r["scope"] == "episode" && r["status"] == "Aborted" && r["steps"] == 1,
           "reset result");

    // episode 1: played to completion
    int steps = 0;
    bridge::ObservationMessage last;
    for (;;) {
        last = bridge::decode_observation(h.client.receive());
        expect(last.episode == 1 && last.step == steps, "episode 1 step order");
        if (last.done) break;
        h.client.act(to_goal.actions.at(static_cast<std::size_t>(steps)));
        ++steps;
    }
    expect(last.status == Status::Success && steps == to_goal.steps, "episode 1 reaches the goal");
    r = json::parse(h.client.receive());
    expect(r["scope"] == "episode" && r["status"] == "Success" && r["steps"] == to_goal.steps &&
               r["min_surface_distance"].is_null() &&
               has_keys(r, {"episode", "beep_steps", "final_goal_distance", "stuck"}),
           "episode 1 result schema");

    // episode 2: the client stays silent
    expect(bridge::decode_observation(h.client.receive()).episode == 2, "episode 2 starts");
    expect(json::parse(h.client.receive())["code"] == "timeout", "act timeout error");
    r = json::parse(h.client.receive());
    expect(r["status"] == "Aborted" && r["steps"] == 0, "timeout result");

    const json summary = json::parse(h.client.receive());
    expect(summary["scope"] == "session" && summary["episodes"] == 1 && summary["aborted"] == 2 &&
               summary["rejected_messages"] == 3 && summary["success_rate"] == 1.0,
           "session summary");
    const bridge::SessionSummary s = h.finish();
    expect(s.handshake && s.results.size() == 3 && s.rejected_messages == 3, "server-side summary");
    expect(s.results.size() == 3 && s.results[1] == to_goal, "played episode matches in-process run");

    std::string detail = fmt::format("hello/obs/act/reset/result, 3 rejected messages, timeout; {} schema checks failed",
                                     problems.size());
    for (const auto& p : problems) detail += "; " + p;
    return {problems.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
    fs::create_directories(out);
    Report report;
    const auto t_all = Clock::now();

    report.add(3, "lp2 matches the dense-sampling oracle", lp2_oracle);
    report.add(4, "pairwise ORCA safety", pairwise_safety);
    report.add(5, "beep raises the minimum distance in the canonical scenario", ervo_effect);

    SliOutcome sli_outcome;
    const auto t_train = Clock::now();
    try {
        sli_outcome = train_classifier(out);
    } catch (const std::exception& e) {
        sli_outcome.training = {false, fmt::format("exception: {}", e.what())};
    }
    fmt::print("  classifier stage {:.1f}s\n", seconds_since(t_train));

    bench::BenchSpec spec;
    spec.episodes = 500;
    spec.parallel = static_cast<int>(std::max(4u, std::thread::hardware_concurrency()));
    const std::string sli_method = fmt::format("sli({})", sli_outcome.model.string());
    for (const char* m : {"base", "fd(1.0)", "fdv(1.0,0.3)", "fdv(1.0,0.5)", "fdv(1.0,0.7)"}) {
        spec.methods.push_back(bench::parse_method(m));
    }
    const bool have_model = !sli_outcome.model.empty() && fs::exists(sli_outcome.model);
    if (have_model) spec.methods.push_back(bench::parse_method(sli_method));

    fmt::print("  bench: {} methods x 2 scenarios x {} episodes, {} workers\n", spec.methods.size(), spec.episodes,
               spec.parallel);
    std::fflush(stdout);
    const auto t_bench = Clock::now();
    std::vector<bench::BenchRow> rows;
    std::string bench_error;
    try {
        rows = bench::run_bench(spec);
    } catch (const std::exception& e) {
        bench_error = e.what();
    }
    const double bench_s = seconds_since(t_bench);
    std::vector<bench::AggregateRow> agg;
    if (bench_error.empty()) {
        std::ofstream(out / "bench.csv") << bench::rows_to_csv(rows);
        rows = bench::rows_from_csv(slurp(out / "bench.csv"));
        agg = bench::aggregate_rows(rows);
        std::ofstream(out / "aggregate.csv") << bench::aggregate_csv(agg);
        std::ofstream(out / "table.txt") << bench::aggregate_table(agg);
        fmt::print("{}", bench::aggregate_table(agg));
    }
    auto need_bench = [&] {
        if (!bench_error.empty()) throw std::runtime_error("bench failed: " + bench_error);
    };

    report.add(1, "FD(1.0) beats Base by 0.05 in both scenarios", [&] {
        need_bench();
        bool ok = bench_s < 600 && have_model;
        std::string detail;
        for (const char* kind : {"random", "circular"}) {
            const double base = find_row(agg, kind, "base").metrics.success_rate;
            const double fd = find_row(agg, kind, "fd(1.0)").metrics.success_rate;
            ok = ok && fd >= base + 0.05;
            detail += fmt::format("{}: Base {:.3f} FD {:.3f}; ", kind, base, fd);
        }
        return Verdict{ok, detail + fmt::format("{}-method bench {:.1f}s", spec.methods.size(), bench_s)};
    });

    report.add(2, "beep-rate ordering and threshold monotonicity", [&] {
        need_bench();
        double rate[4];
        const char* ids[4] = {"fd(1.0)", "fdv(1.0,0.3)", "fdv(1.0,0.5)", "fdv(1.0,0.7)"};
        for (int i = 0; i < 4; ++i) rate[i] = find_row(agg, "random", ids[i]).metrics.beep_rate;
        const bool ordered = rate[0] > rate[1] && rate[1] > rate[2] && rate[2] > rate[3];
        const oracle::MonotonicityReport m = oracle::check_threshold_monotonicity(100000, 2026);
        const bool mono = m.fd_violations == 0 && m.fdv_violations == 0 && m.receding_beeps == 0;
        return Verdict{ordered && mono,
                       fmt::format("random beep rates {:.3f} > {:.3f} > {:.3f} > {:.3f}; {} states, violations fd {} "
                                   "fdv {} receding {}",
                                   rate[0], rate[1], rate[2], rate[3], m.states, m.fd_violations, m.fdv_violations,
                                   m.receding_beeps)};
    });

    report.add(6, "classifier accuracy, training time, reproducibility, sli >= Base", [&] {
        need_bench();
        if (!have_model) return sli_outcome.training;
        bool ok = sli_outcome.training.pass;
        std::string detail = sli_outcome.training.detail + "; ";
        for (const char* kind : {"random", "circular"}) {
            const double base = find_row(agg, kind, "base").metrics.success_rate;
            const double s = find_row(agg, kind, sli_method).metrics.success_rate;
            ok = ok && s >= base;
            detail += fmt::format("{}: Base {:.3f} SLI {:.3f}; ", kind, base, s);
        }
        detail.resize(detail.size() - 2);
        return Verdict{ok, detail};
    });

    report.add(7, "determinism and replay", [&] {
        need_bench();
        return determinism(rows, spec, sli_method);
    });
    report.add(8, "protocol conformance", protocol);
    report.add(9, "episode accounting identities", [&] {
        need_bench();
        return accounting(rows);
    });

    fmt::print("\ntotal {:.1f}s\n", seconds_since(t_all));
    return report.finish();
}

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


#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "socnav/bench.hpp"
#include "socnav/error.hpp"

using namespace socnav;
using namespace socnav::bench;

namespace {

BenchSpec small_spec(int parallel) {
    BenchSpec s;
    s.episodes = 6;
    s.seed_start = 10;
    s.methods = {parse_method("base"), parse_method("fd(1.0)"), parse_method("fdv(1.5, 0.3)")};
    s.parallel = parallel;
    return s;
}

}  // namespace

TEST(Method, ParseExamples) {
    EXPECT_EQ(parse_method("base").kind, MethodSpec::Kind::Base);
    const MethodSpec fd = parse_method("fd(1.5)");
    EXPECT_EQ(fd.kind, MethodSpec::Kind::Fd);
    EXPECT_EQ(fd.d_theta, 1.5);
    EXPECT_EQ(fd.id(), "fd(1.5)");
    EXPECT_EQ(parse_method("fd(1)").id(), "fd(1.0)");
    const MethodSpec fdv = parse_method(" fdv(1.0, 0.3) ");
    EXPECT_EQ(fdv.kind, MethodSpec::Kind::Fdv);
    EXPECT_EQ(fdv.v_theta, 0.3);
    EXPECT_EQ(fdv.id(), "fdv(1.0,0.3)");
    EXPECT_EQ(parse_method(fdv.id()), fdv);
    const MethodSpec sli = parse_method("sli(models/beep.model)");
    EXPECT_EQ(sli.argument, "models/beep.model");
    EXPECT_EQ(parse_method("bridge(127.0.0.1:9000)").id(), "bridge(127.0.0.1:9000)");
}

TEST(Method, ParseErrors) {
    for (const char* bad : {"", "orca", "fd", "fd()", "fd(x)", "fd(-1)", "fd(nan)", "fdv(1.0)", "fdv(1.0,-0.1)",
                            "sli()", "bridge(nohost)", "fd(1.0"}) {
        EXPECT_THROW(parse_method(bad), ValidationError) << bad;
    }
}

TEST(Bench, SpecRefusals) {
    BenchSpec s = small_spec(1);
    s.kinds = {"spiral"};
    EXPECT_THROW(run_bench(s), ValidationError);
    s = small_spec(1);
    s.methods.clear();
    EXPECT_THROW(run_bench(s), ValidationError);
    s = small_spec(1);
    s.episodes = 0;
    EXPECT_THROW(run_bench(s), ValidationError);
}

TEST(Bench, ParallelMatchesSerial) {
    const auto serial = run_bench(small_spec(1));
    const auto parallel = run_bench(small_spec(8));
    ASSERT_EQ(serial.size(), 2u * 6 * 3);
    EXPECT_EQ(serial, parallel);
    // ordering: kind, seed, method
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].scenario_kind, i < 18 ? "random" : "circular");
        EXPECT_EQ(serial[i].seed, 10 + (i % 18) / 3);
        EXPECT_EQ(serial[i].method, small_spec(1).methods[i % 3].id());
    }
}

TEST(Bench, RowMatchesDirectEpisode) {
    const BenchSpec spec = small_spec(1);
    const auto rows = run_bench(spec);
    for (std::size_t i : {0u, 4u, 20u}) {
        const BenchRow& r = rows[i];
        const Scenario s = generate(r.scenario_kind, r.seed, spec);
        OrcaRobotController nav(spec.k_theta);
        const MethodSpec m = parse_method(r.method);
        NoBeepPolicy none;
        FdPolicy fd({m.d_theta, m.v_theta});
        FdvPolicy fdv({m.d_theta, m.v_theta});
        InteractionPolicy& p = m.kind == MethodSpec::Kind::Base ? static_cast<InteractionPolicy&>(none)
                               : m.kind == MethodSpec::Kind::Fd ? static_cast<InteractionPolicy&>(fd)
                                                                : static_cast<InteractionPolicy&>(fdv);
        const EpisodeResult e = run_episode(s, nav, p, r.seed, false);
        EXPECT_EQ(e.status, r.status);
        EXPECT_EQ(e.steps, r.steps);
        EXPECT_EQ(e.beep_steps, r.beep_steps);
        EXPECT_EQ(e.min_surface_distance, r.min_surface_distance);
        EXPECT_EQ(e.final_goal_distance, r.final_goal_distance);
    }
}

TEST(Bench, AccountingIdentities) {
    const auto rows = run_bench(small_spec(4));
    for (const BenchRow& r : rows) {
        if (r.status == Status::Success) { EXPECT_LE(r.final_goal_distance, 0.3); }
        if (r.status == Status::PedCollision) { EXPECT_LT(r.min_surface_distance, 0.0); }
        EXPECT_LE(r.beep_steps, r.steps);
        EXPECT_LE(r.steps, 200);
        if (r.method == "base") { EXPECT_EQ(r.beep_steps, 0); }
    }
    const auto agg = aggregate_rows(rows);
    ASSERT_EQ(agg.size(), 6u);
    for (const AggregateRow& a : agg) {
        long long steps = 0, beeps = 0;
        int n = 0, ok = 0;
        for (const BenchRow& r : rows) {
            if (r.scenario_kind != a.scenario_kind || r.method != a.method) continue;
            steps += r.steps;
            beeps += r.beep_steps;
            ++n;
            ok += r.status == Status::Success;
        }
        const Metrics& m = a.metrics;
        EXPECT_EQ(m.episodes, n);
        EXPECT_NEAR(m.success_rate + m.ped_collision_rate + m.obstacle_collision_rate + m.timeout_rate, 1.0, 1e-12);
        EXPECT_DOUBLE_EQ(m.success_rate, static_cast<double>(ok) / n);
        EXPECT_DOUBLE_EQ(m.beep_rate, static_cast<double>(beeps) / static_cast<double>(steps));
        EXPECT_EQ(m.total_steps, steps);
    }
}

TEST(Bench, SingleEpisodeAggregateIsIndicator) {
    BenchSpec s = small_spec(1);
    s.episodes = 1;
    s.kinds = {"circular"};
    s.methods = {parse_method("fd(1.0)")};
    const auto rows = run_bench(s);
    ASSERT_EQ(rows.size(), 1u);
    const Metrics m = aggregate_rows(rows).at(0).metrics;
    EXPECT_EQ(m.success_rate, rows[0].status == Status::Success ? 1.0 : 0.0);
    EXPECT_EQ(m.ped_collision_rate, rows[0].status == Status::PedCollision ? 1.0 : 0.0);
    EXPECT_EQ(m.timeout_rate, rows[0].status == Status::Timeout ? 1.0 : 0.0);
}

TEST(Bench, AggregateTableNamesColumnsAndMethods) {
    const auto agg = aggregate_rows(run_bench(small_spec(2)));
    const std::string table = aggregate_table(agg);
    for (const char* word : {"Method", "Success", "PedColl", "Beep", "random", "circular", "fd(1.0)", "fdv(1.5,0.3)"}) {
        EXPECT_NE(table.find(word), std::string::npos) << word;
    }
    const std::string csv = aggregate_csv(agg);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Csv, RoundTrip) {
    auto rows = run_bench(small_spec(2));
    rows[0].min_surface_distance = kInfiniteDistance;
    rows[1].method = "sli(a,b.model)";
    const std::string text = rows_to_csv(rows);
    EXPECT_EQ(text.rfind(std::string(kCsvSchema) + "\n", 0), 0u);
    EXPECT_EQ(rows_from_csv(text), rows);
}

TEST(Csv, MalformedNamesLine) {
    const std::string good = rows_to_csv({BenchRow{"random", 1, "base", Status::Success, 40, 0, 0.5, 0.2, false}});
    auto expect_line = [](const std::string& text, const std::string& where) {
        try {
            rows_from_csv(text);
            FAIL() << "expected ParseError";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.where(), where) << e.what();
        }
    };
    expect_line(good + "random,2,base,Success,x,0,0.5,0.2,0\n", "line 4");
    expect_line(good + "random,2,base,Flying,1,0,0.5,0.2,0\n", "line 4");
    expect_line(good + "random,2,base\n", "line 4");
    expect_line(good.substr(good.find('\n') + 1), "line 1");  // schema comment missing
}

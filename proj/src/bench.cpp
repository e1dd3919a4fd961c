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

#include "socnav/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "socnav/bridge.hpp"
#include "socnav/error.hpp"
#include "socnav/sli.hpp"

namespace socnav::bench {

namespace {

std::string number_text(double v) {
    std::string s = fmt::format("{}", v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

double parse_number(std::string_view s, std::string_view method) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ValidationError(fmt::format("method '{}': '{}' is not a number", method, s));
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    return s;
}

}  // namespace

std::string MethodSpec::id() const {
    switch (kind) {
        case Kind::Base: return "base";
        case Kind::Fd: return fmt::format("fd({})", number_text(d_theta));
        case Kind::Fdv: return fmt::format("fdv({},{})", number_text(d_theta), number_text(v_theta));
        case Kind::Sli: return fmt::format("sli({})", argument);
        case Kind::Bridge: return fmt::format("bridge({})", argument);
    }
    return "?";
}

MethodSpec parse_method(std::string_view text) {
    const std::string_view t = trim(text);
    MethodSpec m;
    if (t == "base") return m;
    const std::size_t open = t.find('(');
    if (open == std::string_view::npos || t.back() != ')') {
        throw ValidationError(fmt::format("unknown method '{}' (expected base | fd(d) | fdv(d,v) | sli(path) | bridge(host:port))", t));
    }
    const std::string_view name = t.substr(0, open);
    const std::string_view args = t.substr(open + 1, t.size() - open - 2);
    if (name == "fd") {
        m.kind = MethodSpec::Kind::Fd;
        m.d_theta = parse_number(trim(args), t);
    } else if (name == "fdv") {
        m.kind = MethodSpec::Kind::Fdv;
        const std::size_t comma = args.find(',');
        if (comma == std::string_view::npos) throw ValidationError(fmt::format("method '{}': fdv needs (d, v)", t));
        m.d_theta = parse_number(trim(args.substr(0, comma)), t);
        m.v_theta = parse_number(trim(args.substr(comma + 1)), t);
    } else if (name == "sli") {
        m.kind = MethodSpec::Kind::Sli;
        m.argument = std::string(trim(args));
        if (m.argument.empty()) throw ValidationError(fmt::format("method '{}': sli needs a model path", t));
    } else if (name == "bridge") {
        m.kind = MethodSpec::Kind::Bridge;
        m.argument = std::string(trim(args));
        bridge::parse_endpoint(m.argument);
    } else {
        throw ValidationError(fmt::format("unknown method '{}'", name));
    }
    interaction::validate({m.d_theta, m.v_theta});
    return m;
}

MethodFactory::MethodFactory(MethodSpec spec, double k_theta) : spec_(std::move(spec)), k_theta_(k_theta) {
    if (spec_.kind == MethodSpec::Kind::Sli) {
        model_ = std::make_shared<const sli::ClassifierModel>(sli::load_model(spec_.argument));
    }
}

MethodInstance MethodFactory::make() const {
    MethodInstance m;
    const interaction::InteractionParams p{spec_.d_theta, spec_.v_theta};
    switch (spec_.kind) {
        case MethodSpec::Kind::Base: m.policy = std::make_unique<NoBeepPolicy>(); break;
        case MethodSpec::Kind::Fd: m.policy = std::make_unique<FdPolicy>(p); break;
        case MethodSpec::Kind::Fdv: m.policy = std::make_unique<FdvPolicy>(p); break;
        case MethodSpec::Kind::Sli:
            m.policy = std::make_unique<sli::SliPolicy>(std::static_pointer_cast<const sli::ClassifierModel>(model_));
            break;
        case MethodSpec::Kind::Bridge:
            m.nav = std::make_unique<bridge::BridgeController>(bridge::parse_endpoint(spec_.argument));
            m.policy = std::make_unique<NoBeepPolicy>();
            return m;
    }
    m.nav = std::make_unique<OrcaRobotController>(k_theta_);
    return m;
}

void validate(const BenchSpec& spec) {
    if (spec.episodes < 1) throw ValidationError("episode count must be >= 1");
    if (spec.methods.empty()) throw ValidationError("no methods given");
    if (spec.parallel < 1) throw ValidationError("parallel must be >= 1");
    if (spec.scenario_files.empty()) {
        if (spec.kinds.empty()) throw ValidationError("no scenario kinds given");
        for (const std::string& k : spec.kinds) {
            if (k != "random" && k != "circular" && k != "canonical") {
                throw ValidationError(fmt::format("unknown scenario kind '{}' (random | circular | canonical)", k));
            }
        }
    }
}

Scenario generate(const std::string& kind, std::uint64_t seed, const BenchSpec& spec) {
    if (kind == "random") return gen_random(seed, spec.random, spec.params);
    if (kind == "circular") return gen_circular(seed, spec.circular, spec.params);
    if (kind == "canonical") return gen_canonical_beep(seed, spec.params);
    throw ValidationError(fmt::format("unknown scenario kind '{}'", kind));
}

std::vector<BenchRow> run_bench(const BenchSpec& spec,
                                const std::function<void(std::size_t, std::size_t)>& progress) {
    validate(spec);
    std::vector<MethodFactory> factories;
    for (const MethodSpec& m : spec.methods) factories.emplace_back(m, spec.k_theta);

    std::vector<Scenario> scenarios;
    if (!spec.scenario_files.empty()) {
        for (const auto& path : spec.scenario_files) scenarios.push_back(load_scenario(path));
    } else {
        for (const std::string& kind : spec.kinds) {
            for (int i = 0; i < spec.episodes; ++i) scenarios.push_back(generate(kind, spec.seed_start + i, spec));
        }
    }

    const std::size_t total = scenarios.size() * factories.size();
    std::vector<BenchRow> rows(total);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::mutex progress_mutex;
    auto work = [&] {
        for (std::size_t job = next++; job < total; job = next++) {
            const Scenario& s = scenarios[job / factories.size()];
            const MethodFactory& f = factories[job % factories.size()];
            MethodInstance inst = f.make();
            const EpisodeResult r = run_episode(s, *inst.nav, *inst.policy, s.seed, false);
            rows[job] = {s.kind,  s.seed,      f.spec().id(),          r.status,
                         r.steps, r.beep_steps, r.min_surface_distance, r.final_goal_distance,
                         r.stuck};
            const std::size_t d = ++done;
            if (progress) {
                const std::lock_guard lock(progress_mutex);
                progress(d, total);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < spec.parallel; ++t) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();
    return rows;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

constexpr std::string_view kHeader =
    "scenario_kind,seed,method,status,steps,beep_steps,min_surface_distance,final_goal_distance,stuck";

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw ParseError(fmt::format("line {}", line_no), "unterminated quote");
    out.push_back(std::move(cur));
    return out;
}

template <typename T>
T parse_field(const std::string& s, std::size_t line_no, std::string_view column) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError(fmt::format("line {}", line_no), fmt::format("bad {} '{}'", column, s));
    }
    return v;
}

}  // namespace

std::string rows_to_csv(const std::vector<BenchRow>& rows) {
    std::string out(kCsvSchema);
    out += '\n';
    out += kHeader;
    out += '\n';
    for (const BenchRow& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", csv_field(r.scenario_kind), r.seed, csv_field(r.method),
                           to_string(r.status), r.steps, r.beep_steps, r.min_surface_distance, r.final_goal_distance,
                           r.stuck ? 1 : 0);
    }
    return out;
}

std::vector<BenchRow> rows_from_csv(const std::string& text) {
    std::vector<BenchRow> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool schema = false;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            if (line == kCsvSchema) schema = true;
            continue;
        }
        if (!header) {
            if (!schema) throw ParseError(fmt::format("line {}", line_no), "missing schema comment");
            if (line != kHeader) throw ParseError(fmt::format("line {}", line_no), "unexpected header row");
            header = true;
            continue;
        }
        const auto f = split_csv(line, line_no);
        if (f.size() != 9) throw ParseError(fmt::format("line {}", line_no), fmt::format("expected 9 fields, got {}", f.size()));
        BenchRow r;
        r.scenario_kind = f[0];
        r.seed = parse_field<std::uint64_t>(f[1], line_no, "seed");
        r.method = f[2];
        try {
            r.status = parse_status(f[3]);
        } catch (const ValidationError& e) {
            throw ParseError(fmt::format("line {}", line_no), e.what());
        }
        r.steps = parse_field<int>(f[4], line_no, "steps");
        r.beep_steps = parse_field<int>(f[5], line_no, "beep_steps");
        r.min_surface_distance = parse_field<double>(f[6], line_no, "min_surface_distance");
        r.final_goal_distance = parse_field<double>(f[7], line_no, "final_goal_distance");
        if (f[8] != "0" && f[8] != "1") throw ParseError(fmt::format("line {}", line_no), "stuck must be 0 or 1");
        r.stuck = f[8] == "1";
        rows.push_back(std::move(r));
    }
    if (!header) throw ParseError(fmt::format("line {}", line_no), "no header row");
    return rows;
}

std::vector<AggregateRow> aggregate_rows(const std::vector<BenchRow>& rows) {
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>, std::vector<EpisodeResult>> groups;
    for (const BenchRow& r : rows) {
        const auto key = std::make_pair(r.scenario_kind, r.method);
        if (!groups.contains(key)) order.push_back(key);
        EpisodeResult e;
        e.status = r.status;
        e.steps = r.steps;
        e.beep_steps = r.beep_steps;
        groups[key].push_back(e);
    }
    std::vector<AggregateRow> out;
    for (const auto& key : order) {
        AggregateRow a{key.first, key.second, {}};
        const auto& g = groups[key];
        const bool all_aborted =
            std::all_of(g.begin(), g.end(), [](const EpisodeResult& e) { return e.status == Status::Aborted; });
        if (all_aborted) {
            a.metrics.aborted = static_cast<int>(g.size());
        } else {
            a.metrics = aggregate(g);
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out =
        "scenario_kind,method,episodes,aborted,success_rate,ped_collision_rate,obstacle_collision_rate,timeout_rate,"
        "beep_rate,total_steps,beep_steps,mean_steps_on_success\n";
    for (const AggregateRow& a : rows) {
        const Metrics& m = a.metrics;
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(a.scenario_kind), csv_field(a.method),
                           m.episodes, m.aborted, m.success_rate, m.ped_collision_rate, m.obstacle_collision_rate,
                           m.timeout_rate, m.beep_rate, m.total_steps, m.beep_steps, m.mean_steps_on_success);
    }
    return out;
}

std::string aggregate_table(const std::vector<AggregateRow>& rows) {
    std::size_t width = 24;
    for (const AggregateRow& a : rows) width = std::max(width, a.method.size());
    std::string out;
    std::string kind;
    for (const AggregateRow& a : rows) {
        if (a.scenario_kind != kind || out.empty()) {
            kind = a.scenario_kind;
            if (!out.empty()) out += '\n';
            out += fmt::format("[{}]\n", kind);
            out += fmt::format("{:<{}} {:>7} {:>7} {:>7} {:>7} {:>7} {:>8} {:>7}\n", "Method", width, "Success", "PedColl",
                               "Beep", "ObsColl", "Timeout", "Episodes", "Aborted");
        }
        const Metrics& m = a.metrics;
        out += fmt::format("{:<{}} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>7.3f} {:>8} {:>7}\n", a.method, width,
                           m.success_rate, m.ped_collision_rate, m.beep_rate, m.obstacle_collision_rate,
                           m.timeout_rate, m.episodes, m.aborted);
    }
    return out;
}

}  // namespace socnav::bench

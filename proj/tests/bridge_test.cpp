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

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

#include "bridge_session.hpp"
#include "socnav/base64.hpp"
#include "socnav/bridge.hpp"
#include "socnav/rng.hpp"

using namespace socnav;
using namespace socnav::bridge;
using json = nlohmann::json;
using namespace std::chrono_literals;

TEST(Codec, AllZeroFrameRoundTrip) {
    ObservationMessage m;
    m.frame = obs::ObservationFrame::zeros(48);
    const ObservationMessage back = decode_observation(encode_observation(m));
    EXPECT_EQ(back, m);
}

TEST(Codec, RandomFrameRoundTrip) {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<float> u(-1, 1);
    ObservationMessage m;
    m.episode = 3;
    m.step = 17;
    m.frame = obs::ObservationFrame::zeros(16);
    for (auto& x : m.frame.grid) x = std::abs(u(gen));
    for (auto& x : m.frame.ped_maps) x = u(gen);
    m.frame.goal_distance = 3.25;
    m.frame.heading_error = -1.5;
    m.reward = 0.0625;
    m.done = true;
    m.status = Status::Timeout;
    const std::string line = encode_observation(m);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    EXPECT_EQ(decode_observation(line), m);
}

TEST(Codec, ObservationRejections) {
    ObservationMessage m;
    m.frame = obs::ObservationFrame::zeros(8);
    json j = json::parse(encode_observation(m));
    auto expect_malformed = [](const json& doc) {
        try {
            decode_observation(doc.dump());
            FAIL() << doc.dump().substr(0, 80);
        } catch (const ProtocolError& e) {
            EXPECT_EQ(e.code(), "malformed");
        }
    };
    json extra = j;
    extra["bonus"] = 1;
    expect_malformed(extra);
    json shape = j;
    shape["grid"]["shape"] = {8, 9};
    expect_malformed(shape);
    json short_data = j;
    short_data["ped_maps"]["shape"] = {3, 4, 4};
    expect_malformed(short_data);
    json nan = j;
    std::vector<float> grid(64, 0.0f);
    grid[5] = std::numeric_limits<float>::quiet_NaN();
    nan["grid"]["data"] = encode_floats(grid);
    expect_malformed(nan);
    json version = j;
    version["reward_version"] = "other";
    expect_malformed(version);
}

TEST(Codec, ActLineExamples) {
    const std::string line = R"({"type":"act","v":0.5,"w":-0.3,"beep":false})";
    EXPECT_EQ(decode_action(line, ActionMode::Continuous), (ActionCommand{0.5, -0.3, false}));
    try {
        decode_action(line, ActionMode::Discrete);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), "invalid_action");
    }
    EXPECT_EQ(decode_action(encode_action({1.0, -0.4, true}), ActionMode::Discrete), (ActionCommand{1.0, -0.4, true}));
    try {
        decode_action(R"({"type":"act","v":0.5,"w":0.1,"beep":false,"x":1})", ActionMode::Continuous);
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), "malformed");
    }
    EXPECT_THROW(decode_action(R"({"type":"act","v":0.5,"beep":false})", ActionMode::Continuous), ProtocolError);
    EXPECT_THROW(decode_action(R"({"type":"act","v":"fast","w":0,"beep":false})", ActionMode::Continuous),
                 ProtocolError);
}

TEST(Codec, MessageTypeOffsets) {
    EXPECT_EQ(message_type(R"({"type":"reset"})"), "reset");
    try {
        message_type(R"({"type": "act", "v": 0.5,, "w": 0})");
        FAIL();
    } catch (const ProtocolError& e) {
        EXPECT_EQ(e.code(), "malformed");
        ASSERT_TRUE(e.offset().has_value());
        EXPECT_EQ(*e.offset(), 25u);
    }
    EXPECT_THROW(message_type(R"([1,2])"), ProtocolError);
    EXPECT_THROW(message_type(R"({"v":1})"), ProtocolError);
}

TEST(Endpoint, Parsing) {
    EXPECT_EQ(parse_endpoint("localhost:9000").host, "localhost");
    EXPECT_EQ(parse_endpoint("localhost:9000").port, 9000);
    EXPECT_EQ(parse_endpoint(":81").host, "127.0.0.1");
    EXPECT_EQ(parse_endpoint("8080").port, 8080);
    EXPECT_THROW(parse_endpoint("host:"), ValidationError);
    EXPECT_THROW(parse_endpoint("host:99999"), ValidationError);
}

TEST(Session, HandshakeAndEchoEquivalence) {
    // Actions of an in-process FD run replayed through the protocol.
    const Scenario scenario = gen_random(3);
    OrcaRobotController nav;
    FdPolicy fd({1.0, 0.0});
    const EpisodeResult local = run_episode(scenario, nav, fd, derive_seed(77, 0), false);
    ASSERT_GT(local.beep_steps, 0);

    oracle::Harness h([&](std::size_t) { return scenario; }, 1, 77);
    const json hello = json::parse(h.client.hello());
    EXPECT_EQ(hello["type"], "hello");
    EXPECT_EQ(hello["version"], 1);
    EXPECT_EQ(hello["action_mode"], "continuous");
    EXPECT_EQ(hello["ped_maps_shape"], json({3, 48, 48}));
    EXPECT_EQ(hello["reward_version"], "progress-v1");

    int steps = 0;
    for (;;) {
        const json m = json::parse(h.client.receive());
        if (m["type"] == "obs" && !m["done"].get<bool>()) {
            ASSERT_EQ(m["step"], steps);
            h.client.act(local.actions.at(static_cast<std::size_t>(steps)));
            ++steps;
            continue;
        }
        ASSERT_EQ(m["type"], "obs");
        EXPECT_EQ(m["status"], std::string(to_string(local.status)));
        break;
    }
    const json result = json::parse(h.client.receive());
    EXPECT_EQ(result["scope"], "episode");
    EXPECT_EQ(result["steps"], local.steps);
    EXPECT_EQ(result["beep_steps"], local.beep_steps);
    const json summary = json::parse(h.client.receive());
    EXPECT_EQ(summary["scope"], "session");
    EXPECT_EQ(summary["episodes"], 1);

    const SessionSummary s = h.finish();
    ASSERT_EQ(s.results.size(), 1u);
    EXPECT_EQ(s.results[0], local);
    EXPECT_EQ(std::memcmp(&s.results[0].min_surface_distance, &local.min_surface_distance, sizeof(double)), 0);
    EXPECT_EQ(std::memcmp(&s.results[0].final_goal_distance, &local.final_goal_distance, sizeof(double)), 0);
    EXPECT_EQ(s.rejected_messages, 0u);
}

TEST(Session, RejectedMessagesDoNotAdvance) {
    Scenario sc = gen_random(5);
    oracle::Harness h([&](std::size_t) { return sc; }, 1, 0);
    h.client.hello();
    const std::string obs0 = h.client.receive();

    // malformed line
    h.client.send_raw(R"({"type":"act",, "v":0})");
    json e = json::parse(h.client.receive());
    EXPECT_EQ(e["type"], "error");
    EXPECT_EQ(e["code"], "malformed");
    EXPECT_EQ(e["offset"], 14);  // the second comma
    EXPECT_TRUE(e.contains("stream_offset"));
    EXPECT_EQ(h.client.receive(), obs0);

    // out-of-range action
    h.client.act({0.9, 0.0, false});
    e = json::parse(h.client.receive());
    EXPECT_EQ(e["code"], "invalid_action");
    EXPECT_NE(e["message"].get<std::string>().find("0.6"), std::string::npos) << e["message"];
    EXPECT_EQ(h.client.receive(), obs0);

    // unknown type and out-of-turn hello
    h.client.send_raw(R"({"type":"teleport"})");
    EXPECT_EQ(json::parse(h.client.receive())["code"], "unknown_type");
    EXPECT_EQ(h.client.receive(), obs0);
    h.client.send_raw(R"({"type":"hello","version":1})");
    EXPECT_EQ(json::parse(h.client.receive())["code"], "unexpected");
    EXPECT_EQ(h.client.receive(), obs0);

    // a valid act advances exactly one step
    h.client.act({0.3, 0.1, false});
    const json obs1 = json::parse(h.client.receive());
    EXPECT_EQ(obs1["step"], 1);
    h.close_client();
    const SessionSummary s = h.finish();
    EXPECT_EQ(s.rejected_messages, 4u);
    EXPECT_TRUE(s.disconnected);
}

TEST(Session, ActTimeoutAbortsEpisode) {
    Scenario sc = gen_random(6);
    oracle::Harness h([&](std::size_t) { return sc; }, 2, 0, 150ms);
    h.client.hello();
    EXPECT_EQ(json::parse(h.client.receive())["type"], "obs");
    const json err = json::parse(h.client.receive());
    EXPECT_EQ(err["code"], "timeout");
    const json result = json::parse(h.client.receive());
    EXPECT_EQ(result["status"], "Aborted");
    EXPECT_EQ(result["steps"], 0);
    // the session continues with the next episode
    const json next = json::parse(h.client.receive());
    EXPECT_EQ(next["episode"], 1);
    h.close_client();
    const SessionSummary s = h.finish();
    ASSERT_GE(s.results.size(), 1u);
    EXPECT_EQ(s.results[0].status, Status::Aborted);
}

TEST(Session, ResetEndsEpisode) {
    oracle::Harness h([](std::size_t e) { return gen_circular(e); }, 2, 0);
    h.client.hello();
    json m = json::parse(h.client.receive());
    EXPECT_EQ(m["episode"], 0);
    h.client.act({0.6, 0.0, false});
    EXPECT_EQ(json::parse(h.client.receive())["step"], 1);
    h.client.reset();
    const json result = json::parse(h.client.receive());
    EXPECT_EQ(result["status"], "Aborted");
    EXPECT_EQ(result["steps"], 1);
    m = json::parse(h.client.receive());
    EXPECT_EQ(m["episode"], 1);
    EXPECT_EQ(m["step"], 0);
    h.client.reset();
    EXPECT_EQ(json::parse(h.client.receive())["scope"], "episode");
    const json summary = json::parse(h.client.receive());
    EXPECT_EQ(summary["scope"], "session");
    EXPECT_EQ(summary["aborted"], 2);
    EXPECT_TRUE(summary["success_rate"].is_null());
    h.finish();
}

TEST(Session, VersionMismatch) {
    oracle::Harness h([](std::size_t) { return gen_random(1); }, 1, 0);
    const json reply = json::parse(h.client.hello(2));
    EXPECT_EQ(reply["type"], "error");
    EXPECT_EQ(reply["code"], "version");
    EXPECT_FALSE(h.finish().handshake);
}

TEST(Session, FirstMessageMustBeHello) {
    oracle::Harness h([](std::size_t) { return gen_random(1); }, 1, 0);
    h.client.send_raw(R"({"type":"act","v":0,"w":0,"beep":false})");
    EXPECT_EQ(json::parse(h.client.receive())["code"], "expected_hello");
    h.client.send_raw(R"({"type":"hello"})");
    EXPECT_EQ(json::parse(h.client.receive())["code"], "malformed");
    EXPECT_EQ(json::parse(h.client.hello())["type"], "hello");
    h.close_client();
    EXPECT_TRUE(h.finish().handshake);
}

TEST(Tcp, ConcurrentSessions) {
    const int listen_fd = tcp_listen({"127.0.0.1", 0});
    const int port = bound_port(listen_fd);
    ServeOptions opts;
    opts.scenarios = [](std::size_t) { return gen_random(8); };
    opts.episode_budget = 1;
    std::mutex mu;
    std::vector<SessionSummary> done;
    std::thread server([&] {
        serve_tcp(listen_fd, opts, 2, nullptr, [&](const SessionSummary& s) {
            const std::lock_guard lock(mu);
            done.push_back(s);
        });
    });
    std::vector<std::thread> clients;
    std::vector<int> steps(2, 0);
    for (int c = 0; c < 2; ++c) {
        clients.emplace_back([&, c] {
            const int fd = tcp_connect({"127.0.0.1", port});
            FdChannel ch(fd, fd, true);
            Client client(ch);
            client.hello();
            OrcaRobotController nav;
            WorldState w = make_world(gen_random(8));
            for (;;) {
                const json m = json::parse(client.receive());
                if (m["type"] != "obs" || m["done"].get<bool>()) break;
                const ActionCommand a = nav.act(w, nullptr);
                advance(w, a);
                client.act(a);
                ++steps[c];
            }
        });
    }
    for (auto& t : clients) t.join();
    server.join();
    ::close(listen_fd);
    ASSERT_EQ(done.size(), 2u);
    for (const auto& s : done) {
        ASSERT_EQ(s.results.size(), 1u);
        EXPECT_EQ(s.results[0], done[0].results[0]);
    }
    EXPECT_EQ(steps[0], steps[1]);
}

TEST(ReverseConnect, BridgeControllerMatchesInProcess) {
    const Scenario scenario = gen_circular(4);
    OrcaRobotController local_nav;
    NoBeepPolicy quiet;
    const EpisodeResult local = run_episode(scenario, local_nav, quiet, 0, false);

    // External policy process: listens, answers with the recorded actions.
    const int listen_fd = tcp_listen({"127.0.0.1", 0});
    const int port = bound_port(listen_fd);
    std::thread policy([&] {
        const int fd = ::accept(listen_fd, nullptr, nullptr);
        FdChannel ch(fd, fd, true);
        Client client(ch);
        client.hello();
        std::size_t i = 0;
        for (;;) {
            const json m = json::parse(client.receive());
            if (m["type"] == "obs" && !m["done"].get<bool>()) {
                client.act(local.actions.at(i++));
                continue;
            }
            if (m["type"] == "result" && m["scope"] == "session") break;
        }
    });
    BridgeController remote({"127.0.0.1", port}, 5000ms);
    const EpisodeResult got = run_episode(scenario, remote, quiet, 0, false);
    policy.join();
    ::close(listen_fd);
    EXPECT_EQ(got, local);
}

TEST(ReverseConnect, NobodyListeningAborts) {
    const int listen_fd = tcp_listen({"127.0.0.1", 0});
    const int port = bound_port(listen_fd);
    ::close(listen_fd);
    BridgeController remote({"127.0.0.1", port}, 200ms);
    NoBeepPolicy quiet;
    EXPECT_EQ(run_episode(gen_random(1), remote, quiet, 0, false).status, Status::Aborted);
}

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

#include "socnav/bridge.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <mutex>
#include <thread>

#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fmt/format.h>
#include <json.hpp>

#include "socnav/base64.hpp"
#include "socnav/rng.hpp"

namespace socnav::bridge {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

json parse_line(std::string_view line) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        throw ProtocolError("malformed", fmt::format("malformed JSON at byte {}", offset), offset);
    }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ProtocolError("malformed", fmt::format("unknown field '{}'", key));
        }
    }
}

double finite_number(const json& j, std::string_view key) {
    const auto it = j.find(std::string(key));
    if (it == j.end()) throw ProtocolError("malformed", fmt::format("missing field '{}'", key));
    if (!it->is_number()) throw ProtocolError("malformed", fmt::format("field '{}' must be a number", key));
    const double v = it->get<double>();
    if (!std::isfinite(v)) throw ProtocolError("malformed", fmt::format("field '{}' must be finite", key));
    return v;
}

int integer_field(const json& j, std::string_view key) {
    const auto it = j.find(std::string(key));
    if (it == j.end() || !it->is_number_integer()) {
        throw ProtocolError("malformed", fmt::format("field '{}' must be an integer", key));
    }
    return it->get<int>();
}

bool bool_field(const json& j, std::string_view key) {
    const auto it = j.find(std::string(key));
    if (it == j.end() || !it->is_boolean()) throw ProtocolError("malformed", fmt::format("field '{}' must be a boolean", key));
    return it->get<bool>();
}

std::vector<int> shape_of(const json& j, std::string_view key) {
    const auto it = j.find("shape");
    if (it == j.end() || !it->is_array()) throw ProtocolError("malformed", fmt::format("{}.shape must be an array", key));
    std::vector<int> shape;
    for (const json& d : *it) {
        if (!d.is_number_integer() || d.get<int>() < 1) {
            throw ProtocolError("malformed", fmt::format("{}.shape entries must be positive integers", key));
        }
        shape.push_back(d.get<int>());
    }
    return shape;
}

std::vector<float> array_payload(const json& j, std::string_view key, const std::vector<int>& expected_shape) {
    if (!j.is_object()) throw ProtocolError("malformed", fmt::format("'{}' must be an object", key));
    reject_unknown(j, {"shape", "data"});
    const std::vector<int> shape = shape_of(j, key);
    if (shape != expected_shape) throw ProtocolError("malformed", fmt::format("{}.shape mismatch", key));
    const auto it = j.find("data");
    if (it == j.end() || !it->is_string()) throw ProtocolError("malformed", fmt::format("{}.data must be a string", key));
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    std::vector<float> out;
    try {
        out = decode_floats(it->get<std::string>());
    } catch (const Error& e) {
        throw ProtocolError("malformed", fmt::format("{}.data: {}", key, e.what()));
    }
    if (out.size() != n) {
        throw ProtocolError("malformed", fmt::format("{}.data has {} values, shape needs {}", key, out.size(), n));
    }
    for (float v : out) {
        if (!std::isfinite(v)) throw ProtocolError("malformed", fmt::format("{}.data contains a non-finite value", key));
    }
    return out;
}

ojson error_message(const std::string& code, const std::string& message, std::optional<std::size_t> offset,
                    std::optional<std::size_t> stream_offset) {
    ojson j;
    j["type"] = "error";
    j["code"] = code;
    j["message"] = message;
    if (offset) j["offset"] = *offset;
    if (stream_offset) j["stream_offset"] = *stream_offset;
    return j;
}

json distance_or_null(double d) { return std::isfinite(d) ? json(d) : json(nullptr); }

std::string encode_result(std::size_t episode, const EpisodeResult& r) {
    ojson j;
    j["type"] = "result";
    j["scope"] = "episode";
    j["episode"] = episode;
    j["status"] = std::string(to_string(r.status));
    j["steps"] = r.steps;
    j["beep_steps"] = r.beep_steps;
    j["min_surface_distance"] = distance_or_null(r.min_surface_distance);
    j["final_goal_distance"] = r.final_goal_distance;
    j["stuck"] = r.stuck;
    return j.dump();
}

std::string encode_summary(const SessionSummary& s) {
    ojson j;
    j["type"] = "result";
    j["scope"] = "session";
    std::size_t aborted = 0;
    for (const EpisodeResult& r : s.results) aborted += r.status == Status::Aborted ? 1 : 0;
    j["episodes"] = s.results.size() - aborted;
    j["aborted"] = aborted;
    j["rejected_messages"] = s.rejected_messages;
    if (aborted < s.results.size()) {
        const Metrics m = aggregate(s.results);
        j["success_rate"] = m.success_rate;
        j["ped_collision_rate"] = m.ped_collision_rate;
        j["obstacle_collision_rate"] = m.obstacle_collision_rate;
        j["timeout_rate"] = m.timeout_rate;
        j["beep_rate"] = m.beep_rate;
    } else {
        for (const char* k : {"success_rate", "ped_collision_rate", "obstacle_collision_rate", "timeout_rate", "beep_rate"}) {
            j[k] = nullptr;
        }
    }
    return j.dump();
}

/// The server role of the protocol, bound to one channel. Doubles as the
/// navigation controller of the episodes it hosts.
class ServerRole : public NavigationController {
public:
    ServerRole(LineChannel& channel, std::chrono::milliseconds act_timeout)
        : channel_(channel), act_timeout_(act_timeout) {}

    bool closed() const { return closed_; }
    std::size_t rejected() const { return rejected_; }

    void send(std::string_view line) {
        if (closed_) throw ChannelClosed();
        try {
            channel_.write_line(line);
        } catch (const ChannelClosed&) {
            closed_ = true;
            throw;
        }
    }

    void send_error(const std::string& code, const std::string& message, std::optional<std::size_t> offset,
                    bool with_stream_offset) {
        send(error_message(code, message, offset,
                           with_stream_offset ? std::optional(channel_.last_line_offset()) : std::nullopt)
                 .dump());
    }

    /// Waits for the client hello and answers it.
    bool handshake(const ScenarioParams& params, std::size_t episodes, std::chrono::milliseconds timeout) {
        while (true) {
            std::optional<std::string> line;
            try {
                line = channel_.read_line(timeout);
            } catch (const ChannelClosed&) {
                closed_ = true;
                return false;
            } catch (const ProtocolError& e) {
                ++rejected_;
                send_error(e.code(), e.what(), e.offset(), false);
                continue;
            }
            if (!line) {
                send_error("timeout", "no hello received", std::nullopt, false);
                return false;
            }
            try {
                const json j = parse_line(*line);
                if (!j.is_object() || !j.contains("type") || j["type"] != "hello") {
                    throw ProtocolError("expected_hello", "the first message must be hello");
                }
                reject_unknown(j, {"type", "version", "client"});
                if (!j.contains("version")) throw ProtocolError("malformed", "hello.version is mandatory");
                if (!j["version"].is_number_integer() || j["version"].get<int>() != kProtocolVersion) {
                    send_error("version", fmt::format("unsupported protocol version, server speaks {}", kProtocolVersion),
                               std::nullopt, true);
                    return false;
                }
            } catch (const ProtocolError& e) {
                ++rejected_;
                send_error(e.code(), e.what(), e.offset(), true);
                continue;
            }
            const ActionBounds b = action_bounds(params.action_mode);
            const int n = params.observation.size;
            ojson h;
            h["type"] = "hello";
            h["version"] = kProtocolVersion;
            h["action_mode"] = std::string(to_string(params.action_mode));
            h["v_max"] = b.v_max;
            h["omega_max"] = b.omega_max;
            h["grid_shape"] = {n, n};
            h["ped_maps_shape"] = {obs::kPedChannels, n, n};
            h["episodes"] = episodes;
            h["dt"] = params.dt;
            h["reward_version"] = kRewardVersion;
            send(h.dump());
            return true;
        }
    }

    void begin_episode(const WorldState& world, std::uint64_t) override {
        start_step_ = world.step;
        last_goal_distance_ = goal_distance(world);
        beep_steps_ = 0;
        min_clearance_ = robot_pedestrian_clearance(world);
    }

    ActionCommand act(const WorldState& world, const obs::ObservationFrame* frame) override {
        min_clearance_ = std::min(min_clearance_, robot_pedestrian_clearance(world));
        const std::string line =
            encode_observation({static_cast<int>(episode), world.step, frame ? *frame : observe(world), take_reward(world),
                                false, Status::Running});
        while (true) {
            send(line);
            std::optional<std::string> reply;
            try {
                reply = channel_.read_line(act_timeout_);
            } catch (const ChannelClosed&) {
                closed_ = true;
                throw;
            } catch (const ProtocolError& e) {
                ++rejected_;
                send_error(e.code(), e.what(), e.offset(), false);
                continue;
            }
            if (!reply) {
                send_error("timeout", fmt::format("no act within {} ms; episode aborted", act_timeout_.count()),
                           std::nullopt, false);
                throw ControllerAborted("act timeout");
            }
            try {
                const std::string type = message_type(*reply);
                if (type == "act") {
                    const ActionCommand a = decode_action(*reply, world.params.action_mode);
                    if (a.beep) ++beep_steps_;
                    return a;
                }
                if (type == "reset") {
                    reject_unknown(parse_line(*reply), {"type"});
                    throw ControllerAborted("reset requested");
                }
                if (type == "hello" || type == "obs" || type == "result" || type == "error") {
                    throw ProtocolError("unexpected", fmt::format("'{}' is not valid while an act is pending", type));
                }
                throw ProtocolError("unknown_type", fmt::format("unknown message type '{}'", type));
            } catch (const ProtocolError& e) {
                ++rejected_;
                send_error(e.code(), e.what(), e.offset(), true);
            }
        }
    }

    void end_episode(const WorldState& world, Status status) override {
        min_clearance_ = std::min(min_clearance_, robot_pedestrian_clearance(world));
        if (status == Status::Aborted || closed_) return;
        try {
            send(encode_observation(
                {static_cast<int>(episode), world.step, observe(world), take_reward(world), true, status}));
        } catch (const ChannelClosed&) {
        }
    }

    /// Result of the episode as this role observed it (for the reverse-connect
    /// controller, which has no access to the engine's EpisodeResult).
    EpisodeResult observed_result(const WorldState& world, Status status) const {
        EpisodeResult r;
        r.status = status;
        r.steps = world.step - start_step_;
        r.beep_steps = beep_steps_;
        r.min_surface_distance = min_clearance_;
        r.final_goal_distance = goal_distance(world);
        return r;
    }

    std::size_t episode = 0;

private:
    double take_reward(const WorldState& world) {
        const double d = goal_distance(world);
        const double r = last_goal_distance_ - d;
        last_goal_distance_ = d;
        return r;
    }

    LineChannel& channel_;
    std::chrono::milliseconds act_timeout_;
    bool closed_ = false;
    std::size_t rejected_ = 0;
    int start_step_ = 0;
    double last_goal_distance_ = 0.0;
    int beep_steps_ = 0;
    double min_clearance_ = kInfiniteDistance;
};

}  // namespace

// ---------------------------------------------------------------------------
// Messages

std::string message_type(std::string_view line) {
    const json j = parse_line(line);
    if (!j.is_object()) throw ProtocolError("malformed", "message must be a JSON object", 0);
    const auto it = j.find("type");
    if (it == j.end() || !it->is_string()) throw ProtocolError("malformed", "message needs a string 'type'");
    return it->get<std::string>();
}

std::string encode_observation(const ObservationMessage& m) {
    const int n = m.frame.size;
    if (m.frame.grid.size() != static_cast<std::size_t>(n) * n ||
        m.frame.ped_maps.size() != static_cast<std::size_t>(obs::kPedChannels) * n * n) {
        throw ValidationError("observation frame arrays disagree with its size");
    }
    ojson j;
    j["type"] = "obs";
    j["episode"] = m.episode;
    j["step"] = m.step;
    j["grid"] = {{"shape", {n, n}}, {"data", encode_floats(m.frame.grid)}};
    j["ped_maps"] = {{"shape", {obs::kPedChannels, n, n}}, {"data", encode_floats(m.frame.ped_maps)}};
    j["goal"] = {m.frame.goal_distance, m.frame.heading_error};
    j["reward"] = m.reward;
    j["reward_version"] = kRewardVersion;
    j["done"] = m.done;
    j["status"] = std::string(to_string(m.status));
    return j.dump();
}

ObservationMessage decode_observation(std::string_view line) {
    const json j = parse_line(line);
    if (!j.is_object() || j.value("type", "") != "obs") throw ProtocolError("malformed", "not an obs message");
    reject_unknown(j, {"type", "episode", "step", "grid", "ped_maps", "goal", "reward", "reward_version", "done", "status"});
    ObservationMessage m;
    m.episode = integer_field(j, "episode");
    m.step = integer_field(j, "step");
    if (!j.contains("grid")) throw ProtocolError("malformed", "missing field 'grid'");
    const std::vector<int> gshape = shape_of(j["grid"], "grid");
    if (gshape.size() != 2 || gshape[0] != gshape[1]) throw ProtocolError("malformed", "grid.shape must be [n, n]");
    const int n = gshape[0];
    m.frame.size = n;
    m.frame.grid = array_payload(j["grid"], "grid", {n, n});
    if (!j.contains("ped_maps")) throw ProtocolError("malformed", "missing field 'ped_maps'");
    m.frame.ped_maps = array_payload(j["ped_maps"], "ped_maps", {obs::kPedChannels, n, n});
    const auto goal = j.find("goal");
    if (goal == j.end() || !goal->is_array() || goal->size() != 2 || !(*goal)[0].is_number() || !(*goal)[1].is_number()) {
        throw ProtocolError("malformed", "goal must be [distance, heading_error]");
    }
    m.frame.goal_distance = (*goal)[0].get<double>();
    m.frame.heading_error = (*goal)[1].get<double>();
    if (!std::isfinite(m.frame.goal_distance) || !std::isfinite(m.frame.heading_error)) {
        throw ProtocolError("malformed", "goal must be finite");
    }
    m.reward = finite_number(j, "reward");
    if (j.value("reward_version", "") != kRewardVersion) throw ProtocolError("malformed", "unsupported reward_version");
    m.done = bool_field(j, "done");
    if (!j.contains("status") || !j["status"].is_string()) throw ProtocolError("malformed", "status must be a string");
    try {
        m.status = parse_status(j["status"].get<std::string>());
    } catch (const ValidationError& e) {
        throw ProtocolError("malformed", e.what());
    }
    return m;
}

std::string encode_action(const ActionCommand& a) {
    ojson j;
    j["type"] = "act";
    j["v"] = a.v;
    j["w"] = a.omega;
    j["beep"] = a.beep;
    return j.dump();
}

ActionCommand decode_action(std::string_view line, ActionMode mode) {
    const json j = parse_line(line);
    if (!j.is_object() || j.value("type", "") != "act") throw ProtocolError("malformed", "not an act message");
    reject_unknown(j, {"type", "v", "w", "beep"});
    ActionCommand a;
    a.v = finite_number(j, "v");
    a.omega = finite_number(j, "w");
    if (j.contains("beep")) a.beep = bool_field(j, "beep");
    try {
        return validate_action(a, mode);
    } catch (const ValidationError& e) {
        throw ProtocolError("invalid_action", e.what());
    }
}

// ---------------------------------------------------------------------------
// Transport

FdChannel::FdChannel(int read_fd, int write_fd, bool owns) : read_fd_(read_fd), write_fd_(write_fd), owns_(owns) {}

FdChannel::~FdChannel() {
    if (owns_) {
        ::close(read_fd_);
        if (write_fd_ != read_fd_) ::close(write_fd_);
    }
}

std::optional<std::string> FdChannel::read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
        const std::size_t pos = buffer_.find('\n');
        if (pos != std::string::npos || (eof_ && !buffer_.empty())) {
            const std::size_t len = pos == std::string::npos ? buffer_.size() : pos;
            std::string line = buffer_.substr(0, len);
            line_offset_ = consumed_;
            const std::size_t used = pos == std::string::npos ? len : len + 1;
            consumed_ += used;
            buffer_.erase(0, used);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (eof_) throw ChannelClosed();
        if (buffer_.size() > kMaxLineBytes) {
            line_offset_ = consumed_;
            consumed_ += buffer_.size();
            buffer_.clear();
            throw ProtocolError("malformed", fmt::format("line longer than {} bytes", kMaxLineBytes));
        }
        const auto remaining =
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) return std::nullopt;
        pollfd p{read_fd_, POLLIN, 0};
        const int r = ::poll(&p, 1, static_cast<int>(std::min<long long>(remaining.count(), 1 << 30)));
        if (r < 0) {
            if (errno == EINTR) continue;
            eof_ = true;
            continue;
        }
        if (r == 0) return std::nullopt;
        char chunk[65536];
        const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
        if (n > 0) {
            buffer_.append(chunk, static_cast<std::size_t>(n));
        } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
            eof_ = true;
        }
    }
}

void FdChannel::write_line(std::string_view line) {
    std::string data(line);
    data += '\n';
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::send(write_fd_, data.data() + done, data.size() - done, MSG_NOSIGNAL);
        if (n < 0 && errno == ENOTSOCK) n = ::write(write_fd_, data.data() + done, data.size() - done);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ChannelClosed();
        }
        done += static_cast<std::size_t>(n);
    }
}

Endpoint parse_endpoint(std::string_view text) {
    Endpoint e;
    std::string_view port = text;
    const std::size_t colon = text.rfind(':');
    if (colon != std::string_view::npos) {
        if (colon > 0) e.host = std::string(text.substr(0, colon));
        port = text.substr(colon + 1);
    }
    int value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (port.empty() || ec != std::errc() || ptr != port.data() + port.size() || value < 0 || value > 65535) {
        throw ValidationError(fmt::format("bad endpoint '{}', expected host:port", text));
    }
    e.port = value;
    return e;
}

namespace {

struct AddrInfo {
    addrinfo* head = nullptr;
    ~AddrInfo() {
        if (head != nullptr) freeaddrinfo(head);
    }
};

AddrInfo resolve(const Endpoint& e, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    AddrInfo info;
    const std::string port = std::to_string(e.port);
    const int rc = getaddrinfo(e.host.empty() ? nullptr : e.host.c_str(), port.c_str(), &hints, &info.head);
    if (rc != 0) throw Error(fmt::format("cannot resolve {}:{}: {}", e.host, e.port, gai_strerror(rc)));
    return info;
}

}  // namespace

int tcp_listen(const Endpoint& e) {
    const AddrInfo info = resolve(e, true);
    for (addrinfo* a = info.head; a != nullptr; a = a->ai_next) {
        const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
        if (fd < 0) continue;
        const int one = 1;
        ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 16) == 0) return fd;
        ::close(fd);
    }
    throw Error(fmt::format("cannot listen on {}:{}: {}", e.host, e.port, std::strerror(errno)));
}

int bound_port(int listen_fd) {
    sockaddr_storage addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(listen_fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw Error(fmt::format("getsockname: {}", std::strerror(errno)));
    }
    if (addr.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    return ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
}

int tcp_connect(const Endpoint& e) {
    const AddrInfo info = resolve(e, false);
    for (addrinfo* a = info.head; a != nullptr; a = a->ai_next) {
        const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) return fd;
        ::close(fd);
    }
    throw Error(fmt::format("cannot connect to {}:{}: {}", e.host, e.port, std::strerror(errno)));
}

std::pair<int, int> socket_pair() {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) throw Error(fmt::format("socketpair: {}", std::strerror(errno)));
    return {fds[0], fds[1]};
}

// ---------------------------------------------------------------------------
// Server

SessionSummary serve_session(LineChannel& channel, const ServeOptions& options) {
    if (!options.scenarios) throw ValidationError("serve needs a scenario source");
    if (options.episode_budget < 1) throw ValidationError("episode budget must be >= 1");
    SessionSummary summary;
    ServerRole role(channel, options.act_timeout);
    const Scenario first = options.scenarios(0);
    summary.handshake = role.handshake(first.params, options.episode_budget, options.hello_timeout);
    if (!summary.handshake) {
        summary.disconnected = role.closed();
        summary.rejected_messages = role.rejected();
        return summary;
    }
    NoBeepPolicy no_beep;
    try {
        for (std::size_t e = 0; e < options.episode_budget; ++e) {
            role.episode = e;
            const Scenario scenario = e == 0 ? first : options.scenarios(e);
            const EpisodeResult result =
                run_from(make_world(scenario), role, no_beep, derive_seed(options.seed, e), false);
            summary.results.push_back(result);
            if (role.closed()) throw ChannelClosed();
            role.send(encode_result(e, result));
        }
        summary.rejected_messages = role.rejected();
        role.send(encode_summary(summary));
    } catch (const ChannelClosed&) {
        summary.disconnected = true;
    }
    summary.rejected_messages = role.rejected();
    return summary;
}

void serve_tcp(int listen_fd, const ServeOptions& options, std::size_t max_sessions, const std::atomic<bool>* stop,
               const std::function<void(const SessionSummary&)>& on_session) {
    std::vector<std::thread> sessions;
    std::mutex callback_mutex;
    std::size_t accepted = 0;
    while ((max_sessions == 0 || accepted < max_sessions) && !(stop != nullptr && stop->load())) {
        pollfd p{listen_fd, POLLIN, 0};
        const int r = ::poll(&p, 1, 200);
        if (r <= 0) continue;
        const int fd = ::accept(listen_fd, nullptr, nullptr);
        if (fd < 0) continue;
        ++accepted;
        sessions.emplace_back([fd, &options, &on_session, &callback_mutex] {
            FdChannel channel(fd, fd, true);
            SessionSummary s;
            try {
                s = serve_session(channel, options);
            } catch (const std::exception&) {
                s.disconnected = true;
            }
            if (on_session) {
                const std::lock_guard lock(callback_mutex);
                on_session(s);
            }
        });
    }
    for (std::thread& t : sessions) t.join();
}

// ---------------------------------------------------------------------------
// Reverse-connect controller

struct BridgeController::Impl {
    std::unique_ptr<FdChannel> channel;
    std::unique_ptr<ServerRole> role;
    std::size_t episodes = 0;
};

BridgeController::BridgeController(Endpoint endpoint, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout), impl_(std::make_unique<Impl>()) {}

BridgeController::~BridgeController() = default;

void BridgeController::begin_episode(const WorldState& world, std::uint64_t seed) {
    int fd = -1;
    try {
        fd = tcp_connect(endpoint_);
    } catch (const Error& e) {
        throw ControllerAborted(e.what());
    }
    impl_->channel = std::make_unique<FdChannel>(fd, fd, true);
    impl_->role = std::make_unique<ServerRole>(*impl_->channel, timeout_);
    if (!impl_->role->handshake(world.params, 1, timeout_)) throw ControllerAborted("bridge handshake failed");
    impl_->role->episode = 0;
    impl_->role->begin_episode(world, seed);
}

ActionCommand BridgeController::act(const WorldState& world, const obs::ObservationFrame* frame) {
    if (!impl_->role) throw ControllerAborted("bridge not connected");
    return impl_->role->act(world, frame);
}

void BridgeController::end_episode(const WorldState& world, Status status) {
    if (!impl_->role) return;
    impl_->role->end_episode(world, status);
    try {
        SessionSummary s;
        s.results.push_back(impl_->role->observed_result(world, status));
        s.rejected_messages = impl_->role->rejected();
        impl_->role->send(encode_result(0, s.results.back()));
        impl_->role->send(encode_summary(s));
    } catch (const ChannelClosed&) {
    }
    impl_->role.reset();
    impl_->channel.reset();
}

// ---------------------------------------------------------------------------
// Client

std::string Client::hello(int version) {
    channel_.write_line(fmt::format(R"({{"type":"hello","version":{}}})", version));
    return receive();
}

void Client::act(const ActionCommand& action) { channel_.write_line(encode_action(action)); }

void Client::reset() { channel_.write_line(R"({"type":"reset"})"); }

void Client::send_raw(std::string_view line) { channel_.write_line(line); }

std::string Client::receive() {
    std::optional<std::string> line = channel_.read_line(timeout_);
    if (!line) throw ProtocolError("timeout", "no message from the server");
    return *line;
}

}  // namespace socnav::bridge

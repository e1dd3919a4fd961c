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

/// Line-delimited JSON step protocol (version 1). See docs/protocol.md.
///
/// client -> server: hello, act, reset
/// server -> client: hello, obs, result, error
///
/// The server never advances the simulation on a rejected message; it answers
/// with an error and re-sends the pending obs.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "socnav/engine.hpp"
#include "socnav/error.hpp"

namespace socnav::bridge {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::string_view kRewardVersion = "progress-v1";
inline constexpr std::chrono::milliseconds kDefaultActTimeout{10000};
/// Longest accepted line, bytes.
inline constexpr std::size_t kMaxLineBytes = std::size_t{1} << 24;

/// A protocol message was rejected. `code` is the wire error code.
class ProtocolError : public Error {
public:
    ProtocolError(std::string code, const std::string& message, std::optional<std::size_t> offset = std::nullopt)
        : Error(message), code_(std::move(code)), offset_(offset) {}
    const std::string& code() const noexcept { return code_; }
    std::optional<std::size_t> offset() const noexcept { return offset_; }

private:
    std::string code_;
    std::optional<std::size_t> offset_;
};

/// The peer closed the connection.
class ChannelClosed : public ControllerAborted {
public:
    ChannelClosed() : ControllerAborted("connection closed") {}
};

// ---------------------------------------------------------------------------
// Messages

struct ObservationMessage {
    int episode = 0;
    int step = 0;
    obs::ObservationFrame frame;
    double reward = 0.0;
    bool done = false;
    Status status = Status::Running;

    bool operator==(const ObservationMessage&) const = default;
};

std::string encode_observation(const ObservationMessage& message);
/// Throws ProtocolError on malformed lines, unknown fields, shape mismatch or
/// non-finite values.
ObservationMessage decode_observation(std::string_view line);

std::string encode_action(const ActionCommand& action);
/// Reads an `act` line and validates it against `mode`. Throws ProtocolError
/// (code "malformed" | "invalid_action").
ActionCommand decode_action(std::string_view line, ActionMode mode);

/// Message type of a line ("hello", "act", ...). Throws ProtocolError on
/// malformed JSON or a missing type; the offset is the byte within the line.
std::string message_type(std::string_view line);

// ---------------------------------------------------------------------------
// Transport

class LineChannel {
public:
    virtual ~LineChannel() = default;
    /// Next line without its terminator; nullopt on timeout. Throws
    /// ChannelClosed at end of stream.
    virtual std::optional<std::string> read_line(std::chrono::milliseconds timeout) = 0;
    /// Throws ChannelClosed when the peer is gone.
    virtual void write_line(std::string_view line) = 0;
    /// Stream offset of the first byte of the last line returned.
    virtual std::size_t last_line_offset() const = 0;
};

/// Buffered line channel over POSIX descriptors (pipes, sockets).
class FdChannel : public LineChannel {
public:
    FdChannel(int read_fd, int write_fd, bool owns = false);
    ~FdChannel() override;
    FdChannel(const FdChannel&) = delete;
    FdChannel& operator=(const FdChannel&) = delete;

    std::optional<std::string> read_line(std::chrono::milliseconds timeout) override;
    void write_line(std::string_view line) override;
    std::size_t last_line_offset() const override { return line_offset_; }

private:
    int read_fd_;
    int write_fd_;
    bool owns_;
    std::string buffer_;
    std::size_t consumed_ = 0;
    std::size_t line_offset_ = 0;
    bool eof_ = false;
};

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 0;
};

/// "host:port" or ":port" / "port" (host 127.0.0.1). Throws ValidationError.
Endpoint parse_endpoint(std::string_view text);

/// Listening TCP socket; `port` 0 picks a free port (read it back with bound_port).
int tcp_listen(const Endpoint& endpoint);
int bound_port(int listen_fd);
int tcp_connect(const Endpoint& endpoint);
/// Connected pair of stream sockets, for tests and in-process clients.
std::pair<int, int> socket_pair();

// ---------------------------------------------------------------------------
// Server

struct ServeOptions {
    /// Scenario of the n-th episode of a session.
    std::function<Scenario(std::size_t episode)> scenarios;
    std::size_t episode_budget = 1;
    std::chrono::milliseconds act_timeout = kDefaultActTimeout;
    std::chrono::milliseconds hello_timeout = kDefaultActTimeout;
    std::uint64_t seed = 0;
};

struct SessionSummary {
    bool handshake = false;
    bool disconnected = false;
    std::vector<EpisodeResult> results;
    std::size_t rejected_messages = 0;
};

/// Serves one session over `channel`: handshake, episode_budget episodes,
/// session summary. Returns early when the client disconnects.
SessionSummary serve_session(LineChannel& channel, const ServeOptions& options);

/// Accepts connections on `listen_fd`, one thread and engine per session.
/// Stops after `max_sessions` sessions (0 = until `stop` is set).
void serve_tcp(int listen_fd, const ServeOptions& options, std::size_t max_sessions,
               const std::atomic<bool>* stop = nullptr,
               const std::function<void(const SessionSummary&)>& on_session = {});

/// Navigation controller whose commands come from an external policy: the
/// process at `endpoint` is connected to per episode and spoken to in the
/// server role (it sends hello, receives obs, answers act).
class BridgeController : public NavigationController {
public:
    explicit BridgeController(Endpoint endpoint, std::chrono::milliseconds timeout = kDefaultActTimeout);
    ~BridgeController() override;

    void begin_episode(const WorldState& world, std::uint64_t seed) override;
    ActionCommand act(const WorldState& world, const obs::ObservationFrame* frame) override;
    void end_episode(const WorldState& world, Status status) override;
    bool needs_observation() const override { return true; }

private:
    struct Impl;
    Endpoint endpoint_;
    std::chrono::milliseconds timeout_;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Client helper

/// Thin client over a LineChannel, as used by tests and example scripts.
class Client {
public:
    explicit Client(LineChannel& channel, std::chrono::milliseconds timeout = std::chrono::milliseconds(30000))
        : channel_(channel), timeout_(timeout) {}

    /// Sends hello and returns the server's hello line.
    std::string hello(int version = kProtocolVersion);
    void act(const ActionCommand& action);
    void reset();
    void send_raw(std::string_view line);
    /// Next server line. Throws ProtocolError("timeout") when none arrives.
    std::string receive();

private:
    LineChannel& channel_;
    std::chrono::milliseconds timeout_;
};

}  // namespace socnav::bridge

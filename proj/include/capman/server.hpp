#pragma once

#include "capman/baselines.hpp"
#include "capman/bench.hpp"
#include "capman/ca.hpp"
#include "capman/engine.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace capman::server {

using json = nlohmann::json;

inline constexpr int kWireVersion = 1;

enum class Mode { Human, WatchAi };
std::string_view to_string(Mode m) noexcept;
Mode parse_mode(std::string_view s);

struct SessionConfig {
    int tick_ms = 150;
    Mode mode = Mode::Human;
    std::string ai_spec = "ca";
    std::string ghosts = "random";
    bool overlay = false;
    int overlay_updates = 17;
    std::uint64_t base_seed = 0;
    GameConfig game;

    void validate() const;
};

struct ServerConfig {
    std::string host = "127.0.0.1";
    unsigned short port = 8080;
    std::filesystem::path ui_dir = "webui";
    std::filesystem::path results_path = "human.csv";
    SessionConfig session;
};

class BindError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A client frame the session cannot accept; the connection is closed with `what()` as reason.
class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Appends finished human games to one CSV; shared by all sessions of a server.
class ResultsSink {
public:
    explicit ResultsSink(std::filesystem::path path);
    void append(const bench::HumanRow& row);
    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::mutex mu_;
    std::filesystem::path path_;
};

json state_frame(const GameState& s, std::span<const Event> events, const ca::CAGrid* overlay);
json hello_frame(const Maze& maze, const SessionConfig& cfg);
json error_frame(std::string_view reason);

/// One connection's game, free of any networking: feed it client text frames
/// and clock ticks, send back whatever frames it returns.
class Session {
public:
    Session(std::shared_ptr<const Maze> maze, SessionConfig cfg, ResultsSink* sink = nullptr);

    json hello() const;
    json current_state() const;

    /// Throws ProtocolError on anything malformed.
    std::vector<json> on_text(std::string_view text);
    /// Plays one tick if running; the state frame, plus an over frame at the end.
    std::vector<json> on_tick();

    bool running() const noexcept { return running_; }
    bool over() const { return runner_->over(); }
    const GameState& state() const { return runner_->state(); }
    int game_index() const noexcept { return game_index_; }
    const std::string& participant() const noexcept { return participant_; }
    const std::shared_ptr<HumanInputQueue>& queue() const noexcept { return queue_; }

private:
    void new_game();
    json over_frame(bool recorded) const;

    std::shared_ptr<const Maze> maze_;
    SessionConfig cfg_;
    ResultsSink* sink_;
    std::shared_ptr<HumanInputQueue> queue_;
    std::unique_ptr<PacmanController> pacman_;
    std::unique_ptr<GhostTeamController> ghosts_;
    std::unique_ptr<ca::CaPacman> overlay_;
    std::optional<GameRunner> runner_;
    int game_index_ = -1;
    bool running_ = false;
    std::string participant_ = "anonymous";
};

/// WebSocket `/session` plus static files from ui_dir at `/`.
class Server {
public:
    Server(std::shared_ptr<const Maze> maze, ServerConfig cfg);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    unsigned short port() const noexcept;
    /// Blocks until stop(), or SIGINT/SIGTERM when asked.
    void run(bool stop_on_signals = false);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

int run_server(std::shared_ptr<const Maze> maze, const ServerConfig& cfg);

}  // namespace capman::server

#pragma once

#include "capman/maze.hpp"
#include "capman/rng.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace capman {

struct GameConfig {
    int lives0 = 3;
    int pill_score = 10;
    int powerpill_score = 50;
    int ghost_score_base = 200;
    int ghost_score_cap = 1600;
    int edible_ticks = 120;
    int lair_ticks = 40;
    int max_ticks_per_level = 3000;
    int max_levels = 16;
    int ghost_count = 4;

    void validate() const;
    friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key=value` text, one entry per line; '#' starts a comment.
/// Unknown keys and non-positive values are rejected.
GameConfig parse_game_config(std::string_view text, GameConfig base = {});
GameConfig load_game_config(const std::filesystem::path& path);
std::string render_game_config(const GameConfig& cfg);

struct GhostState {
    int id = 0;
    Position pos;
    Direction facing = Direction::Neutral;
    int edible_remaining = 0;
    int lair_remaining = 0;

    bool in_lair() const noexcept { return lair_remaining > 0; }
    bool edible() const noexcept { return edible_remaining > 0; }
    friend bool operator==(const GhostState&, const GhostState&) = default;
};

struct GameState {
    std::shared_ptr<const Maze> maze;
    GameConfig config;
    int tick = 0;
    int level = 1;
    int level_start_tick = 0;
    int levels_cleared = 0;
    Position pacman;
    Direction pacman_facing = Direction::Neutral;
    std::vector<GhostState> ghosts;
    std::vector<std::uint8_t> pills;       // per maze cell index
    std::vector<std::uint8_t> powerpills;  // per maze cell index
    int pills_left = 0;
    int powerpills_left = 0;
    std::int64_t score = 0;
    int lives = 0;
    int ghosts_eaten_this_window = 0;
    Rng rng;
    bool over = false;
    std::uint64_t seed = 0;

    bool has_pill(int cell) const { return pills[static_cast<std::size_t>(cell)] != 0; }
    bool has_powerpill(int cell) const { return powerpills[static_cast<std::size_t>(cell)] != 0; }
    std::vector<Position> pill_positions() const;
    std::vector<Position> powerpill_positions() const;
    int pacman_cell() const { return maze->index_of(pacman); }

    friend bool operator==(const GameState& a, const GameState& b);
};

enum class EventKind { AtePill, AtePowerPill, AteGhost, LostLife, LevelCleared, GameOver, LevelTimeout };

std::string_view to_string(EventKind k) noexcept;

struct Event {
    EventKind kind;
    int ghost = -1;  // AteGhost only
    friend bool operator==(const Event&, const Event&) = default;
};

struct StepResult {
    std::vector<Event> events;
    GameState state;
};

struct GameResult {
    std::int64_t final_score = 0;
    int levels_cleared = 0;
    int ticks_survived = 0;
    std::uint64_t seed = 0;
    friend bool operator==(const GameResult&, const GameResult&) = default;
};

class SteppedFinishedGame : public std::logic_error {
public:
    SteppedFinishedGame() : std::logic_error("step() called on a finished game") {}
};

enum class Role : std::uint64_t { Pacman = 1, Ghosts = 2 };
std::string_view to_string(Role r) noexcept;

class ControllerFault : public std::runtime_error {
public:
    ControllerFault(Role role, int tick, const std::string& why);
    Role role() const noexcept { return role_; }
    int tick() const noexcept { return tick_; }

private:
    Role role_;
    int tick_;
};

class PacmanController {
public:
    virtual ~PacmanController() = default;
    /// Called once per game with a seed derived from (game seed, role).
    virtual void reset(std::uint64_t seed) { (void)seed; }
    virtual Direction decide(const GameState& state) = 0;
    virtual std::string name() const = 0;
};

class GhostTeamController {
public:
    virtual ~GhostTeamController() = default;
    virtual void reset(std::uint64_t seed) { (void)seed; }
    /// One entry per ghost, indexed by ghost id; entries for ghosts in the lair are ignored.
    virtual std::vector<Direction> decide(const GameState& state) = 0;
    virtual std::string name() const = 0;
};

GameState new_game(std::shared_ptr<const Maze> maze, const GameConfig& config, std::uint64_t seed);

struct Actor {
    int ghost = -1;  // -1 selects Pac-Man
    static constexpr Actor pacman() { return {}; }
    static constexpr Actor ghost_id(int id) { return {id}; }
    bool is_pacman() const noexcept { return ghost < 0; }
};

enum class ReversePolicy { Allow, NoReverse };

/// Directions whose target cell is walkable. With NoReverse the reversal of
/// the ghost's facing is dropped unless it is the only move.
std::vector<Direction> legal_moves(const GameState& state, Actor actor, ReversePolicy policy = ReversePolicy::Allow);

/// Advances one tick in place and returns the tick's events.
std::vector<Event> advance(GameState& state, Direction pacman_dir, std::span<const Direction> ghost_dirs);

StepResult step(const GameState& state, Direction pacman_dir, std::span<const Direction> ghost_dirs);

/// Seed handed to a controller's reset() for one game.
std::uint64_t controller_seed(std::uint64_t game_seed, Role role);

/// Runs one game tick by tick; shared by run_game and the session server so
/// both produce the same trajectory for the same seed.
class GameRunner {
public:
    GameRunner(PacmanController& pacman, GhostTeamController& ghosts, std::shared_ptr<const Maze> maze,
               const GameConfig& config, std::uint64_t seed);

    const GameState& state() const noexcept { return state_; }
    bool over() const noexcept { return state_.over; }
    const std::vector<Event>& tick();
    GameResult result() const;

private:
    PacmanController* pacman_;
    GhostTeamController* ghosts_;
    GameState state_;
    std::vector<Event> events_;
};

using TickObserver = std::function<void(const GameState& after, std::span<const Event> events)>;

GameResult run_game(PacmanController& pacman, GhostTeamController& ghosts, std::shared_ptr<const Maze> maze,
                    const GameConfig& config, std::uint64_t seed, const TickObserver& observer = {});

}  // namespace capman

#pragma once

#include "capman/engine.hpp"
#include "capman/rng.hpp"

#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace capman {

/// Ghost team that picks uniformly among all exits at junctions (reversal
/// included unless configured NoReverse), follows corridors, and reverses at
/// dead ends.
class RandomGhostTeam final : public GhostTeamController {
public:
    explicit RandomGhostTeam(std::uint64_t seed = 0, ReversePolicy policy = ReversePolicy::Allow);

    void reset(std::uint64_t seed) override { rng_ = Rng(seed); }
    std::vector<Direction> decide(const GameState& state) override;
    std::string name() const override { return "random"; }

private:
    Rng rng_;
    ReversePolicy policy_;
};

std::unique_ptr<GhostTeamController> random_ghost_team(std::uint64_t seed, ReversePolicy policy = ReversePolicy::Allow);

struct StarterConfig {
    int flee_distance = 20;
    bool chase_edible = true;

    void validate() const;
};

/// Three static rules in priority order: flee a close inedible ghost,
/// chase the nearest edible ghost, head for the nearest pill.
class StarterPacman final : public PacmanController {
public:
    explicit StarterPacman(StarterConfig cfg = {});

    Direction decide(const GameState& state) override;
    std::string name() const override { return "StarterPacMan"; }

private:
    StarterConfig cfg_;
};

std::unique_ptr<PacmanController> starter_pacman(const StarterConfig& cfg = {});

/// Direction requests from a human, latest wins. One writer, one reader.
class HumanInputQueue {
public:
    void push(Direction d, int received_tick);
    /// Removes everything pending and returns the most recent request.
    std::optional<Direction> drain();
    bool empty() const;

private:
    mutable std::mutex mu_;
    std::deque<std::pair<Direction, int>> pending_;
};

class HumanPacman final : public PacmanController {
public:
    explicit HumanPacman(std::shared_ptr<HumanInputQueue> queue);

    void reset(std::uint64_t) override { desired_ = Direction::Neutral; }
    Direction decide(const GameState& state) override;
    std::string name() const override { return "human"; }

    const std::shared_ptr<HumanInputQueue>& queue() const noexcept { return queue_; }

private:
    std::shared_ptr<HumanInputQueue> queue_;
    Direction desired_ = Direction::Neutral;
};

std::unique_ptr<PacmanController> human_pacman(std::shared_ptr<HumanInputQueue> queue);

/// A recorded human key log, `tick direction` per line, replayed through a
/// HumanPacman: entries stamped tick T are delivered before tick T's decision.
class ReplayPacman final : public PacmanController {
public:
    struct Entry {
        int tick;
        Direction dir;
    };

    explicit ReplayPacman(std::vector<Entry> log);

    void reset(std::uint64_t seed) override;
    Direction decide(const GameState& state) override;
    std::string name() const override { return "human-replay"; }

private:
    std::vector<Entry> log_;
    std::size_t next_ = 0;
    std::shared_ptr<HumanInputQueue> queue_;
    HumanPacman inner_;
};

std::vector<ReplayPacman::Entry> parse_replay_log(std::string_view text);

/// Uniformly random legal move every tick; used for engine audits.
class RandomPacman final : public PacmanController {
public:
    void reset(std::uint64_t seed) override { rng_ = Rng(seed); }
    Direction decide(const GameState& state) override;
    std::string name() const override { return "random"; }

private:
    Rng rng_;
};

}  // namespace capman

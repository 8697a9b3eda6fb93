#include "capman/baselines.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace capman {

RandomGhostTeam::RandomGhostTeam(std::uint64_t seed, ReversePolicy policy) : rng_(seed), policy_(policy) {}

std::vector<Direction> RandomGhostTeam::decide(const GameState& state) {
    const auto& maze = *state.maze;
    std::vector<Direction> out(state.ghosts.size(), Direction::Neutral);
    for (std::size_t i = 0; i < state.ghosts.size(); ++i) {
        const auto& g = state.ghosts[i];
        if (g.in_lair()) continue;
        const int cell = maze.index_of(g.pos);
        const int degree = maze.degree(cell);
        if (degree >= 3) {
            const auto moves = legal_moves(state, Actor::ghost_id(g.id), policy_);
            out[i] = moves[static_cast<std::size_t>(rng_.below(moves.size()))];
            continue;
        }
        std::array<Direction, 2> exits{};
        std::size_t n = 0;
        for (auto d : kMoveOrder) {
            if (maze.step(cell, d) != Maze::kNone) exits[n++] = d;
        }
        if (n == 1) {
            out[i] = exits[0];
        } else if (maze.step(cell, g.facing) != Maze::kNone) {
            out[i] = g.facing;
        } else if (g.facing == Direction::Neutral) {
            out[i] = exits[static_cast<std::size_t>(rng_.below(2))];
        } else {
            out[i] = exits[0] == opposite(g.facing) ? exits[1] : exits[0];
        }
    }
    return out;
}

std::unique_ptr<GhostTeamController> random_ghost_team(std::uint64_t seed, ReversePolicy policy) {
    return std::make_unique<RandomGhostTeam>(seed, policy);
}

void StarterConfig::validate() const {
    if (flee_distance <= 0) throw std::invalid_argument("flee_distance must be > 0");
}

StarterPacman::StarterPacman(StarterConfig cfg) : cfg_(cfg) {
    cfg_.validate();
}

Direction StarterPacman::decide(const GameState& state) {
    const auto& maze = *state.maze;
    const int pac = maze.index_of(state.pacman);
    constexpr int kFar = std::numeric_limits<int>::max();

    // Nearest-target distance from each of Pac-Man's exits; picks the exit
    // with the best score, earlier directions winning ties.
    auto pick = [&](const std::vector<int>& targets, bool maximize) {
        Direction best = Direction::Neutral;
        int best_score = maximize ? -1 : kFar;
        for (auto d : kMoveOrder) {
            const int q = maze.step(pac, d);
            if (q == Maze::kNone) continue;
            int nearest = kFar;
            for (int t : targets) nearest = std::min(nearest, maze.distance(q, t));
            if (maximize ? nearest > best_score : nearest < best_score) {
                best_score = nearest;
                best = d;
            }
        }
        return best;
    };

    std::vector<int> threats;
    std::vector<int> prey;
    for (const auto& g : state.ghosts) {
        if (g.in_lair()) continue;
        const int c = maze.index_of(g.pos);
        if (g.edible()) {
            prey.push_back(c);
        } else if (maze.distance(pac, c) <= cfg_.flee_distance) {
            threats.push_back(c);
        }
    }
    if (!threats.empty()) return pick(threats, true);
    if (cfg_.chase_edible && !prey.empty()) return pick(prey, false);

    std::vector<int> pills;
    for (int c = 0; c < maze.cell_count(); ++c) {
        if (state.has_pill(c) || state.has_powerpill(c)) pills.push_back(c);
    }
    if (!pills.empty()) return pick(pills, false);
    return state.pacman_facing;
}

std::unique_ptr<PacmanController> starter_pacman(const StarterConfig& cfg) {
    return std::make_unique<StarterPacman>(cfg);
}

void HumanInputQueue::push(Direction d, int received_tick) {
    std::lock_guard lock(mu_);
    pending_.emplace_back(d, received_tick);
}

std::optional<Direction> HumanInputQueue::drain() {
    std::lock_guard lock(mu_);
    if (pending_.empty()) return std::nullopt;
    const auto latest = pending_.back().first;
    pending_.clear();
    return latest;
}

bool HumanInputQueue::empty() const {
    std::lock_guard lock(mu_);
    return pending_.empty();
}

HumanPacman::HumanPacman(std::shared_ptr<HumanInputQueue> queue) : queue_(std::move(queue)) {}

Direction HumanPacman::decide(const GameState& state) {
    if (auto latest = queue_->drain()) desired_ = *latest;
    const auto& maze = *state.maze;
    const int pac = maze.index_of(state.pacman);
    if (maze.step(pac, desired_) != Maze::kNone) return desired_;
    if (maze.step(pac, state.pacman_facing) != Maze::kNone) return state.pacman_facing;
    return Direction::Neutral;
}

std::unique_ptr<PacmanController> human_pacman(std::shared_ptr<HumanInputQueue> queue) {
    return std::make_unique<HumanPacman>(std::move(queue));
}

ReplayPacman::ReplayPacman(std::vector<Entry> log)
    : log_(std::move(log)), queue_(std::make_shared<HumanInputQueue>()), inner_(queue_) {
    std::stable_sort(log_.begin(), log_.end(), [](const Entry& a, const Entry& b) { return a.tick < b.tick; });
}

void ReplayPacman::reset(std::uint64_t seed) {
    next_ = 0;
    queue_->drain();
    inner_.reset(seed);
}

Direction ReplayPacman::decide(const GameState& state) {
    // The decision made at state.tick produces tick state.tick + 1.
    const int upcoming = state.tick + 1;
    while (next_ < log_.size() && log_[next_].tick <= upcoming) {
        queue_->push(log_[next_].dir, log_[next_].tick);
        ++next_;
    }
    return inner_.decide(state);
}

std::vector<ReplayPacman::Entry> parse_replay_log(std::string_view text) {
    std::vector<ReplayPacman::Entry> out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream fields(line);
        int tick = 0;
        std::string dir;
        if (!(fields >> tick >> dir)) throw std::invalid_argument("replay line " + std::to_string(lineno) + ": expected 'tick direction'");
        auto d = parse_direction(dir);
        if (!d) throw std::invalid_argument("replay line " + std::to_string(lineno) + ": unknown direction '" + dir + "'");
        out.push_back({tick, *d});
    }
    return out;
}

Direction RandomPacman::decide(const GameState& state) {
    const auto moves = legal_moves(state, Actor::pacman());
    return moves[static_cast<std::size_t>(rng_.below(moves.size()))];
}

}  // namespace capman

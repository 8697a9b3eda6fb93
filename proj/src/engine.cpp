#include "capman/engine.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace capman {

namespace {

struct ConfigField {
    std::string_view key;
    int GameConfig::*member;
};

constexpr ConfigField kConfigFields[] = {
    {"lives0", &GameConfig::lives0},
    {"pill_score", &GameConfig::pill_score},
    {"powerpill_score", &GameConfig::powerpill_score},
    {"ghost_score_base", &GameConfig::ghost_score_base},
    {"ghost_score_cap", &GameConfig::ghost_score_cap},
    {"edible_ticks", &GameConfig::edible_ticks},
    {"lair_ticks", &GameConfig::lair_ticks},
    {"max_ticks_per_level", &GameConfig::max_ticks_per_level},
    {"max_levels", &GameConfig::max_levels},
    {"ghost_count", &GameConfig::ghost_count},
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

Position ghost_start(const Maze& maze, int id) {
    const auto& starts = maze.ghost_starts();
    return starts[static_cast<std::size_t>(id) % starts.size()];
}

Position lair_cell(const Maze& maze, int id) {
    const auto& lair = maze.lair();
    if (lair.empty()) return ghost_start(maze, id);
    return maze.position_of(lair[static_cast<std::size_t>(id) % lair.size()]);
}

void reset_actors(GameState& s) {
    s.pacman = s.maze->pacman_start();
    s.pacman_facing = Direction::Left;
    for (auto& g : s.ghosts) {
        g.pos = ghost_start(*s.maze, g.id);
        g.facing = Direction::Neutral;
        g.edible_remaining = 0;
        g.lair_remaining = 0;
    }
    s.ghosts_eaten_this_window = 0;
}

void reset_board(GameState& s) {
    const auto& m = *s.maze;
    s.pills.assign(static_cast<std::size_t>(m.cell_count()), 0);
    s.powerpills.assign(static_cast<std::size_t>(m.cell_count()), 0);
    for (int c : m.pills0()) s.pills[static_cast<std::size_t>(c)] = 1;
    for (int c : m.powerpills0()) s.powerpills[static_cast<std::size_t>(c)] = 1;
    s.pills_left = static_cast<int>(m.pills0().size());
    s.powerpills_left = static_cast<int>(m.powerpills0().size());
}

bool is_legal(const Maze& maze, Position from, Direction d) {
    return maze.step(maze.index_of(from), d) != Maze::kNone;
}

Direction sanitize(const Maze& maze, Position from, Direction wanted, Direction facing) {
    if (is_legal(maze, from, wanted)) return wanted;
    if (is_legal(maze, from, facing)) return facing;
    for (auto d : kMoveOrder) {
        if (is_legal(maze, from, d)) return d;
    }
    return Direction::Neutral;
}

Position moved(const Maze& maze, Position from, Direction d) {
    return maze.position_of(maze.step(maze.index_of(from), d));
}

void advance_level(GameState& s) {
    s.level += 1;
    s.level_start_tick = s.tick;
    reset_board(s);
    reset_actors(s);
}

}  // namespace

void GameConfig::validate() const {
    for (const auto& f : kConfigFields) {
        if (this->*f.member <= 0) throw ConfigError("config value '" + std::string(f.key) + "' must be > 0");
    }
}

GameConfig parse_game_config(std::string_view text, GameConfig cfg) {
    std::size_t lineno = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto* field = std::find_if(std::begin(kConfigFields), std::end(kConfigFields),
                                         [&](const ConfigField& f) { return f.key == key; });
        if (field == std::end(kConfigFields)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + std::string(key) + "'");
        int parsed = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), parsed);
        if (ec != std::errc{} || ptr != value.data() + value.size()) {
            throw ConfigError("line " + std::to_string(lineno) + ": '" + std::string(key) + "' is not an integer");
        }
        cfg.*(field->member) = parsed;
    }
    cfg.validate();
    return cfg;
}

GameConfig load_game_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_game_config(buf.str());
}

std::string render_game_config(const GameConfig& cfg) {
    std::string out;
    for (const auto& f : kConfigFields) out += std::string(f.key) + "=" + std::to_string(cfg.*f.member) + "\n";
    return out;
}

std::vector<Position> GameState::pill_positions() const {
    std::vector<Position> out;
    for (int c = 0; c < maze->cell_count(); ++c) {
        if (has_pill(c)) out.push_back(maze->position_of(c));
    }
    return out;
}

std::vector<Position> GameState::powerpill_positions() const {
    std::vector<Position> out;
    for (int c = 0; c < maze->cell_count(); ++c) {
        if (has_powerpill(c)) out.push_back(maze->position_of(c));
    }
    return out;
}

bool operator==(const GameState& a, const GameState& b) {
    return a.maze == b.maze && a.config == b.config && a.tick == b.tick && a.level == b.level &&
           a.level_start_tick == b.level_start_tick && a.levels_cleared == b.levels_cleared && a.pacman == b.pacman &&
           a.pacman_facing == b.pacman_facing && a.ghosts == b.ghosts && a.pills == b.pills && a.powerpills == b.powerpills &&
           a.score == b.score && a.lives == b.lives && a.ghosts_eaten_this_window == b.ghosts_eaten_this_window &&
           a.rng == b.rng && a.over == b.over && a.seed == b.seed;
}

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
        case EventKind::AtePill: return "AtePill";
        case EventKind::AtePowerPill: return "AtePowerPill";
        case EventKind::AteGhost: return "AteGhost";
        case EventKind::LostLife: return "LostLife";
        case EventKind::LevelCleared: return "LevelCleared";
        case EventKind::GameOver: return "GameOver";
        case EventKind::LevelTimeout: return "LevelTimeout";
    }
    return "?";
}

std::string_view to_string(Role r) noexcept {
    return r == Role::Pacman ? "pacman" : "ghosts";
}

ControllerFault::ControllerFault(Role role, int tick, const std::string& why)
    : std::runtime_error(std::string(to_string(role)) + " controller failed at tick " + std::to_string(tick) + ": " + why),
      role_(role),
      tick_(tick) {}

GameState new_game(std::shared_ptr<const Maze> maze, const GameConfig& config, std::uint64_t seed) {
    config.validate();
    GameState s;
    s.maze = std::move(maze);
    s.config = config;
    s.lives = config.lives0;
    s.seed = seed;
    s.rng = Rng(seed);
    s.ghosts.resize(static_cast<std::size_t>(config.ghost_count));
    for (int i = 0; i < config.ghost_count; ++i) s.ghosts[static_cast<std::size_t>(i)].id = i;
    reset_board(s);
    reset_actors(s);
    return s;
}

std::vector<Direction> legal_moves(const GameState& state, Actor actor, ReversePolicy policy) {
    const auto& maze = *state.maze;
    const Position from = actor.is_pacman() ? state.pacman : state.ghosts.at(static_cast<std::size_t>(actor.ghost)).pos;
    std::vector<Direction> moves;
    for (auto d : kMoveOrder) {
        if (is_legal(maze, from, d)) moves.push_back(d);
    }
    if (!actor.is_pacman() && policy == ReversePolicy::NoReverse && moves.size() > 1) {
        const auto back = opposite(state.ghosts[static_cast<std::size_t>(actor.ghost)].facing);
        std::erase(moves, back);
    }
    return moves;
}

std::vector<Event> advance(GameState& s, Direction pacman_dir, std::span<const Direction> ghost_dirs) {
    if (s.over) throw SteppedFinishedGame();
    const auto& maze = *s.maze;
    const auto& cfg = s.config;
    std::vector<Event> events;
    s.tick += 1;

    // (1)+(2) Pac-Man
    const Position pac_from = s.pacman;
    const Direction pd = sanitize(maze, pac_from, pacman_dir, s.pacman_facing);
    if (pd != Direction::Neutral) {
        s.pacman = moved(maze, pac_from, pd);
        s.pacman_facing = pd;
    }

    // (3) ghosts
    std::vector<Position> ghost_from(s.ghosts.size());
    for (std::size_t i = 0; i < s.ghosts.size(); ++i) {
        auto& g = s.ghosts[i];
        ghost_from[i] = g.pos;
        if (g.in_lair()) {
            g.lair_remaining -= 1;
            continue;
        }
        const Direction wanted = i < ghost_dirs.size() ? ghost_dirs[i] : Direction::Neutral;
        const Direction gd = sanitize(maze, g.pos, wanted, g.facing);
        if (gd != Direction::Neutral) {
            g.pos = moved(maze, g.pos, gd);
            g.facing = gd;
        }
        if (g.edible_remaining > 0) g.edible_remaining -= 1;
    }

    // (4) collisions, resolved in ghost id order
    bool lost_life = false;
    for (std::size_t i = 0; i < s.ghosts.size(); ++i) {
        auto& g = s.ghosts[i];
        if (g.in_lair()) continue;
        const bool same_cell = g.pos == s.pacman;
        const bool swapped = g.pos == pac_from && ghost_from[i] == s.pacman;
        if (!same_cell && !swapped) continue;
        if (g.edible()) {
            s.score += std::min<std::int64_t>(static_cast<std::int64_t>(cfg.ghost_score_base) << s.ghosts_eaten_this_window,
                                              cfg.ghost_score_cap);
            s.ghosts_eaten_this_window = std::min(s.ghosts_eaten_this_window + 1, 30);
            g.edible_remaining = 0;
            g.lair_remaining = cfg.lair_ticks;
            g.pos = lair_cell(maze, g.id);
            g.facing = Direction::Neutral;
            events.push_back({EventKind::AteGhost, g.id});
        } else {
            lost_life = true;
            break;
        }
    }
    if (lost_life) {
        s.lives -= 1;
        events.push_back({EventKind::LostLife});
        reset_actors(s);
    } else {
        // (5) consumption
        const int cell = maze.index_of(s.pacman);
        if (s.has_pill(cell)) {
            s.pills[static_cast<std::size_t>(cell)] = 0;
            s.pills_left -= 1;
            s.score += cfg.pill_score;
            events.push_back({EventKind::AtePill});
        } else if (s.has_powerpill(cell)) {
            s.powerpills[static_cast<std::size_t>(cell)] = 0;
            s.powerpills_left -= 1;
            s.score += cfg.powerpill_score;
            s.ghosts_eaten_this_window = 0;
            for (auto& g : s.ghosts) {
                if (!g.in_lair()) g.edible_remaining = cfg.edible_ticks;
            }
            events.push_back({EventKind::AtePowerPill});
        }
        // (6) level cleared
        if (s.pills_left == 0 && s.powerpills_left == 0) {
            s.levels_cleared += 1;
            events.push_back({EventKind::LevelCleared});
            advance_level(s);
        }
    }

    // (7) level timeout
    if (s.tick - s.level_start_tick >= cfg.max_ticks_per_level) {
        events.push_back({EventKind::LevelTimeout});
        advance_level(s);
    }

    // (8)
    if (s.lives <= 0 || s.level > cfg.max_levels) {
        s.over = true;
        events.push_back({EventKind::GameOver});
    }
    return events;
}

StepResult step(const GameState& state, Direction pacman_dir, std::span<const Direction> ghost_dirs) {
    StepResult r{{}, state};
    r.events = advance(r.state, pacman_dir, ghost_dirs);
    return r;
}

std::uint64_t controller_seed(std::uint64_t game_seed, Role role) {
    Rng mix(game_seed, static_cast<std::uint64_t>(role));
    return mix.next();
}

GameRunner::GameRunner(PacmanController& pacman, GhostTeamController& ghosts, std::shared_ptr<const Maze> maze,
                       const GameConfig& config, std::uint64_t seed)
    : pacman_(&pacman), ghosts_(&ghosts), state_(new_game(std::move(maze), config, seed)) {
    pacman_->reset(controller_seed(seed, Role::Pacman));
    ghosts_->reset(controller_seed(seed, Role::Ghosts));
}

const std::vector<Event>& GameRunner::tick() {
    Direction pd;
    std::vector<Direction> gd;
    try {
        pd = pacman_->decide(state_);
    } catch (const std::exception& e) {
        throw ControllerFault(Role::Pacman, state_.tick, e.what());
    }
    try {
        gd = ghosts_->decide(state_);
    } catch (const std::exception& e) {
        throw ControllerFault(Role::Ghosts, state_.tick, e.what());
    }
    events_ = advance(state_, pd, gd);
    return events_;
}

GameResult GameRunner::result() const {
    return {state_.score, state_.levels_cleared, state_.tick, state_.seed};
}

GameResult run_game(PacmanController& pacman, GhostTeamController& ghosts, std::shared_ptr<const Maze> maze,
                    const GameConfig& config, std::uint64_t seed, const TickObserver& observer) {
    GameRunner runner(pacman, ghosts, std::move(maze), config, seed);
    while (!runner.over()) {
        const auto& events = runner.tick();
        if (observer) observer(runner.state(), events);
    }
    return runner.result();
}

}  // namespace capman

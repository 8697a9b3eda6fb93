#include "capman/ca.hpp"

#include <algorithm>
#include <cstdio>

namespace capman::ca {

namespace {

constexpr std::size_t idx(CellValue v) { return static_cast<std::size_t>(v); }

// Pac-Man's preference over neighbour values, lower is better.
constexpr int move_rank(CellValue v) {
    switch (v) {
        case CellValue::EdibleGhost: return 0;
        case CellValue::PowerPill: return 1;
        case CellValue::Pill: return 2;
        case CellValue::Empty: return 3;
        case CellValue::Ghost: return 4;
        case CellValue::PacMan: return 5;
    }
    return 5;
}

}  // namespace

char to_char(CellValue v) noexcept {
    switch (v) {
        case CellValue::PacMan: return '@';
        case CellValue::Pill: return 'p';
        case CellValue::PowerPill: return 'P';
        case CellValue::Ghost: return 'G';
        case CellValue::EdibleGhost: return 'E';
        case CellValue::Empty: return 'e';
    }
    return '?';
}

std::optional<CellValue> value_from_char(char c) noexcept {
    for (auto v : kAllValues) {
        if (to_char(v) == c) return v;
    }
    return std::nullopt;
}

DominationTable DominationTable::standard() {
    using enum CellValue;
    DominationTable t;
    for (auto b : {Pill, PowerPill, Ghost, Empty}) t.set(EdibleGhost, b, true);
    t.set(Pill, Empty, true);
    for (auto b : {Pill, Ghost, Empty}) t.set(PowerPill, b, true);
    for (auto b : {Pill, Ghost, Empty}) t.set(Ghost, b, true);
    return t;
}

void DominationTable::set(CellValue a, CellValue b, bool on) {
    const auto bit = static_cast<std::uint8_t>(1U << static_cast<unsigned>(b));
    if (on) {
        rows_[idx(a)] |= bit;
    } else {
        rows_[idx(a)] &= static_cast<std::uint8_t>(~bit);
    }
    recompute_strength();
}

bool DominationTable::is_antisymmetric() const noexcept {
    for (auto a : kAllValues) {
        for (auto b : kAllValues) {
            if (a != b && dominates(a, b) && dominates(b, a)) return false;
        }
    }
    return true;
}

void DominationTable::recompute_strength() noexcept {
    for (auto a : kAllValues) {
        int beaten = 0;
        for (auto b : kAllValues) {
            if (a != b && dominates(a, b) && !dominates(b, a)) ++beaten;
        }
        strength_[idx(a)] = beaten;
    }
}

void CAParams::validate() const {
    if (updates_n < 0) throw std::invalid_argument("updates_n must be >= 0");
    if (!(decay_keep > 0.0 && decay_keep < 1.0)) throw std::invalid_argument("decay_keep must lie in (0, 1)");
    if (jitter_scale < 0.0 || jitter_half_range < 0.0) throw std::invalid_argument("jitter parameters must be >= 0");
    if (decay_keep - jitter_scale * jitter_half_range <= 0.0 || decay_keep + jitter_scale * jitter_half_range >= 1.0) {
        throw std::invalid_argument("jitter bound must keep each decay step inside (0, 1)");
    }
}

double jitter_draw(std::uint64_t pass_key, int from, int to, double half_range) noexcept {
    // splitmix64 finalizer over (key, proposal id)
    const auto id = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(from)) << 32) | static_cast<std::uint32_t>(to);
    std::uint64_t z = pass_key + (id + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    const double unit = static_cast<double>(z >> 11) * 0x1.0p-53;
    return (2.0 * unit - 1.0) * half_range;
}

double decay_step(double pd, double r, const CAParams& params) noexcept {
    if (!params.decay) return pd;
    return pd * params.decay_keep + r * (pd * params.jitter_scale);
}

CAGrid::CAGrid(std::shared_ptr<const Maze> maze) : maze_(std::move(maze)) {
    cells_.resize(static_cast<std::size_t>(maze_->cell_count()));
}

const CACell& CAGrid::at(Position p) const {
    const int i = maze_->index_of(p);
    if (i == Maze::kNone) throw MazeError(MazeErrorKind::NotWalkable, "not walkable: " + to_string(p), p);
    return cell(i);
}

void CAGrid::set_pacman(int c) {
    if (pacman_cell_ != Maze::kNone) cell(pacman_cell_) = CACell{};
    pacman_cell_ = c;
    cell(c) = CACell{CellValue::PacMan, 1.0, false};
}

void CAGrid::set_source(int c, CellValue v) {
    cell(c) = CACell{v, 1.0, true};
}

void CAGrid::clear() {
    std::fill(cells_.begin(), cells_.end(), CACell{});
    pacman_cell_ = Maze::kNone;
}

std::string CAGrid::dump_values() const {
    std::string out;
    for (int r = 0; r < maze_->height(); ++r) {
        for (int c = 0; c < maze_->width(); ++c) {
            const int i = maze_->index_of({c, r});
            out += i == Maze::kNone ? '#' : to_char(cell(i).value);
        }
        out += '\n';
    }
    return out;
}

std::string CAGrid::dump_decays() const {
    std::string out;
    char buf[32];
    for (int r = 0; r < maze_->height(); ++r) {
        for (int c = 0; c < maze_->width(); ++c) {
            if (c > 0) out += ' ';
            const int i = maze_->index_of({c, r});
            if (i == Maze::kNone) {
                out += "------";
            } else {
                std::snprintf(buf, sizeof buf, "%.4f", cell(i).decay);
                out += buf;
            }
        }
        out += '\n';
    }
    return out;
}

void build_grid_into(CAGrid& grid, const GameState& state) {
    if (state.over) throw GameIsOver();
    if (!grid.maze_ptr() || grid.maze_ptr() != state.maze) grid = CAGrid(state.maze);
    grid.clear();
    const auto& maze = *state.maze;
    const int pac = maze.index_of(state.pacman);
    for (int c = 0; c < maze.cell_count(); ++c) {
        if (state.has_pill(c)) grid.set_source(c, CellValue::Pill);
        if (state.has_powerpill(c)) grid.set_source(c, CellValue::PowerPill);
    }
    // Edible ghosts first so an inedible ghost sharing the cell takes it.
    for (bool edible_pass : {true, false}) {
        for (const auto& g : state.ghosts) {
            if (g.in_lair() || g.edible() != edible_pass) continue;
            const int c = maze.index_of(g.pos);
            grid.set_source(c, edible_pass ? CellValue::EdibleGhost : CellValue::Ghost);
        }
    }
    grid.set_pacman(pac);
}

CAGrid build_grid(const GameState& state) {
    CAGrid grid;
    build_grid_into(grid, state);
    return grid;
}

bool ca_update_in_place(CAGrid& grid, const CAParams& params, const DominationTable& table, Rng& rng) {
    const auto& maze = *grid.maze_;
    auto& cells = grid.cells_;
    auto& proposal = grid.proposal_;
    auto& strength = grid.proposal_strength_;
    const auto n = cells.size();
    proposal.resize(n);
    strength.assign(n, -1);

    const double half = params.jitter ? params.jitter_half_range : 0.0;
    const std::uint64_t key = rng.next();
    // All proposals are made against the pre-pass grid and resolved per
    // target: stronger value first, then higher decay.
    for (std::size_t c = 0; c < n; ++c) {
        const CACell& from = cells[c];
        if (from.value == CellValue::Empty || from.value == CellValue::PacMan) continue;
        const int s = table.strength(from.value);
        const double ceiling = decay_step(from.decay, half, params);
        for (int q : maze.links(static_cast<int>(c))) {
            if (q == Maze::kNone) continue;
            const auto qi = static_cast<std::size_t>(q);
            const CACell& target = cells[qi];
            if (target.pinned() || !table.dominates(from.value, target.value)) continue;
            // Skip proposals that lose whatever their jitter.
            if (s < strength[qi]) continue;
            if (s == strength[qi] && !(ceiling > proposal[qi].decay)) continue;
            if (from.value == target.value && !(ceiling > target.decay)) continue;
            const double r = half > 0.0 ? jitter_draw(key, static_cast<int>(c), q, half) : 0.0;
            const double d = decay_step(from.decay, r, params);
            if (s > strength[qi] || d > proposal[qi].decay) {
                strength[qi] = s;
                proposal[qi] = CACell{from.value, d, false};
            }
        }
    }

    bool changed = false;
    for (std::size_t q = 0; q < n; ++q) {
        if (strength[q] < 0) continue;
        CACell& target = cells[q];
        const CACell& win = proposal[q];
        if (win.value == target.value && !(win.decay > target.decay)) continue;
        target = win;
        changed = true;
    }
    return changed;
}

CAGrid ca_update(const CAGrid& grid, const CAParams& params, Rng& rng, const DominationTable& table) {
    CAGrid out = grid;
    ca_update_in_place(out, params, table, rng);
    return out;
}

int run_updates_in_place(CAGrid& grid, const CAParams& params, const DominationTable& table, Rng& rng) {
    int applied = 0;
    while (applied < params.updates_n) {
        const bool changed = ca_update_in_place(grid, params, table, rng);
        ++applied;
        if (params.stop_at_fixed_point && !changed) break;
    }
    return applied;
}

CAGrid run_updates(const CAGrid& grid, const CAParams& params, Rng& rng, const DominationTable& table) {
    CAGrid out = grid;
    run_updates_in_place(out, params, table, rng);
    return out;
}

Direction best_move(const CAGrid& grid, Rng& rng) {
    if (grid.pacman_cell() == Maze::kNone) throw NoNeighbours();
    const auto& links = grid.maze().links(grid.pacman_cell());

    std::array<Direction, 4> tied{};
    std::size_t count = 0;
    int best_rank = 99;
    double best_decay = 0.0;
    for (auto d : kMoveOrder) {
        const int q = links[static_cast<std::size_t>(d)];
        if (q == Maze::kNone) continue;
        const CACell& c = grid.cell(q);
        const int rank = move_rank(c.value);
        bool better = false;
        bool equal = false;
        if (rank < best_rank) {
            better = true;
        } else if (rank == best_rank) {
            if (c.value == CellValue::Empty) {
                equal = true;
            } else if (c.value == CellValue::Ghost) {
                better = c.decay < best_decay;
                equal = c.decay == best_decay;
            } else {
                better = c.decay > best_decay;
                equal = c.decay == best_decay;
            }
        }
        if (better) {
            best_rank = rank;
            best_decay = c.decay;
            tied[0] = d;
            count = 1;
        } else if (equal) {
            tied[count++] = d;
        }
    }
    if (count == 0) throw NoNeighbours();
    if (count == 1) return tied[0];
    return tied[static_cast<std::size_t>(rng.below(count))];
}

CaPacman::CaPacman(CAParams params, DominationTable table)
    : params_(params), table_(table), rng_(params.rng_seed) {
    params_.validate();
}

void CaPacman::reset(std::uint64_t seed) {
    rng_.reseed({params_.rng_seed, seed});
}

Direction CaPacman::decide(const GameState& state) {
    build_grid_into(grid_, state);
    run_updates_in_place(grid_, params_, table_, rng_);
    return best_move(grid_, rng_);
}

std::string CaPacman::name() const {
    return "CA-" + std::to_string(params_.updates_n);
}

std::unique_ptr<PacmanController> ca_pacman_controller(const CAParams& params) {
    return std::make_unique<CaPacman>(params);
}

}  // namespace capman::ca

#pragma once

#include "capman/engine.hpp"
#include "capman/maze.hpp"
#include "capman/rng.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace capman::ca {

enum class CellValue : std::uint8_t { PacMan, Pill, PowerPill, Ghost, EdibleGhost, Empty };

inline constexpr std::array<CellValue, 6> kAllValues{CellValue::PacMan, CellValue::Pill,        CellValue::PowerPill,
                                                     CellValue::Ghost,  CellValue::EdibleGhost, CellValue::Empty};

char to_char(CellValue v) noexcept;
std::optional<CellValue> value_from_char(char c) noexcept;

/// Which values a cell value may overwrite on a neighbour.
class DominationTable {
public:
    /// @ -> {}, E -> {p,P,G,e}, p -> {e}, P -> {p,G,e}, G -> {p,G,e}, e -> {}
    static DominationTable standard();

    bool dominates(CellValue a, CellValue b) const noexcept {
        return (rows_[static_cast<std::size_t>(a)] >> static_cast<unsigned>(b)) & 1U;
    }
    void set(CellValue a, CellValue b, bool on);

    /// True when no two distinct values dominate each other.
    bool is_antisymmetric() const noexcept;

    /// Rank used when several proposals land on one cell: the number of
    /// values this value strictly beats. E > P > G > p for the standard table.
    int strength(CellValue v) const noexcept { return strength_[static_cast<std::size_t>(v)]; }

private:
    void recompute_strength() noexcept;

    std::array<std::uint8_t, 6> rows_{};
    std::array<int, 6> strength_{};
};

struct CAParams {
    int updates_n = 17;
    double decay_keep = 0.9;
    double jitter_scale = 1.0 / 1000.0;
    double jitter_half_range = 0.5;
    std::uint64_t rng_seed = 0;
    bool jitter = true;  // false forces R = 0
    bool decay = true;   // false keeps every propagated decay at its parent's value
    bool stop_at_fixed_point = false;

    void validate() const;
};

/// One propagation step of a wave's decay: pd * keep + r * pd * scale.
double decay_step(double pd, double r, const CAParams& params) noexcept;

struct CACell {
    CellValue value = CellValue::Empty;
    double decay = 1.0;
    bool is_source = false;

    /// '@' and actor/power-pill sources are fixed for the tick; pill sources
    /// yield to any value that dominates 'p'.
    bool pinned() const noexcept {
        return value == CellValue::PacMan || (is_source && value != CellValue::Pill);
    }

    friend bool operator==(const CACell&, const CACell&) = default;
};

/// Jitter R for one (pass, proposing cell, target cell) proposal, uniform in
/// [-half_range, half_range). Counter-based, so a proposal's R does not
/// depend on which other proposals were evaluated or in what order.
double jitter_draw(std::uint64_t pass_key, int from, int to, double half_range) noexcept;

class GameIsOver : public std::logic_error {
public:
    GameIsOver() : std::logic_error("cannot build a CA grid from a finished game") {}
};

class NoNeighbours : public std::logic_error {
public:
    NoNeighbours() : std::logic_error("Pac-Man's cell has no walkable neighbour") {}
};

/// The CA lattice: one cell per walkable maze cell, indexed like the maze.
class CAGrid {
public:
    CAGrid() = default;
    explicit CAGrid(std::shared_ptr<const Maze> maze);

    const Maze& maze() const { return *maze_; }
    const std::shared_ptr<const Maze>& maze_ptr() const { return maze_; }
    int size() const noexcept { return static_cast<int>(cells_.size()); }

    const CACell& cell(int index) const { return cells_[static_cast<std::size_t>(index)]; }
    CACell& cell(int index) { return cells_[static_cast<std::size_t>(index)]; }
    const CACell& at(Position p) const;
    const std::vector<CACell>& cells() const noexcept { return cells_; }

    int pacman_cell() const noexcept { return pacman_cell_; }
    Position pacman_pos() const { return maze_->position_of(pacman_cell_); }

    /// Places '@' (source-free) at the given cell, clearing any previous one.
    void set_pacman(int cell);
    /// Stamps a source cell with decay 1.
    void set_source(int cell, CellValue v);
    /// Resets every cell to Empty and clears Pac-Man.
    void clear();

    /// Text matrix of value characters, walls as '#'.
    std::string dump_values() const;
    /// Parallel matrix of decays with 4 decimals, walls as "------".
    std::string dump_decays() const;

    friend bool operator==(const CAGrid& a, const CAGrid& b) {
        return a.maze_ == b.maze_ && a.pacman_cell_ == b.pacman_cell_ && a.cells_ == b.cells_;
    }

private:
    friend bool ca_update_in_place(CAGrid&, const CAParams&, const DominationTable&, Rng&);

    std::shared_ptr<const Maze> maze_;
    std::vector<CACell> cells_;
    int pacman_cell_ = Maze::kNone;
    // per-target best proposal, scratch for one pass
    std::vector<CACell> proposal_;
    std::vector<int> proposal_strength_;
};

CAGrid build_grid(const GameState& state);
/// Rebuilds `grid` in place; avoids reallocating every tick.
void build_grid_into(CAGrid& grid, const GameState& state);

/// One synchronous, double-buffered domination pass; draws one key from `rng`
/// for the pass's jitter. Returns true when any cell changed.
bool ca_update_in_place(CAGrid& grid, const CAParams& params, const DominationTable& table, Rng& rng);
CAGrid ca_update(const CAGrid& grid, const CAParams& params, Rng& rng,
                 const DominationTable& table = DominationTable::standard());

/// Applies updates_n passes (or fewer when stop_at_fixed_point is set and the grid settles).
/// Returns the number of passes applied.
int run_updates_in_place(CAGrid& grid, const CAParams& params, const DominationTable& table, Rng& rng);
CAGrid run_updates(const CAGrid& grid, const CAParams& params, Rng& rng,
                   const DominationTable& table = DominationTable::standard());

/// Picks Pac-Man's move from his adjacent cells only:
/// E > P > p > e > G; highest decay among E/P/p, lowest among G; random among ties.
Direction best_move(const CAGrid& grid, Rng& rng);

/// Pac-Man controller: rebuild grid, run N updates, take best_move.
class CaPacman final : public PacmanController {
public:
    explicit CaPacman(CAParams params, DominationTable table = DominationTable::standard());

    void reset(std::uint64_t seed) override;
    Direction decide(const GameState& state) override;
    std::string name() const override;

    const CAParams& params() const noexcept { return params_; }
    /// Grid after the updates of the most recent decide() call.
    const CAGrid& last_grid() const noexcept { return grid_; }

private:
    CAParams params_;
    DominationTable table_;
    Rng rng_;
    CAGrid grid_;
};

std::unique_ptr<PacmanController> ca_pacman_controller(const CAParams& params);

}  // namespace capman::ca

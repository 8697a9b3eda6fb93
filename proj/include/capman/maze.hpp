#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace capman {

struct Position {
    int col = 0;
    int row = 0;

    friend constexpr auto operator<=>(const Position&, const Position&) = default;
};

std::string to_string(Position p);

enum class Direction : std::uint8_t { Up, Down, Left, Right, Neutral };

/// Canonical order used for neighbour listing and every deterministic tie-break.
inline constexpr std::array<Direction, 4> kMoveOrder{Direction::Up, Direction::Down, Direction::Left,
                                                     Direction::Right};

constexpr Direction opposite(Direction d) noexcept {
    switch (d) {
        case Direction::Up: return Direction::Down;
        case Direction::Down: return Direction::Up;
        case Direction::Left: return Direction::Right;
        case Direction::Right: return Direction::Left;
        case Direction::Neutral: return Direction::Neutral;
    }
    return Direction::Neutral;
}

std::string_view to_string(Direction d) noexcept;
std::optional<Direction> parse_direction(std::string_view s) noexcept;

enum class MazeErrorKind { UnknownCharacter, NoPacmanStart, NoGhostStart, DisconnectedMaze, DeadCell, NotWalkable, Io };

class MazeError : public std::runtime_error {
public:
    MazeError(MazeErrorKind kind, std::string what, std::optional<Position> where = std::nullopt);

    MazeErrorKind kind() const noexcept { return kind_; }
    const std::optional<Position>& where() const noexcept { return where_; }

private:
    MazeErrorKind kind_;
    std::optional<Position> where_;
};

struct Neighbour {
    Direction dir;
    Position pos;
};

/// Immutable walkable-cell graph. Walkable cells carry a dense index in
/// row-major order; all per-cell tables in the engine and the CA are keyed
/// by that index.
class Maze {
public:
    static constexpr int kNone = -1;

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    const std::string& name() const noexcept { return name_; }

    bool in_bounds(Position p) const noexcept;
    bool is_walkable(Position p) const noexcept { return index_of(p) != kNone; }

    int cell_count() const noexcept { return static_cast<int>(positions_.size()); }
    int index_of(Position p) const noexcept;
    Position position_of(int cell) const { return positions_.at(static_cast<std::size_t>(cell)); }

    /// Walkable neighbours in Up, Down, Left, Right order, with tunnel wrap.
    std::vector<Neighbour> neighbours(Position p) const;

    /// Neighbour cell index per direction (kNone where blocked), Up/Down/Left/Right.
    const std::array<int, 4>& links(int cell) const { return links_[static_cast<std::size_t>(cell)]; }
    int degree(int cell) const noexcept { return degree_[static_cast<std::size_t>(cell)]; }
    int step(int cell, Direction d) const noexcept;

    int bfs_distance(Position a, Position b) const;
    int distance(int a, int b) const;
    std::vector<int> distances_from(int cell) const;
    int diameter() const;

    const std::vector<int>& pills0() const noexcept { return pills0_; }
    const std::vector<int>& powerpills0() const noexcept { return powerpills0_; }
    const std::vector<int>& lair() const noexcept { return lair_; }
    const std::vector<Position>& ghost_starts() const noexcept { return ghost_starts_; }
    Position pacman_start() const noexcept { return pacman_start_; }
    bool is_tunnel_row(int row) const noexcept;
    bool is_lair(int cell) const noexcept;

    /// Text form in the maze-file alphabet; parse(render(m)) == m.
    std::string render() const;

    friend Maze parse_maze(std::string_view text, std::string name);

private:
    Maze() = default;
    void build_links();
    void validate() const;
    void build_distance_table();

    int width_ = 0;
    int height_ = 0;
    std::string name_;
    std::string comment_;
    std::vector<std::uint8_t> tunnel_cell_;  // per cell index, '=' cells
    std::vector<int> index_;  // width*height, kNone for walls
    std::vector<Position> positions_;
    std::vector<std::array<int, 4>> links_;
    std::vector<int> degree_;
    std::vector<std::uint8_t> tunnel_rows_;
    std::vector<std::uint8_t> lair_mask_;
    std::vector<int> pills0_;
    std::vector<int> powerpills0_;
    std::vector<int> lair_;
    std::vector<Position> ghost_starts_;
    Position pacman_start_{};
    std::vector<std::int32_t> dist_;  // all-pairs table, empty for large mazes
};

Maze parse_maze(std::string_view text, std::string name = {});
Maze load_maze(const std::filesystem::path& path);

}  // namespace capman

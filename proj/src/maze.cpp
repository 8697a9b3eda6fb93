#include "capman/maze.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <ranges>
#include <sstream>

namespace capman {

namespace {

constexpr int kDistanceTableLimit = 4096;

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

bool walkable_char(char c) {
    return c == ' ' || c == '.' || c == 'o' || c == 'P' || c == 'G' || c == 'H' || c == '=';
}

}  // namespace

std::string to_string(Position p) {
    return "(" + std::to_string(p.col) + "," + std::to_string(p.row) + ")";
}

std::string_view to_string(Direction d) noexcept {
    switch (d) {
        case Direction::Up: return "Up";
        case Direction::Down: return "Down";
        case Direction::Left: return "Left";
        case Direction::Right: return "Right";
        case Direction::Neutral: return "Neutral";
    }
    return "Neutral";
}

std::optional<Direction> parse_direction(std::string_view s) noexcept {
    for (auto d : {Direction::Up, Direction::Down, Direction::Left, Direction::Right, Direction::Neutral}) {
        if (s == to_string(d)) return d;
    }
    return std::nullopt;
}

MazeError::MazeError(MazeErrorKind kind, std::string what, std::optional<Position> where)
    : std::runtime_error(std::move(what)), kind_(kind), where_(where) {}

bool Maze::in_bounds(Position p) const noexcept {
    return p.col >= 0 && p.row >= 0 && p.col < width_ && p.row < height_;
}

int Maze::index_of(Position p) const noexcept {
    if (!in_bounds(p)) return kNone;
    return index_[static_cast<std::size_t>(p.row * width_ + p.col)];
}

bool Maze::is_tunnel_row(int row) const noexcept {
    return row >= 0 && row < height_ && tunnel_rows_[static_cast<std::size_t>(row)] != 0;
}

bool Maze::is_lair(int cell) const noexcept {
    return cell >= 0 && cell < cell_count() && lair_mask_[static_cast<std::size_t>(cell)] != 0;
}

int Maze::step(int cell, Direction d) const noexcept {
    if (d == Direction::Neutral || cell < 0 || cell >= cell_count()) return kNone;
    return links_[static_cast<std::size_t>(cell)][static_cast<std::size_t>(d)];
}

std::vector<Neighbour> Maze::neighbours(Position p) const {
    const int cell = index_of(p);
    if (cell == kNone) throw MazeError(MazeErrorKind::NotWalkable, "not walkable: " + to_string(p), p);
    std::vector<Neighbour> out;
    for (auto d : kMoveOrder) {
        const int q = links(cell)[static_cast<std::size_t>(d)];
        if (q != kNone) out.push_back({d, position_of(q)});
    }
    return out;
}

void Maze::build_links() {
    links_.assign(positions_.size(), {kNone, kNone, kNone, kNone});
    degree_.assign(positions_.size(), 0);
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        const auto p = positions_[i];
        const bool wraps = is_tunnel_row(p.row);
        auto target = [&](int dc, int dr) {
            Position q{p.col + dc, p.row + dr};
            if (wraps && dr == 0) q.col = (q.col + width_) % width_;
            return index_of(q);
        };
        links_[i] = {target(0, -1), target(0, 1), target(-1, 0), target(1, 0)};
        degree_[i] = static_cast<int>(std::count_if(links_[i].begin(), links_[i].end(), [](int q) { return q != kNone; }));
    }
}

void Maze::validate() const {
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        if (degree_[i] == 0) {
            throw MazeError(MazeErrorKind::DeadCell, "walkable cell without walkable neighbours at " + to_string(positions_[i]),
                            positions_[i]);
        }
    }
    const auto reach = distances_from(0);
    const auto it = std::ranges::find(reach, -1);
    if (it != reach.end()) {
        const auto p = positions_[static_cast<std::size_t>(it - reach.begin())];
        throw MazeError(MazeErrorKind::DisconnectedMaze, "cell " + to_string(p) + " is unreachable from " + to_string(positions_[0]), p);
    }
}

void Maze::build_distance_table() {
    const int n = cell_count();
    if (n > kDistanceTableLimit) return;
    dist_.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        const auto row = distances_from(a);
        std::copy(row.begin(), row.end(), dist_.begin() + static_cast<std::ptrdiff_t>(a) * n);
    }
}

std::vector<int> Maze::distances_from(int cell) const {
    std::vector<int> dist(positions_.size(), -1);
    if (positions_.empty()) return dist;
    std::deque<int> frontier{cell};
    dist[static_cast<std::size_t>(cell)] = 0;
    while (!frontier.empty()) {
        const int c = frontier.front();
        frontier.pop_front();
        for (int q : links_[static_cast<std::size_t>(c)]) {
            if (q == kNone || dist[static_cast<std::size_t>(q)] >= 0) continue;
            dist[static_cast<std::size_t>(q)] = dist[static_cast<std::size_t>(c)] + 1;
            frontier.push_back(q);
        }
    }
    return dist;
}

int Maze::distance(int a, int b) const {
    if (!dist_.empty()) return dist_[static_cast<std::size_t>(a) * positions_.size() + static_cast<std::size_t>(b)];
    return distances_from(a)[static_cast<std::size_t>(b)];
}

int Maze::bfs_distance(Position a, Position b) const {
    const int ia = index_of(a);
    const int ib = index_of(b);
    if (ia == kNone) throw MazeError(MazeErrorKind::NotWalkable, "not walkable: " + to_string(a), a);
    if (ib == kNone) throw MazeError(MazeErrorKind::NotWalkable, "not walkable: " + to_string(b), b);
    return distance(ia, ib);
}

int Maze::diameter() const {
    int best = 0;
    for (int a = 0; a < cell_count(); ++a) {
        if (!dist_.empty()) {
            const auto first = dist_.begin() + static_cast<std::ptrdiff_t>(a) * cell_count();
            best = std::max(best, *std::max_element(first, first + cell_count()));
        } else {
            const auto row = distances_from(a);
            best = std::max(best, *std::ranges::max_element(row));
        }
    }
    return best;
}

std::string Maze::render() const {
    std::vector<std::string> grid(static_cast<std::size_t>(height_), std::string(static_cast<std::size_t>(width_), '#'));
    auto put = [&](Position p, char c) { grid[static_cast<std::size_t>(p.row)][static_cast<std::size_t>(p.col)] = c; };
    for (int i = 0; i < cell_count(); ++i) {
        const auto p = positions_[static_cast<std::size_t>(i)];
        put(p, tunnel_cell_[static_cast<std::size_t>(i)] ? '=' : lair_mask_[static_cast<std::size_t>(i)] ? 'H' : ' ');
    }
    for (int c : pills0_) put(position_of(c), '.');
    for (int c : powerpills0_) put(position_of(c), 'o');
    for (auto g : ghost_starts_) put(g, 'G');
    put(pacman_start_, 'P');

    std::string out;
    if (!comment_.empty()) out += comment_ + "\n";
    for (const auto& row : grid) out += row + "\n";
    return out;
}

Maze parse_maze(std::string_view text, std::string name) {
    auto lines = split_lines(text);
    Maze m;
    m.name_ = std::move(name);
    if (!lines.empty() && lines.front().starts_with(';')) {
        m.comment_ = std::string(lines.front());
        lines.erase(lines.begin());
    }
    m.height_ = static_cast<int>(lines.size());
    for (auto line : lines) m.width_ = std::max(m.width_, static_cast<int>(line.size()));

    std::vector<std::string> rows;
    rows.reserve(lines.size());
    for (auto line : lines) {
        std::string row(line);
        row.resize(static_cast<std::size_t>(m.width_), '#');
        rows.push_back(std::move(row));
    }

    m.index_.assign(static_cast<std::size_t>(m.width_ * m.height_), Maze::kNone);
    m.tunnel_rows_.assign(static_cast<std::size_t>(m.height_), 0);
    std::optional<Position> pacman;
    for (int r = 0; r < m.height_; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        for (int c = 0; c < m.width_; ++c) {
            const char ch = row[static_cast<std::size_t>(c)];
            if (ch == '#') continue;
            if (!walkable_char(ch)) {
                throw MazeError(MazeErrorKind::UnknownCharacter,
                                std::string("unknown maze character '") + ch + "' at " + to_string({c, r}), Position{c, r});
            }
            const int cell = static_cast<int>(m.positions_.size());
            m.index_[static_cast<std::size_t>(r * m.width_ + c)] = cell;
            m.positions_.push_back({c, r});
            m.tunnel_cell_.push_back(ch == '=' ? 1 : 0);
            m.lair_mask_.push_back(ch == 'H' ? 1 : 0);
            switch (ch) {
                case '.': m.pills0_.push_back(cell); break;
                case 'o': m.powerpills0_.push_back(cell); break;
                case 'H': m.lair_.push_back(cell); break;
                case 'G': m.ghost_starts_.push_back({c, r}); break;
                case 'P':
                    if (!pacman) pacman = Position{c, r};
                    break;
                default: break;
            }
        }
        if (m.width_ > 1 && row.front() == '=' && row.back() == '=') m.tunnel_rows_[static_cast<std::size_t>(r)] = 1;
    }
    if (!pacman) throw MazeError(MazeErrorKind::NoPacmanStart, "maze has no 'P' start cell");
    if (m.ghost_starts_.empty()) throw MazeError(MazeErrorKind::NoGhostStart, "maze has no 'G' start cell");
    m.pacman_start_ = *pacman;

    m.build_links();
    m.validate();
    m.build_distance_table();
    return m;
}

Maze load_maze(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MazeError(MazeErrorKind::Io, "cannot open maze file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_maze(buf.str(), path.stem().string());
}

}  // namespace capman

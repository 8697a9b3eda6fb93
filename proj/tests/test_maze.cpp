#include "capman/maze.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

using namespace capman;

namespace {

MazeErrorKind error_kind(const std::string& text) {
    try {
        parse_maze(text);
    } catch (const MazeError& e) {
        return e.kind();
    }
    FAIL("expected a MazeError");
    return MazeErrorKind::Io;
}

std::vector<Direction> dirs_of(const std::vector<Neighbour>& ns) {
    std::vector<Direction> out;
    for (auto& n : ns) out.push_back(n.dir);
    return out;
}

}  // namespace

TEST_CASE("parse: minimal 5x3 maze") {
    const auto m = parse_maze("#####\n#P.G#\n#####");
    CHECK(m.width() == 5);
    CHECK(m.height() == 3);
    CHECK(m.cell_count() == 3);
    CHECK(m.pills0().size() == 1);
    CHECK(m.powerpills0().empty());
    CHECK(m.pacman_start() == Position{1, 1});
    REQUIRE(m.ghost_starts().size() == 1);
    CHECK(m.ghost_starts()[0] == Position{3, 1});
}

TEST_CASE("parse: error kinds") {
    CHECK(error_kind("#####\n#PXG#\n#####") == MazeErrorKind::UnknownCharacter);
    CHECK(error_kind("#####\n#..G#\n#####") == MazeErrorKind::NoPacmanStart);
    CHECK(error_kind("#####\n#P..#\n#####") == MazeErrorKind::NoGhostStart);
    CHECK(error_kind("#####\n#P..#\n#####\n#..G#\n#####") == MazeErrorKind::DisconnectedMaze);
    CHECK(error_kind("#####\n#P.G#\n#####\n##.##\n#####") == MazeErrorKind::DeadCell);
}

TEST_CASE("parse: unknown character reports its position") {
    try {
        parse_maze("#####\n#P.G#\n##X##");
        FAIL("no error");
    } catch (const MazeError& e) {
        REQUIRE(e.where());
        CHECK(*e.where() == Position{2, 2});
    }
}

TEST_CASE("parse: pill counts match characters") {
    const std::string text = "; comment line\n#######\n#Po.o.#\n#.###.#\n#..G..#\n#######";
    const auto m = parse_maze(text);
    int dots = 0;
    int os = 0;
    for (char c : text.substr(text.find('\n'))) {
        dots += c == '.';
        os += c == 'o';
    }
    CHECK(static_cast<int>(m.pills0().size()) == dots);
    CHECK(static_cast<int>(m.powerpills0().size()) == os);
}

TEST_CASE("parse: short lines are padded") {
    const auto m = parse_maze("#####\n#P.G#\n###");
    CHECK(m.width() == 5);
    CHECK(m.cell_count() == 3);
}

TEST_CASE("parse: lair cells") {
    const auto m = parse_maze("######\n#P..G#\n#.HH.#\n#....#\n######");
    CHECK(m.lair().size() == 2);
    CHECK(m.is_lair(m.index_of({2, 2})));
    CHECK_FALSE(m.is_lair(m.index_of({1, 1})));
}

TEST_CASE("render round trip") {
    for (const char* name : {"classic.txt", "tiny.txt"}) {
        const auto m = load_maze(std::filesystem::path(CAPMAN_MAZE_DIR) / name);
        const auto again = parse_maze(m.render(), m.name());
        CHECK(again.render() == m.render());
        std::ifstream in(std::filesystem::path(CAPMAN_MAZE_DIR) / name);
        std::stringstream ss;
        ss << in.rdbuf();
        auto trim_lines = [](const std::string& s) {
            std::string out;
            for (auto& r : oracle::rows_of(s)) {
                auto e = r.find_last_not_of(' ');
                out += r.substr(0, e == std::string::npos ? 0 : e + 1) + "\n";
            }
            return out;
        };
        CHECK(trim_lines(m.render()) == trim_lines(ss.str()));
    }
}

TEST_CASE("neighbours: corridor, T-junction, order") {
    const auto m = parse_maze("#######\n#P...G#\n###.###\n###.###\n#######");
    CHECK(dirs_of(m.neighbours({2, 1})) == std::vector{Direction::Left, Direction::Right});
    CHECK(dirs_of(m.neighbours({3, 1})) == std::vector{Direction::Down, Direction::Left, Direction::Right});
    CHECK(dirs_of(m.neighbours({3, 3})) == std::vector{Direction::Up});
    CHECK_THROWS_AS(m.neighbours({0, 0}), MazeError);
}

TEST_CASE("neighbours: tunnel row wraps") {
    const auto m = parse_maze("#######\n#P...G#\n=.....=\n#.....#\n#######");
    CHECK(m.is_tunnel_row(2));
    const auto ns = m.neighbours({0, 2});
    bool wraps = false;
    for (auto& n : ns) wraps |= n.dir == Direction::Left && n.pos == Position{6, 2};
    CHECK(wraps);
    CHECK(m.bfs_distance({0, 2}, {6, 2}) == 1);
}

TEST_CASE("neighbours are symmetric") {
    for (const char* name : {"classic.txt", "tiny.txt"}) {
        const auto m = load_maze(std::filesystem::path(CAPMAN_MAZE_DIR) / name);
        for (int c = 0; c < m.cell_count(); ++c) {
            const auto p = m.position_of(c);
            const auto ns = m.neighbours(p);
            CHECK(ns.size() >= 1);
            CHECK(ns.size() <= 4);
            for (auto& n : ns) {
                bool back = false;
                for (auto& r : m.neighbours(n.pos)) back |= r.pos == p && r.dir == opposite(n.dir);
                CHECK(back);
            }
        }
    }
    const auto t = parse_maze("#######\n#P...G#\n=.....=\n#.....#\n#######");
    for (int c = 0; c < t.cell_count(); ++c) {
        for (auto& n : t.neighbours(t.position_of(c))) {
            bool back = false;
            for (auto& r : t.neighbours(n.pos)) back |= r.pos == t.position_of(c) && r.dir == opposite(n.dir);
            CHECK(back);
        }
    }
}

TEST_CASE("bfs_distance: identity, adjacency, 4x4 room") {
    const std::string room = "######\n#P...#\n#....#\n#....#\n#...G#\n######";
    const auto m = parse_maze(room);
    CHECK(m.bfs_distance({1, 1}, {1, 1}) == 0);
    CHECK(m.bfs_distance({1, 1}, {2, 1}) == 1);
    CHECK(m.bfs_distance({1, 1}, {4, 4}) == 6);
    // 3x3 cells: 2+2
    const auto small = parse_maze("#####\n#P..#\n#...#\n#..G#\n#####");
    CHECK(small.bfs_distance({1, 1}, {3, 3}) == 4);

    const auto rows = oracle::rows_of(room);
    for (int c = 0; c < m.cell_count(); ++c) {
        const auto fl = oracle::flood(rows, m.position_of(c));
        for (auto& [p, d] : fl) CHECK(m.bfs_distance(m.position_of(c), p) == d);
    }
}

TEST_CASE("bfs_distance matches flood fill on the bundled mazes") {
    const auto path = std::filesystem::path(CAPMAN_MAZE_DIR) / "classic.txt";
    const auto m = load_maze(path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto rows = oracle::rows_of(ss.str());
    for (int c = 0; c < m.cell_count(); c += 7) {
        const auto fl = oracle::flood(rows, m.position_of(c));
        CHECK(static_cast<int>(fl.size()) == m.cell_count());
        for (auto& [p, d] : fl) REQUIRE(m.bfs_distance(m.position_of(c), p) == d);
    }
}

TEST_CASE("bfs_distance: symmetry and triangle inequality") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto m = parse_maze(oracle::random_maze_text(gen, 10, 10));
        std::uniform_int_distribution<int> pick(0, m.cell_count() - 1);
        for (int k = 0; k < 50; ++k) {
            const auto a = m.position_of(pick(gen));
            const auto b = m.position_of(pick(gen));
            const auto c = m.position_of(pick(gen));
            CHECK(m.bfs_distance(a, b) == m.bfs_distance(b, a));
            CHECK(m.bfs_distance(a, c) <= m.bfs_distance(a, b) + m.bfs_distance(b, c));
            CHECK((m.bfs_distance(a, b) == 0) == (a == b));
        }
    }
}

TEST_CASE("bundled mazes") {
    const auto tiny = load_maze(std::filesystem::path(CAPMAN_MAZE_DIR) / "tiny.txt");
    CHECK(tiny.width() == 10);
    CHECK(tiny.height() == 8);
    CHECK(tiny.name() == "tiny");
    const auto classic = load_maze(std::filesystem::path(CAPMAN_MAZE_DIR) / "classic.txt");
    CHECK(classic.width() == 28);
    CHECK(classic.height() == 24);
    REQUIRE(classic.powerpills0().size() == 4);
    std::vector<Position> pp;
    for (int c : classic.powerpills0()) pp.push_back(classic.position_of(c));
    std::sort(pp.begin(), pp.end());
    CHECK(pp == std::vector<Position>{{1, 1}, {1, 22}, {26, 1}, {26, 22}});
    CHECK_FALSE(classic.lair().empty());
}

TEST_CASE("load_maze: missing file") {
    try {
        load_maze("/nonexistent/maze.txt");
        FAIL("no error");
    } catch (const MazeError& e) {
        CHECK(e.kind() == MazeErrorKind::Io);
    }
}

TEST_CASE("direction names round trip") {
    for (auto d : {Direction::Up, Direction::Down, Direction::Left, Direction::Right, Direction::Neutral}) {
        CHECK(parse_direction(to_string(d)) == d);
    }
    CHECK_FALSE(parse_direction("Sideways"));
}

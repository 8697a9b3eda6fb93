// One line per acceptance criterion; exit status is the number of failures.
#include "capman/baselines.hpp"
#include "capman/bench.hpp"
#include "capman/ca.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

using namespace capman;
using namespace capman::ca;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass;
    std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& fn) {
    const auto t0 = Clock::now();
    Outcome r;
    try {
        r = fn();
    } catch (const std::exception& e) {
        r = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!r.pass) ++failures;
    std::printf("%s  %-22s %s (%.1fs)\n", r.pass ? "PASS" : "FAIL", name, r.detail.c_str(), secs);
    std::fflush(stdout);
}

double since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::filesystem::path maze_path(const char* name) {
    return std::filesystem::path(CAPMAN_MAZE_DIR) / name;
}

std::shared_ptr<const Maze> maze_file(const char* name) {
    return std::make_shared<const Maze>(load_maze(maze_path(name)));
}

CAParams zero_r(int n) {
    CAParams p;
    p.jitter = false;
    p.updates_n = n;
    return p;
}

Outcome decay_closed_form() {
    const auto t0 = Clock::now();
    const int len = 40;
    const auto m = std::make_shared<const Maze>(
        parse_maze(std::string(len + 2, '#') + "\n#P" + std::string(len - 2, ' ') + "G#\n" + std::string(len + 2, '#')));
    const int src = m->index_of({len, 1});
    CAGrid g(m);
    g.set_pacman(m->index_of({1, 1}));
    g.set_source(src, CellValue::Ghost);
    Rng rng(0);
    const auto after = run_updates(g, zero_r(len), rng);
    int checked = 0;
    double worst_ulps = 0;
    for (int col = 2; col < len; ++col) {
        const int d = len - col;
        const auto& cell = after.at({col, 1});
        const double exact = std::pow(0.9, d);
        if (cell.value != CellValue::Ghost || cell.decay != oracle::iterated_decay(d)) {
            return {false, fmt("distance %d: value %c decay %.17g", d, to_char(cell.value), cell.decay)};
        }
        const double ulps = std::abs(cell.decay - exact) / (std::numeric_limits<double>::epsilon() * exact);
        worst_ulps = std::max(worst_ulps, ulps / d);
        if (std::abs(cell.decay - exact) > d * std::numeric_limits<double>::epsilon() * exact) {
            return {false, fmt("distance %d off 0.9^d by %.3g", d, std::abs(cell.decay - exact))};
        }
        ++checked;
    }
    const double secs = since(t0);
    return {secs < 1.0, fmt("%d cells, worst %.2f ulp per multiply", checked, worst_ulps)};
}

Outcome bfs_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 gen(20240601);
    int mismatches = 0;
    int cells = 0;
    const int mazes = 60;
    for (int i = 0; i < mazes; ++i) {
        const auto r = oracle::bfs_oracle_case(gen);
        mismatches += r.mismatches;
        cells += r.cells;
    }
    const double secs = since(t0);
    return {mismatches == 0 && secs < 10.0, fmt("%d mazes, %d cells, %d mismatches", mazes, cells, mismatches)};
}

Outcome fixed_point() {
    const auto t0 = Clock::now();
    int grids = 0;
    for (const char* name : {"tiny.txt", "classic.txt"}) {
        const auto m = maze_file(name);
        const auto p = zero_r(m->diameter());
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            RandomPacman pac;
            RandomGhostTeam ghosts;
            GameRunner run(pac, ghosts, m, {}, seed);
            for (int t = 0; t < static_cast<int>(seed) * 15 && !run.over(); ++t) run.tick();
            if (run.over()) continue;
            Rng rng(seed);
            auto g = run_updates(build_grid(run.state()), p, rng);
            const auto settled = g;
            const bool changed = ca_update_in_place(g, p, DominationTable::standard(), rng);
            if (changed || !(g == settled)) return {false, fmt("%s seed %llu moved after %d passes", name, (unsigned long long)seed, p.updates_n)};
            ++grids;
        }
    }
    const double secs = since(t0);
    return {secs < 1.0, fmt("%d grids unchanged by pass N+1", grids)};
}

Outcome f3_scenario() {
    const auto m = std::make_shared<const Maze>(parse_maze("###########\n#  G P   G#\n###########"));
    GameConfig cfg;
    cfg.ghost_count = 2;
    const auto s = new_game(m, cfg, 0);
    CaPacman pac(CAParams{});
    int right = 0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        pac.reset(i);
        right += pac.decide(s) == Direction::Right;
    }
    return {right == 100, fmt("%d/100 toward the distance-4 ghost", right)};
}

bench::ExperimentStats classic_run(const bench::PacmanSpec& pacman) {
    bench::ExperimentSpec spec;
    spec.pacman = pacman;
    spec.maze_path = maze_path("classic.txt");
    spec.games = 100;
    spec.base_seed = 0;
    return bench::run_experiment(spec);
}

bench::PacmanSpec ca_n(int n) {
    return bench::parse_pacman_spec("ca:" + std::to_string(n));
}

Outcome inverted_u() {
    const auto t0 = Clock::now();
    const auto a = classic_run(ca_n(1));
    const auto b = classic_run(ca_n(17));
    const auto c = classic_run(ca_n(91));
    const double secs = since(t0);
    const bool ok = b.avg > a.avg && b.avg > c.avg && b.avg >= 1.5 * a.avg && secs < 600.0;
    return {ok, fmt("mean N=1 %.1f, N=17 %.1f, N=91 %.1f (17/1 = %.2fx)", a.avg, b.avg, c.avg, b.avg / a.avg)};
}

Outcome baseline_ordering() {
    const auto starter = classic_run(bench::parse_pacman_spec("starter"));
    std::string tried;
    for (int n = 11; n <= 31; ++n) {
        const auto ca = classic_run(ca_n(n));
        tried += fmt(" %d:%.0f", n, ca.avg);
        if (ca.avg > starter.avg) {
            return {true, fmt("CA-%d %.1f > StarterPacMan %.1f", n, ca.avg, starter.avg)};
        }
    }
    return {false, fmt("StarterPacMan %.1f beat every N in [11,31]:%s", starter.avg, tried.c_str())};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto dir = std::filesystem::temp_directory_path() / "capman_acceptance";
    std::filesystem::create_directories(dir);
    std::string csv[2];
    for (int i = 0; i < 2; ++i) {
        const auto out = dir / ("sweep" + std::to_string(i) + ".csv");
        std::filesystem::remove(out);
        const std::string cmd = std::string("\"") + CAPMAN_BIN + "\" sweep --maze \"" + maze_path("classic.txt").string() +
                                "\" --games 6 --stage1 1:11:5 --stage2 4:6 --workers 2" +
                                " --out \"" + out.string() + "\" 2>/dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "capman sweep failed"};
        csv[i] = slurp(out);
    }
    if (csv[0].empty() || csv[0] != csv[1]) return {false, "sweep CSVs differ between runs"};

    bench::ExperimentSpec spec;
    spec.pacman = ca_n(17);
    spec.maze_path = maze_path("classic.txt");
    spec.games = 8;
    spec.workers = 1;
    const auto seq = bench::run_experiment(spec);
    spec.workers = 4;
    const auto par = bench::run_experiment(spec);
    if (seq.per_game != par.per_game) return {false, "parallel per_game differs from sequential"};
    const auto lines = std::count(csv[0].begin(), csv[0].end(), '\n');
    return {true, fmt("2 sweeps byte-identical (%ld lines, %zu bytes); 1 vs 4 workers identical", static_cast<long>(lines),
                      csv[0].size())};
}

Outcome engine_audit() {
    const auto m = maze_file("classic.txt");
    const GameConfig cfg;
    const int pills0 = static_cast<int>(m->pills0().size());
    const int power0 = static_cast<int>(m->powerpills0().size());
    int violations = 0;
    long ticks = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        RandomPacman pac;
        RandomGhostTeam ghosts;
        GameRunner run(pac, ghosts, m, cfg, seed);
        oracle::ScoreReplay replay{cfg};
        int pills_eaten = 0;
        int power_eaten = 0;
        bool bad = false;
        while (!run.over() && !bad) {
            for (const auto& e : run.tick()) {
                replay.feed(e);
                if (e.kind == EventKind::AtePill) ++pills_eaten;
                if (e.kind == EventKind::AtePowerPill) ++power_eaten;
                if (e.kind == EventKind::LevelCleared || e.kind == EventKind::LevelTimeout) pills_eaten = power_eaten = 0;
            }
            const auto& s = run.state();
            ++ticks;
            bad = s.score != replay.total || s.pills_left + pills_eaten != pills0 || s.powerpills_left + power_eaten != power0 ||
                  s.pills_left != static_cast<int>(s.pill_positions().size()) ||
                  s.powerpills_left != static_cast<int>(s.powerpill_positions().size());
        }
        bad |= run.result().final_score != replay.total;
        violations += bad;
    }
    return {violations == 0, fmt("1000 games, %ld ticks, %d violating games", ticks, violations)};
}

}  // namespace

int main() {
    report("decay-closed-form", decay_closed_form);
    report("bfs-oracle", bfs_oracle);
    report("fixed-point", fixed_point);
    report("f3-corridor", f3_scenario);
    report("engine-audit", engine_audit);
    report("determinism", determinism);
    report("inverted-u", inverted_u);
    report("baseline-ordering", baseline_ordering);
    std::printf("%d failed\n", failures);
    return failures == 0 ? 0 : 1;
}

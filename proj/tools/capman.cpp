#include "capman/bench.hpp"
#include "capman/ca.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#ifdef CAPMAN_WITH_SERVER
#include "capman/server.hpp"
#endif

#ifndef CAPMAN_DEFAULT_MAZE
#define CAPMAN_DEFAULT_MAZE "mazes/classic.txt"
#endif

namespace {

using namespace capman;

constexpr int kExitConfig = 2;
constexpr int kExitFault = 3;

struct Common {
    std::string maze = CAPMAN_DEFAULT_MAZE;
    std::string config;
    std::string ghosts = "random";
    int games = 100;
    std::uint64_t seed = 0;
    int workers = 0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--maze", c.maze, "maze file")->capture_default_str();
    app->add_option("--config", c.config, "game config file (key=value)");
    app->add_option("--ghosts", c.ghosts, "ghost team: random | random-noreverse")->capture_default_str();
    app->add_option("--games", c.games, "games per controller")->capture_default_str();
    app->add_option("--seed", c.seed, "base seed; game i uses seed+i")->capture_default_str();
    app->add_option("--workers", c.workers, "worker threads (default: CAPMAN_WORKERS or all cores)");
}

bench::ExperimentSpec make_spec(const Common& c, const std::string& pacman) {
    bench::ExperimentSpec spec;
    spec.pacman = bench::parse_pacman_spec(pacman);
    spec.ghosts = bench::parse_ghost_spec(c.ghosts);
    spec.maze_path = c.maze;
    spec.games = c.games;
    spec.base_seed = c.seed;
    spec.workers = c.workers;
    if (!c.config.empty()) spec.config = load_game_config(c.config);
    spec.validate();
    spec.maze = bench::load_maze_for(spec);
    return spec;
}

void emit_csv(const std::vector<bench::ExperimentStats>& stats, const std::string& out) {
    if (out.empty() || out == "-") {
        std::vector<bench::CsvRow> rows;
        for (const auto& s : stats) rows.push_back(bench::to_csv_row(s));
        std::cout << bench::format_csv(rows);
    } else {
        bench::write_csv(stats, out);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"capman: cellular-automaton Pac-Man controller, benchmarks and session server"};
    app.require_subcommand(1);

    Common bc;
    std::string bench_pacman = "ca";
    int bench_updates = -1;
    std::string bench_out;
    auto* bench_cmd = app.add_subcommand("bench", "run N games for one controller and write a results CSV");
    add_common(bench_cmd, bc);
    bench_cmd->add_option("--pacman", bench_pacman, "ca[:N] | starter | random | replay:<log>")->capture_default_str();
    bench_cmd->add_option("--updates", bench_updates, "CA update steps per tick (overrides ca:N)");
    bench_cmd->add_option("--out", bench_out, "CSV output path (default stdout)");

    Common sc;
    std::string stage1 = "1:91:10";
    std::string stage2;
    std::string sweep_out;
    bool sweep_table = false;
    auto* sweep_cmd = app.add_subcommand("sweep", "two-stage sweep over the CA update count");
    add_common(sweep_cmd, sc);
    sweep_cmd->add_option("--stage1", stage1, "lo:hi:step or comma list")->capture_default_str();
    sweep_cmd->add_option("--stage2", stage2, "lo:hi window (default: derived from stage 1)");
    sweep_cmd->add_option("--out", sweep_out, "CSV output path (default stdout)");
    sweep_cmd->add_flag("--table", sweep_table, "print stage tables to stderr");

    std::vector<std::string> compare_files;
    auto* compare_cmd = app.add_subcommand("compare", "side-by-side report of results CSVs");
    compare_cmd->add_option("files", compare_files, "results CSVs (bench or human)")->required()->check(CLI::ExistingFile);

    Common pc;
    std::string play_pacman = "ca";
    int play_updates = -1;
    bool dump_ca = false;
    int overlay_updates = 17;
    std::string dump_file;
    auto* play_cmd = app.add_subcommand("play", "play one headless game and print its result");
    add_common(play_cmd, pc);
    play_cmd->add_option("--pacman", play_pacman, "ca[:N] | starter | random | replay:<log>")->capture_default_str();
    play_cmd->add_option("--updates", play_updates, "CA update steps per tick (overrides ca:N)");
    play_cmd->add_flag("--dump-ca", dump_ca, "print the CA grid after every tick");
    play_cmd->add_option("--overlay-updates", overlay_updates, "update steps for the CA dump of non-CA controllers")
        ->capture_default_str();
    play_cmd->add_option("--dump-file", dump_file, "write CA dumps here instead of stdout");

#ifdef CAPMAN_WITH_SERVER
    server::ServerConfig srv;
    std::string srv_maze = CAPMAN_DEFAULT_MAZE;
    std::string srv_config;
    auto* serve_cmd = app.add_subcommand("serve", "WebSocket session server with static UI");
    serve_cmd->add_option("--host", srv.host)->capture_default_str();
    serve_cmd->add_option("--port", srv.port)->capture_default_str();
    serve_cmd->add_option("--maze", srv_maze)->capture_default_str();
    serve_cmd->add_option("--config", srv_config, "game config file (key=value)");
    serve_cmd->add_option("--ui-dir", srv.ui_dir, "directory served at /");
    serve_cmd->add_option("--results", srv.results_path, "human results CSV (appended)")->capture_default_str();
    serve_cmd->add_option("--tick-ms", srv.session.tick_ms)->capture_default_str();
    serve_cmd->add_option("--seed", srv.session.base_seed)->capture_default_str();
    serve_cmd->add_option("--updates", srv.session.overlay_updates, "CA update steps for the overlay")->capture_default_str();
    std::string srv_mode = "human";
    serve_cmd->add_option("--mode", srv_mode, "human | watch-ai")->capture_default_str();
    serve_cmd->add_option("--ai", srv.session.ai_spec, "controller for watch-ai: ca[:N] | starter | random")->capture_default_str();
    serve_cmd->add_option("--ghosts", srv.session.ghosts, "ghost team: random | random-noreverse")->capture_default_str();
    serve_cmd->add_flag("--overlay", srv.session.overlay, "send the CA grid with every state frame");
#endif

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench_cmd->parsed()) {
            auto spec = make_spec(bc, bench_pacman);
            if (bench_updates >= 0) {
                if (spec.pacman.kind != bench::PacmanSpec::Kind::Ca) throw bench::SpecError("--updates needs a CA controller");
                spec.pacman.ca.updates_n = bench_updates;
                spec.validate();
            }
            const auto stats = bench::run_experiment(spec);
            emit_csv({stats}, bench_out);
            std::fprintf(stderr, "%s: avg %.2f sd %.2f min %lld max %lld over %d games\n", stats.name().c_str(), stats.avg,
                         stats.stddev, static_cast<long long>(stats.min), static_cast<long long>(stats.max), bc.games);
        } else if (sweep_cmd->parsed()) {
            auto spec = make_spec(sc, "ca");
            const auto grid = bench::parse_update_list(stage1);
            std::optional<std::pair<int, int>> window;
            if (!stage2.empty()) {
                const auto w = bench::parse_update_list(stage2 + (stage2.find(':') != std::string::npos ? ":1" : ""));
                window = std::pair{w.front(), w.back()};
            }
            const auto res = bench::sweep_updates(grid, window, spec, [](int stage, const bench::ExperimentStats& s) {
                std::fprintf(stderr, "stage %d  %-6s avg %10.2f  sd %10.2f\n", stage, s.name().c_str(), s.avg, s.stddev);
            });
            if (sweep_table) {
                std::cerr << "stage 1\n" << bench::sweep_table(res.stage1);
                std::cerr << "stage 2 [" << res.window.first << ", " << res.window.second << "]\n"
                          << bench::sweep_table(res.stage2);
            }
            std::vector<bench::ExperimentStats> all = res.stage1;
            for (const auto& s : res.stage2) {
                const bool dup = std::any_of(all.begin(), all.end(), [&](const bench::ExperimentStats& a) {
                    return a.spec.pacman.ca.updates_n == s.spec.pacman.ca.updates_n;
                });
                if (!dup) all.push_back(s);
            }
            std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
                return a.spec.pacman.ca.updates_n < b.spec.pacman.ca.updates_n;
            });
            emit_csv(all, sweep_out);
        } else if (compare_cmd->parsed()) {
            std::vector<bench::ReportRow> rows;
            for (const auto& f : compare_files) {
                auto r = bench::report_rows_from_file(f);
                rows.insert(rows.end(), r.begin(), r.end());
            }
            std::cout << bench::compare_report(std::move(rows));
        } else if (play_cmd->parsed()) {
            auto spec = make_spec(pc, play_pacman);
            if (play_updates >= 0) {
                if (spec.pacman.kind != bench::PacmanSpec::Kind::Ca) throw bench::SpecError("--updates needs a CA controller");
                spec.pacman.ca.updates_n = play_updates;
                spec.validate();
            }
            auto pac = bench::make_pacman(spec.pacman);
            auto ghosts = bench::make_ghosts(spec.ghosts);

            std::ofstream dump_stream;
            std::ostream* dump = &std::cout;
            if (!dump_file.empty()) {
                dump_stream.open(dump_file, std::ios::binary | std::ios::trunc);
                if (!dump_stream) throw bench::IoError("cannot write " + dump_file);
                dump = &dump_stream;
            }
            auto* ca_pac = dynamic_cast<ca::CaPacman*>(pac.get());
            ca::CAParams overlay_params;
            overlay_params.updates_n = overlay_updates;
            ca::CaPacman overlay(overlay_params);
            overlay.reset(spec.base_seed);

            TickObserver obs;
            if (dump_ca) {
                obs = [&](const GameState& after, std::span<const Event>) {
                    if (after.over) return;
                    const ca::CAGrid* grid = nullptr;
                    if (ca_pac) {
                        grid = &ca_pac->last_grid();
                    } else {
                        overlay.decide(after);
                        grid = &overlay.last_grid();
                    }
                    *dump << "tick " << after.tick << '\n' << grid->dump_values() << grid->dump_decays() << '\n';
                };
            }
            const auto r = run_game(*pac, *ghosts, spec.maze, spec.config, spec.base_seed, obs);
            std::cout << "controller=" << pac->name() << " score=" << r.final_score << " levels=" << r.levels_cleared
                      << " ticks=" << r.ticks_survived << " seed=" << r.seed << '\n';
#ifdef CAPMAN_WITH_SERVER
        } else if (serve_cmd->parsed()) {
            auto maze = std::make_shared<const Maze>(load_maze(srv_maze));
            if (!srv_config.empty()) srv.session.game = load_game_config(srv_config);
            srv.session.mode = server::parse_mode(srv_mode);
            return server::run_server(maze, srv);
#endif
        }
    } catch (const ControllerFault& e) {
        std::fprintf(stderr, "controller fault: %s\n", e.what());
        return kExitFault;
    } catch (const MazeError& e) {
        std::fprintf(stderr, "maze error: %s\n", e.what());
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const bench::MazeLoadError& e) {
        std::fprintf(stderr, "maze error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

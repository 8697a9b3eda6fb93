#pragma once

#include "capman/baselines.hpp"
#include "capman/ca.hpp"
#include "capman/engine.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace capman::bench {

class MazeLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PacmanSpec {
    enum class Kind { Ca, Starter, Random, HumanReplay };

    Kind kind = Kind::Ca;
    ca::CAParams ca;
    StarterConfig starter;
    std::filesystem::path replay;

    /// Display name: "CA-17", "StarterPacMan", "random", "replay:<file>".
    std::string label() const;
};

/// "ca", "ca:<N>", "starter", "random", "replay:<path>".
PacmanSpec parse_pacman_spec(std::string_view text);

struct GhostSpec {
    ReversePolicy policy = ReversePolicy::Allow;
    std::string label() const;
};

/// "random" or "random-noreverse".
GhostSpec parse_ghost_spec(std::string_view text);

std::unique_ptr<PacmanController> make_pacman(const PacmanSpec& spec);
std::unique_ptr<GhostTeamController> make_ghosts(const GhostSpec& spec);

struct ExperimentSpec {
    PacmanSpec pacman;
    GhostSpec ghosts;
    std::filesystem::path maze_path;
    std::shared_ptr<const Maze> maze;  // used instead of maze_path when set
    int games = 100;
    std::uint64_t base_seed = 0;
    GameConfig config;
    int workers = 0;  // 0: CAPMAN_WORKERS or hardware concurrency

    std::string name() const { return pacman.label(); }
    void validate() const;
};

struct ScoreSummary {
    double avg = 0.0;
    double stddev = 0.0;  // population
    std::int64_t min = 0;
    std::int64_t max = 0;
};

/// Two-pass mean and population standard deviation, cross-checked against a
/// single-pass Welford accumulation.
ScoreSummary summarize(std::span<const std::int64_t> scores);

struct ExperimentStats {
    ExperimentSpec spec;
    double avg = 0.0;
    double stddev = 0.0;
    std::int64_t min = 0;
    std::int64_t max = 0;
    std::vector<GameResult> per_game;

    std::string name() const { return spec.name(); }
};

/// Pool size: `requested` if > 0, else CAPMAN_WORKERS, else hardware concurrency.
int resolve_workers(int requested);

std::shared_ptr<const Maze> load_maze_for(const ExperimentSpec& spec);

/// Game i is played with seed base_seed + i; results are gathered by index.
ExperimentStats run_experiment(const ExperimentSpec& spec);

/// "lo:hi:step" (inclusive) or a comma list "1,17,91".
std::vector<int> parse_update_list(std::string_view text);

/// Stage-2 window: the stage-1 grid point whose neighbourhood (itself and its
/// immediate grid neighbours) has the highest mean score, widened by one grid
/// step on each side and clamped to the grid.
std::pair<int, int> stage2_window(std::span<const int> grid, std::span<const double> means);

struct SweepResult {
    std::vector<ExperimentStats> stage1;
    std::pair<int, int> window;
    std::vector<ExperimentStats> stage2;
};

using SweepProgress = std::function<void(int stage, const ExperimentStats&)>;

SweepResult sweep_updates(std::span<const int> stage1, std::optional<std::pair<int, int>> window,
                          const ExperimentSpec& tmpl, const SweepProgress& progress = {});

/// One results-CSV row: `updates,games,avg,stddev,min,max,seed`.
struct CsvRow {
    std::optional<int> updates;  // empty for non-CA controllers
    int games = 0;
    double avg = 0.0;
    double stddev = 0.0;
    std::int64_t min = 0;
    std::int64_t max = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::string_view kCsvHeader = "updates,games,avg,stddev,min,max,seed";

CsvRow to_csv_row(const ExperimentStats& stats);
std::string format_csv(std::span<const CsvRow> rows);
std::vector<CsvRow> parse_csv(std::string_view text);
void write_csv(std::span<const ExperimentStats> stats, const std::filesystem::path& path);

/// A finished human game as recorded by the session server:
/// `participant,game_index,score,levels,ticks,seed`.
struct HumanRow {
    std::string participant;
    int game_index = 0;
    std::int64_t score = 0;
    int levels = 0;
    int ticks = 0;
    std::uint64_t seed = 0;
};

inline constexpr std::string_view kHumanCsvHeader = "participant,game_index,score,levels,ticks,seed";

std::string format_human_row(const HumanRow& row);
std::vector<HumanRow> parse_human_csv(std::string_view text);

struct ReportRow {
    std::string controller;
    double avg = 0.0;
    double stddev = 0.0;
    std::int64_t min = 0;
    std::int64_t max = 0;
};

ReportRow report_row(const ExperimentStats& stats);

/// Rows of a results file of either schema. Bench rows are named "CA-<N>"
/// (or the file stem when `updates` is empty); human rows are aggregated
/// per participant as "Human <participant>".
std::vector<ReportRow> report_rows_from_file(const std::filesystem::path& path);

/// Text table sorted by average, descending; equal averages keep name order.
std::string compare_report(std::vector<ReportRow> rows);
std::string compare_report(std::span<const ExperimentStats> stats);

/// `Update Steps | Average | Standard Deviation | Min Score | Max Score` table.
std::string sweep_table(std::span<const ExperimentStats> rows);

}  // namespace capman::bench

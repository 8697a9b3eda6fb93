#include "capman/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace capman::bench {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    const std::string s = trim(text);
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
        throw SpecError("bad " + std::string(what) + ": '" + s + "'");
    }
    return v;
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) out.push_back(line);
    }
    return out;
}

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string PacmanSpec::label() const {
    switch (kind) {
        case Kind::Ca: return "CA-" + std::to_string(ca.updates_n);
        case Kind::Starter: return "StarterPacMan";
        case Kind::Random: return "random";
        case Kind::HumanReplay: return "replay:" + replay.filename().string();
    }
    return "?";
}

PacmanSpec parse_pacman_spec(std::string_view text) {
    PacmanSpec spec;
    const auto colon = text.find(':');
    const std::string head(text.substr(0, colon));
    const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    if (head == "ca") {
        spec.kind = PacmanSpec::Kind::Ca;
        if (!arg.empty()) spec.ca.updates_n = parse_number<int>(arg, "update count");
        try {
            spec.ca.validate();
        } catch (const std::invalid_argument& e) {
            throw SpecError(e.what());
        }
    } else if (head == "starter" && arg.empty()) {
        spec.kind = PacmanSpec::Kind::Starter;
    } else if (head == "random" && arg.empty()) {
        spec.kind = PacmanSpec::Kind::Random;
    } else if (head == "replay" && !arg.empty()) {
        spec.kind = PacmanSpec::Kind::HumanReplay;
        spec.replay = std::string(arg);
    } else {
        throw SpecError("unknown pacman controller '" + std::string(text) + "'");
    }
    return spec;
}

std::string GhostSpec::label() const {
    return policy == ReversePolicy::Allow ? "random" : "random-noreverse";
}

GhostSpec parse_ghost_spec(std::string_view text) {
    if (text == "random") return {ReversePolicy::Allow};
    if (text == "random-noreverse") return {ReversePolicy::NoReverse};
    throw SpecError("unknown ghost controller '" + std::string(text) + "'");
}

std::unique_ptr<PacmanController> make_pacman(const PacmanSpec& spec) {
    switch (spec.kind) {
        case PacmanSpec::Kind::Ca: return ca::ca_pacman_controller(spec.ca);
        case PacmanSpec::Kind::Starter: return starter_pacman(spec.starter);
        case PacmanSpec::Kind::Random: return std::make_unique<RandomPacman>();
        case PacmanSpec::Kind::HumanReplay:
            return std::make_unique<ReplayPacman>(parse_replay_log(read_file(spec.replay)));
    }
    throw SpecError("bad pacman spec");
}

std::unique_ptr<GhostTeamController> make_ghosts(const GhostSpec& spec) {
    return random_ghost_team(0, spec.policy);
}

void ExperimentSpec::validate() const {
    if (games <= 0) throw SpecError("games must be > 0");
    if (!maze && maze_path.empty()) throw SpecError("no maze given");
    if (pacman.kind == PacmanSpec::Kind::Ca) {
        try {
            pacman.ca.validate();
        } catch (const std::invalid_argument& e) {
            throw SpecError(e.what());
        }
    }
    try {
        config.validate();
    } catch (const std::exception& e) {
        throw SpecError(e.what());
    }
}

ScoreSummary summarize(std::span<const std::int64_t> scores) {
    if (scores.empty()) throw std::invalid_argument("no scores to summarize");
    const double n = static_cast<double>(scores.size());
    double sum = 0.0;
    for (auto s : scores) sum += static_cast<double>(s);
    const double mean = sum / n;
    double ss = 0.0;
    for (auto s : scores) ss += (static_cast<double>(s) - mean) * (static_cast<double>(s) - mean);

    double w_mean = 0.0;
    double w_m2 = 0.0;
    std::size_t k = 0;
    for (auto s : scores) {
        ++k;
        const double x = static_cast<double>(s);
        const double delta = x - w_mean;
        w_mean += delta / static_cast<double>(k);
        w_m2 += delta * (x - w_mean);
    }
    const double tol = 1e-9 * std::max(1.0, std::abs(mean));
    if (std::abs(w_mean - mean) > tol || std::abs(w_m2 - ss) > 1e-6 * std::max(1.0, ss)) {
        throw std::logic_error("mean/variance cross-check failed");
    }

    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    return {mean, std::sqrt(ss / n), *lo, *hi};
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CAPMAN_WORKERS"); env && *env) {
        int v = 0;
        const std::string_view s(env);
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc{} && p == s.data() + s.size() && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::shared_ptr<const Maze> load_maze_for(const ExperimentSpec& spec) {
    if (spec.maze) return spec.maze;
    try {
        return std::make_shared<const Maze>(load_maze(spec.maze_path));
    } catch (const MazeError& e) {
        throw MazeLoadError(spec.maze_path.string() + ": " + e.what());
    }
}

ExperimentStats run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto maze = load_maze_for(spec);
    const int workers = std::min(resolve_workers(spec.workers), spec.games);

    std::vector<GameResult> results(static_cast<std::size_t>(spec.games));
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mu;

    auto work = [&] {
        try {
            auto pac = make_pacman(spec.pacman);
            auto ghosts = make_ghosts(spec.ghosts);
            while (!failed) {
                const int i = next.fetch_add(1);
                if (i >= spec.games) break;
                const std::uint64_t seed = spec.base_seed + static_cast<std::uint64_t>(i);
                results[static_cast<std::size_t>(i)] = run_game(*pac, *ghosts, maze, spec.config, seed);
            }
        } catch (...) {
            std::lock_guard lock(error_mu);
            if (!error) error = std::current_exception();
            failed = true;
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (error) std::rethrow_exception(error);

    std::vector<std::int64_t> scores;
    scores.reserve(results.size());
    for (const auto& r : results) scores.push_back(r.final_score);
    const auto sum = summarize(scores);

    ExperimentStats out;
    out.spec = spec;
    out.spec.maze = maze;
    out.avg = sum.avg;
    out.stddev = sum.stddev;
    out.min = sum.min;
    out.max = sum.max;
    out.per_game = std::move(results);
    return out;
}

std::vector<int> parse_update_list(std::string_view text) {
    std::vector<int> out;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw SpecError("range must be lo:hi:step");
        const int lo = parse_number<int>(parts[0], "range start");
        const int hi = parse_number<int>(parts[1], "range end");
        const int st = parse_number<int>(parts[2], "range step");
        if (st <= 0 || lo > hi || lo < 0) throw SpecError("bad range '" + std::string(text) + "'");
        for (int v = lo; v <= hi; v += st) out.push_back(v);
    } else {
        for (const auto& p : split(text, ',')) out.push_back(parse_number<int>(p, "update count"));
        for (int v : out) {
            if (v < 0) throw SpecError("update counts must be >= 0");
        }
    }
    if (out.empty()) throw SpecError("empty update list");
    return out;
}

std::pair<int, int> stage2_window(std::span<const int> grid, std::span<const double> means) {
    if (grid.empty() || grid.size() != means.size()) throw std::invalid_argument("grid and means must match");
    const auto n = grid.size();
    std::size_t best = 0;
    double best_mean = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i == 0 ? 0 : i - 1;
        const std::size_t b = std::min(n - 1, i + 1);
        double sum = 0.0;
        for (std::size_t j = a; j <= b; ++j) sum += means[j];
        const double m = sum / static_cast<double>(b - a + 1);
        if (m > best_mean) {
            best_mean = m;
            best = i;
        }
    }
    return {grid[best == 0 ? 0 : best - 1], grid[std::min(n - 1, best + 1)]};
}

SweepResult sweep_updates(std::span<const int> stage1, std::optional<std::pair<int, int>> window,
                          const ExperimentSpec& tmpl, const SweepProgress& progress) {
    if (stage1.empty()) throw SpecError("empty stage-1 grid");
    SweepResult out;
    ExperimentSpec spec = tmpl;
    spec.pacman.kind = PacmanSpec::Kind::Ca;
    spec.maze = load_maze_for(tmpl);

    auto run_n = [&](int n, int stage) {
        spec.pacman.ca.updates_n = n;
        auto stats = run_experiment(spec);
        if (progress) progress(stage, stats);
        return stats;
    };

    std::vector<double> means;
    for (int n : stage1) {
        out.stage1.push_back(run_n(n, 1));
        means.push_back(out.stage1.back().avg);
    }
    out.window = window ? *window : stage2_window(stage1, means);
    if (out.window.first > out.window.second) throw SpecError("stage-2 window is empty");
    for (int n = out.window.first; n <= out.window.second; ++n) out.stage2.push_back(run_n(n, 2));
    return out;
}

CsvRow to_csv_row(const ExperimentStats& stats) {
    CsvRow row;
    if (stats.spec.pacman.kind == PacmanSpec::Kind::Ca) row.updates = stats.spec.pacman.ca.updates_n;
    row.games = static_cast<int>(stats.per_game.size());
    row.avg = stats.avg;
    row.stddev = stats.stddev;
    row.min = stats.min;
    row.max = stats.max;
    row.seed = stats.spec.base_seed;
    return row;
}

std::string format_csv(std::span<const CsvRow> rows) {
    std::string out(kCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += r.updates ? std::to_string(*r.updates) : std::string{};
        out += ',' + std::to_string(r.games);
        out += ',' + fixed2(r.avg);
        out += ',' + fixed2(r.stddev);
        out += ',' + std::to_string(r.min);
        out += ',' + std::to_string(r.max);
        out += ',' + std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

std::vector<CsvRow> parse_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines[0]) != kCsvHeader) throw SpecError("not a results CSV (bad header)");
    std::vector<CsvRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != 7) throw SpecError("results CSV line " + std::to_string(i + 1) + ": expected 7 fields");
        CsvRow r;
        if (!trim(f[0]).empty()) r.updates = parse_number<int>(f[0], "updates");
        r.games = parse_number<int>(f[1], "games");
        r.avg = parse_number<double>(f[2], "avg");
        r.stddev = parse_number<double>(f[3], "stddev");
        r.min = parse_number<std::int64_t>(f[4], "min");
        r.max = parse_number<std::int64_t>(f[5], "max");
        r.seed = parse_number<std::uint64_t>(f[6], "seed");
        out.push_back(r);
    }
    return out;
}

void write_csv(std::span<const ExperimentStats> stats, const std::filesystem::path& path) {
    std::vector<CsvRow> rows;
    for (const auto& s : stats) rows.push_back(to_csv_row(s));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << format_csv(rows);
    if (!out) throw IoError("write failed: " + path.string());
}

std::string format_human_row(const HumanRow& r) {
    return r.participant + ',' + std::to_string(r.game_index) + ',' + std::to_string(r.score) + ',' +
           std::to_string(r.levels) + ',' + std::to_string(r.ticks) + ',' + std::to_string(r.seed);
}

std::vector<HumanRow> parse_human_csv(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty() || trim(lines[0]) != kHumanCsvHeader) throw SpecError("not a human results CSV (bad header)");
    std::vector<HumanRow> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split(lines[i], ',');
        if (f.size() != 6) throw SpecError("human CSV line " + std::to_string(i + 1) + ": expected 6 fields");
        HumanRow r;
        r.participant = trim(f[0]);
        r.game_index = parse_number<int>(f[1], "game_index");
        r.score = parse_number<std::int64_t>(f[2], "score");
        r.levels = parse_number<int>(f[3], "levels");
        r.ticks = parse_number<int>(f[4], "ticks");
        r.seed = parse_number<std::uint64_t>(f[5], "seed");
        out.push_back(std::move(r));
    }
    return out;
}

ReportRow report_row(const ExperimentStats& s) {
    return {s.name(), s.avg, s.stddev, s.min, s.max};
}

std::vector<ReportRow> report_rows_from_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const auto first = text.substr(0, text.find('\n'));
    std::vector<ReportRow> out;
    if (trim(first) == kHumanCsvHeader) {
        std::map<std::string, std::vector<std::int64_t>> by_participant;
        for (const auto& r : parse_human_csv(text)) by_participant[r.participant].push_back(r.score);
        for (const auto& [who, scores] : by_participant) {
            const auto s = summarize(scores);
            out.push_back({"Human " + who, s.avg, s.stddev, s.min, s.max});
        }
        return out;
    }
    for (const auto& r : parse_csv(text)) {
        const std::string name = r.updates ? "CA-" + std::to_string(*r.updates) : path.stem().string();
        out.push_back({name, r.avg, r.stddev, r.min, r.max});
    }
    return out;
}

std::string compare_report(std::vector<ReportRow> rows) {
    if (rows.size() < 2) throw SpecError("compare needs at least two controllers");
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.avg != b.avg) return a.avg > b.avg;
        return a.controller < b.controller;
    });
    std::size_t w = std::string_view("Controller").size();
    for (const auto& r : rows) w = std::max(w, r.controller.size());
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-*s  %12s  %12s  %10s  %10s\n", static_cast<int>(w), "Controller", "Average",
                  "StdDev", "Min", "Max");
    out += buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %12.2f  %12.2f  %10lld  %10lld\n", static_cast<int>(w),
                      r.controller.c_str(), r.avg, r.stddev, static_cast<long long>(r.min),
                      static_cast<long long>(r.max));
        out += buf;
    }
    return out;
}

std::string compare_report(std::span<const ExperimentStats> stats) {
    std::vector<ReportRow> rows;
    for (const auto& s : stats) rows.push_back(report_row(s));
    return compare_report(std::move(rows));
}

std::string sweep_table(std::span<const ExperimentStats> rows) {
    std::string out = "Update Steps | Average | Standard Deviation | Min Score | Max Score\n";
    for (const auto& s : rows) {
        out += std::to_string(s.spec.pacman.ca.updates_n) + " | " + fixed2(s.avg) + " | " + fixed2(s.stddev) + " | " +
               std::to_string(s.min) + " | " + std::to_string(s.max) + "\n";
    }
    return out;
}

}  // namespace capman::bench

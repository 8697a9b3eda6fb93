#include "capman/bench.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace capman;
using namespace capman::bench;

namespace {

std::filesystem::path tiny_path() {
    return std::filesystem::path(CAPMAN_MAZE_DIR) / "tiny.txt";
}

ExperimentSpec tiny_spec(const std::string& pacman, int games) {
    ExperimentSpec spec;
    spec.pacman = parse_pacman_spec(pacman);
    spec.maze_path = tiny_path();
    spec.games = games;
    spec.base_seed = 100;
    spec.config.max_ticks_per_level = 300;
    spec.config.max_levels = 3;
    return spec;
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("capman_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentStats fake(const std::string& name, double avg, std::optional<int> updates = std::nullopt) {
    ExperimentStats s;
    if (updates) {
        s.spec.pacman.kind = PacmanSpec::Kind::Ca;
        s.spec.pacman.ca.updates_n = *updates;
    } else {
        s.spec.pacman.kind = name == "random" ? PacmanSpec::Kind::Random : PacmanSpec::Kind::Starter;
    }
    s.avg = avg;
    s.min = static_cast<std::int64_t>(avg) - 1;
    s.max = static_cast<std::int64_t>(avg) + 1;
    s.per_game.resize(3);
    return s;
}

int data_rows(const std::string& report) {
    return static_cast<int>(std::count(report.begin(), report.end(), '\n')) - 1;
}

}  // namespace

TEST_CASE("summarize") {
    const std::vector<std::int64_t> s{10, 20, 30};
    const auto r = summarize(s);
    CHECK(r.avg == 20.0);
    CHECK(r.min == 10);
    CHECK(r.max == 30);
    CHECK(r.stddev == doctest::Approx(std::sqrt(200.0 / 3.0)));
    const std::vector<std::int64_t> one{42};
    const auto o = summarize(one);
    CHECK(o.avg == 42.0);
    CHECK(o.stddev == 0.0);
    CHECK(o.min == 42);
    CHECK(o.max == 42);
    CHECK_THROWS(summarize(std::vector<std::int64_t>{}));
}

TEST_CASE("controller specs") {
    CHECK(parse_pacman_spec("ca").ca.updates_n == 17);
    CHECK(parse_pacman_spec("ca:5").label() == "CA-5");
    CHECK(parse_pacman_spec("starter").label() == "StarterPacMan");
    CHECK(parse_pacman_spec("random").kind == PacmanSpec::Kind::Random);
    CHECK(parse_pacman_spec("replay:/tmp/x.log").kind == PacmanSpec::Kind::HumanReplay);
    CHECK_THROWS_AS(parse_pacman_spec("ca:-3"), SpecError);
    CHECK_THROWS_AS(parse_pacman_spec("ca:x"), SpecError);
    CHECK_THROWS_AS(parse_pacman_spec("genius"), SpecError);
    CHECK(parse_ghost_spec("random").policy == ReversePolicy::Allow);
    CHECK(parse_ghost_spec("random-noreverse").policy == ReversePolicy::NoReverse);
    CHECK_THROWS_AS(parse_ghost_spec("smart"), SpecError);
}

TEST_CASE("run_experiment: single game and invariants") {
    const auto one = run_experiment(tiny_spec("starter", 1));
    CHECK(one.per_game.size() == 1);
    CHECK(one.avg == one.min);
    CHECK(one.avg == one.max);
    CHECK(one.stddev == 0.0);
    CHECK(one.per_game[0].seed == 100);

    const auto many = run_experiment(tiny_spec("ca:3", 8));
    CHECK(many.per_game.size() == 8);
    CHECK(many.min <= many.avg);
    CHECK(many.avg <= many.max);
    CHECK(many.stddev >= 0.0);
    for (std::size_t i = 0; i < 8; ++i) CHECK(many.per_game[i].seed == 100 + i);
}

TEST_CASE("run_experiment: repeatable, and parallel equals sequential") {
    auto spec = tiny_spec("ca:5", 12);
    spec.workers = 1;
    const auto seq = run_experiment(spec);
    CHECK(run_experiment(spec).per_game == seq.per_game);
    spec.workers = 4;
    const auto par = run_experiment(spec);
    CHECK(par.per_game == seq.per_game);
    CHECK(par.avg == seq.avg);
    CHECK(par.stddev == seq.stddev);
}

TEST_CASE("run_experiment: a single game re-runs in isolation") {
    auto spec = tiny_spec("starter", 5);
    const auto all = run_experiment(spec);
    spec.games = 1;
    spec.base_seed = 103;
    CHECK(run_experiment(spec).per_game[0] == all.per_game[3]);
}

TEST_CASE("run_experiment: errors") {
    auto spec = tiny_spec("starter", 1);
    spec.maze_path = "/nonexistent/maze.txt";
    CHECK_THROWS_AS(run_experiment(spec), MazeLoadError);
    spec = tiny_spec("starter", 0);
    CHECK_THROWS_AS(run_experiment(spec), SpecError);
}

TEST_CASE("worker count resolution") {
    CHECK(resolve_workers(3) == 3);
    setenv("CAPMAN_WORKERS", "2", 1);
    CHECK(resolve_workers(0) == 2);
    setenv("CAPMAN_WORKERS", "junk", 1);
    CHECK(resolve_workers(0) >= 1);
    unsetenv("CAPMAN_WORKERS");
}

TEST_CASE("update lists") {
    const auto grid = parse_update_list("1:91:10");
    CHECK(grid == std::vector<int>{1, 11, 21, 31, 41, 51, 61, 71, 81, 91});
    CHECK(parse_update_list("1,17,91") == std::vector<int>{1, 17, 91});
    CHECK(parse_update_list("5") == std::vector<int>{5});
    CHECK_THROWS_AS(parse_update_list("9:1:1"), SpecError);
    CHECK_THROWS_AS(parse_update_list("1:9:0"), SpecError);
    CHECK_THROWS_AS(parse_update_list("1:9"), SpecError);
}

TEST_CASE("stage-2 window") {
    const std::vector<int> grid{1, 11, 21, 31, 41, 51, 61, 71, 81, 91};
    // stage-1 means of the published first evaluation
    const std::vector<double> paper{4547, 49480, 49030, 43492, 35395, 28794, 26193, 21039, 18038, 16883};
    CHECK(stage2_window(grid, paper) == std::pair{11, 31});
    // single peak at an edge
    const std::vector<double> edge{9, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    CHECK(stage2_window(grid, edge) == std::pair{1, 11});
    const std::vector<int> one{5};
    const std::vector<double> m{3};
    CHECK(stage2_window(one, m) == std::pair{5, 5});
}

TEST_CASE("sweep: row counts and stage-2 repeatability") {
    auto spec = tiny_spec("ca", 2);
    const std::vector<int> grid{1, 3, 5};
    const auto res = sweep_updates(grid, std::pair{2, 4}, spec);
    CHECK(res.stage1.size() == 3);
    CHECK(res.stage2.size() == 3);
    CHECK(res.stage2[0].spec.pacman.ca.updates_n == 2);
    CHECK(res.stage2[1].per_game == res.stage1[1].per_game);

    const std::vector<int> five{5};
    const auto again = sweep_updates(five, std::pair{5, 5}, spec);
    REQUIRE(again.stage2.size() == 1);
    CHECK(again.stage2[0].per_game == again.stage1[0].per_game);
    CHECK(again.stage2[0].avg == again.stage1[0].avg);

    const auto table = sweep_table(res.stage1);
    CHECK(table.rfind("Update Steps | Average | Standard Deviation | Min Score | Max Score\n", 0) == 0);
    CHECK(data_rows(table) == 3);
}

TEST_CASE("csv: header, rows, round trip") {
    CHECK(format_csv({}) == std::string(kCsvHeader) + "\n");

    const auto stats = run_experiment(tiny_spec("ca:4", 3));
    const auto path = temp_file("one.csv");
    write_csv(std::vector{stats}, path);
    const auto text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 2);
    CHECK(text.find('\r') == std::string::npos);
    const auto rows = parse_csv(text);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].updates == 4);
    CHECK(rows[0].games == 3);
    CHECK(std::abs(rows[0].avg - stats.avg) <= 0.005);
    CHECK(std::abs(rows[0].stddev - stats.stddev) <= 0.005);
    CHECK(rows[0].min == stats.min);
    CHECK(rows[0].max == stats.max);
    CHECK(rows[0].seed == 100);
    CHECK(format_csv(rows) == text);

    CsvRow r;
    r.games = 2;
    r.avg = 1.0 / 3.0;
    const std::vector<CsvRow> v{r};
    CHECK(format_csv(v) == std::string(kCsvHeader) + "\n,2,0.33,0.00,0,0,0\n");
    CHECK_THROWS(parse_csv("nope\n"));
    CHECK_THROWS(parse_csv(std::string(kCsvHeader) + "\n1,2,3\n"));

    CHECK_THROWS_AS(write_csv(std::vector{stats}, "/nonexistent/dir/out.csv"), IoError);
    std::filesystem::remove(path);
}

TEST_CASE("compare report") {
    const auto two = compare_report(std::vector{fake("starter", 100), fake("ca", 300, 17)});
    CHECK(two.find("CA-17") < two.find("StarterPacMan"));
    CHECK(two.rfind("Controller", 0) == 0);
    CHECK(two.find("Average") != std::string::npos);
    CHECK(two.find("StdDev") != std::string::npos);
    CHECK(data_rows(two) == 2);

    const auto tie = compare_report(std::vector{fake("starter", 200), fake("ca", 200, 5), fake("random", 200)});
    CHECK(tie.find("CA-5") < tie.find("StarterPacMan"));
    CHECK(tie.find("StarterPacMan") < tie.find("random"));
    CHECK(data_rows(tie) == 3);

    CHECK_THROWS(compare_report(std::vector{fake("starter", 1)}));
}

TEST_CASE("human results: format, parse, aggregate per participant") {
    std::string text = std::string(kHumanCsvHeader) + "\n";
    for (int who = 0; who < 10; ++who) {
        for (int g = 0; g < 10; ++g) {
            HumanRow r{"p" + std::to_string(who), g, 1000 * who + g, 1, 500, static_cast<std::uint64_t>(g)};
            text += format_human_row(r) + "\n";
        }
    }
    const auto rows = parse_human_csv(text);
    CHECK(rows.size() == 100);
    const auto path = temp_file("human.csv");
    std::ofstream(path, std::ios::binary) << text;
    const auto report_rows = report_rows_from_file(path);
    REQUIRE(report_rows.size() == 10);
    CHECK(report_rows[3].controller == "Human p3");
    CHECK(report_rows[3].avg == 3004.5);
    CHECK(report_rows[3].min == 3000);
    CHECK(report_rows[3].max == 3009);
    CHECK(data_rows(compare_report(report_rows)) == 10);
    std::filesystem::remove(path);
}

TEST_CASE("bench CSV rows are named by update count or file stem") {
    auto starter = run_experiment(tiny_spec("starter", 2));
    auto ca = run_experiment(tiny_spec("ca:2", 2));
    const auto p1 = temp_file("starter.csv");
    const auto p2 = temp_file("sweep.csv");
    write_csv(std::vector{starter}, p1);
    write_csv(std::vector{ca}, p2);
    const auto a = report_rows_from_file(p1);
    const auto b = report_rows_from_file(p2);
    CHECK(a[0].controller == "capman_test_starter");
    CHECK(b[0].controller == "CA-2");
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

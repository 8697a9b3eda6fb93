#include "capman/server.hpp"

#include <fstream>

namespace capman::server {

std::string_view to_string(Mode m) noexcept {
    return m == Mode::Human ? "human" : "watch-ai";
}

Mode parse_mode(std::string_view s) {
    if (s == "human") return Mode::Human;
    if (s == "watch-ai") return Mode::WatchAi;
    throw std::invalid_argument("unknown mode '" + std::string(s) + "' (human | watch-ai)");
}

void SessionConfig::validate() const {
    if (tick_ms < 16) throw std::invalid_argument("tick_ms must be >= 16");
    if (overlay_updates < 0) throw std::invalid_argument("overlay update count must be >= 0");
    if (mode == Mode::WatchAi) (void)bench::parse_pacman_spec(ai_spec);
    (void)bench::parse_ghost_spec(ghosts);
    game.validate();
}

ResultsSink::ResultsSink(std::filesystem::path path) : path_(std::move(path)) {}

void ResultsSink::append(const bench::HumanRow& row) {
    std::lock_guard lock(mu_);
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path_, ec) || std::filesystem::file_size(path_, ec) == 0;
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw bench::IoError("cannot append to " + path_.string());
    if (fresh) out << bench::kHumanCsvHeader << '\n';
    out << bench::format_human_row(row) << '\n';
    if (!out) throw bench::IoError("write failed: " + path_.string());
}

namespace {

json xy(Position p) {
    return json::array({p.col, p.row});
}

json positions(const std::vector<Position>& ps) {
    json out = json::array();
    for (auto p : ps) out.push_back(xy(p));
    return out;
}

json overlay_json(const ca::CAGrid& grid) {
    const auto& maze = grid.maze();
    json values = json::array();
    json decays = json::array();
    for (int y = 0; y < maze.height(); ++y) {
        std::string row(static_cast<std::size_t>(maze.width()), '#');
        json drow = json::array();
        for (int x = 0; x < maze.width(); ++x) {
            const int c = maze.index_of(Position{x, y});
            if (c == Maze::kNone) {
                drow.push_back(nullptr);
                continue;
            }
            const auto& cell = grid.cell(c);
            row[static_cast<std::size_t>(x)] = ca::to_char(cell.value);
            drow.push_back(cell.decay);
        }
        values.push_back(std::move(row));
        decays.push_back(std::move(drow));
    }
    return {{"values", values}, {"decays", decays}};
}

}  // namespace

json state_frame(const GameState& s, std::span<const Event> events, const ca::CAGrid* overlay) {
    json ghosts = json::array();
    for (const auto& g : s.ghosts) {
        ghosts.push_back({{"id", g.id},
                          {"pos", xy(g.pos)},
                          {"dir", to_string(g.facing)},
                          {"edible", g.edible_remaining},
                          {"lair", g.lair_remaining}});
    }
    json ev = json::array();
    for (const auto& e : events) {
        json j = {{"kind", to_string(e.kind)}};
        if (e.kind == EventKind::AteGhost) j["ghost"] = e.ghost;
        ev.push_back(std::move(j));
    }
    json f = {{"v", kWireVersion},
              {"type", "state"},
              {"tick", s.tick},
              {"score", s.score},
              {"lives", s.lives},
              {"level", s.level},
              {"levels_cleared", s.levels_cleared},
              {"pacman", {{"pos", xy(s.pacman)}, {"dir", to_string(s.pacman_facing)}}},
              {"ghosts", ghosts},
              {"pills", positions(s.pill_positions())},
              {"powerpills", positions(s.powerpill_positions())},
              {"events", ev},
              {"over", s.over}};
    if (overlay) f["overlay"] = overlay_json(*overlay);
    return f;
}

json hello_frame(const Maze& maze, const SessionConfig& cfg) {
    std::vector<std::string> rows;
    const std::string text = maze.render();
    std::size_t start = 0;
    while (start < text.size()) {
        const auto nl = text.find('\n', start);
        rows.push_back(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
        if (nl == std::string::npos) break;
        start = nl + 1;
    }
    return {{"v", kWireVersion},
            {"type", "hello"},
            {"maze", {{"name", maze.name()}, {"width", maze.width()}, {"height", maze.height()}, {"rows", rows}}},
            {"mode", to_string(cfg.mode)},
            {"controller", cfg.mode == Mode::Human ? std::string("human") : bench::parse_pacman_spec(cfg.ai_spec).label()},
            {"tick_ms", cfg.tick_ms},
            {"overlay", cfg.overlay},
            {"config", render_game_config(cfg.game)}};
}

json error_frame(std::string_view reason) {
    return {{"v", kWireVersion}, {"type", "error"}, {"reason", reason}};
}

Session::Session(std::shared_ptr<const Maze> maze, SessionConfig cfg, ResultsSink* sink)
    : maze_(std::move(maze)), cfg_(std::move(cfg)), sink_(sink), queue_(std::make_shared<HumanInputQueue>()) {
    cfg_.validate();
    if (cfg_.mode == Mode::Human) {
        pacman_ = human_pacman(queue_);
    } else {
        pacman_ = bench::make_pacman(bench::parse_pacman_spec(cfg_.ai_spec));
    }
    ghosts_ = bench::make_ghosts(bench::parse_ghost_spec(cfg_.ghosts));
    if (cfg_.overlay && !dynamic_cast<ca::CaPacman*>(pacman_.get())) {
        ca::CAParams p;
        p.updates_n = cfg_.overlay_updates;
        overlay_ = std::make_unique<ca::CaPacman>(p);
    }
    new_game();
}

void Session::new_game() {
    ++game_index_;
    queue_->drain();
    const std::uint64_t seed = cfg_.base_seed + static_cast<std::uint64_t>(game_index_);
    runner_.emplace(*pacman_, *ghosts_, maze_, cfg_.game, seed);
    if (overlay_) overlay_->reset(seed);
}

json Session::hello() const {
    return hello_frame(*maze_, cfg_);
}

json Session::current_state() const {
    return state_frame(state(), {}, nullptr);
}

std::vector<json> Session::on_text(std::string_view text) {
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::parse_error&) {
        throw ProtocolError("malformed JSON");
    }
    if (!msg.is_object()) throw ProtocolError("frame must be a JSON object");
    if (!msg.contains("v") || !msg["v"].is_number_integer() || msg["v"].get<int>() != kWireVersion) {
        throw ProtocolError("unsupported wire version");
    }
    if (!msg.contains("type") || !msg["type"].is_string()) throw ProtocolError("missing frame type");
    const auto type = msg["type"].get<std::string>();

    if (type == "input") {
        if (!msg.contains("dir") || !msg["dir"].is_string()) throw ProtocolError("input without dir");
        const auto dir = parse_direction(msg["dir"].get<std::string>());
        if (!dir) throw ProtocolError("unknown direction '" + msg["dir"].get<std::string>() + "'");
        if (cfg_.mode == Mode::Human) queue_->push(*dir, state().tick);
        return {};
    }
    if (type != "control") throw ProtocolError("unknown frame type '" + type + "'");
    if (!msg.contains("verb") || !msg["verb"].is_string()) throw ProtocolError("control without verb");
    if (msg.contains("participant")) {
        if (!msg["participant"].is_string() || msg["participant"].get<std::string>().empty()) {
            throw ProtocolError("participant must be a non-empty string");
        }
        auto who = msg["participant"].get<std::string>();
        if (who.find_first_of(",\r\n") != std::string::npos) throw ProtocolError("participant may not contain ',' or newlines");
        participant_ = std::move(who);
    }
    const auto verb = msg["verb"].get<std::string>();
    if (verb == "start") {
        if (over()) {
            new_game();
            running_ = true;
            return {current_state()};
        }
        running_ = true;
        return {};
    }
    if (verb == "pause") {
        running_ = false;
        return {};
    }
    if (verb == "restart") {
        // the abandoned game is never recorded
        new_game();
        running_ = true;
        return {current_state()};
    }
    throw ProtocolError("unknown control verb '" + verb + "'");
}

std::vector<json> Session::on_tick() {
    if (!running_ || over()) return {};
    const ca::CAGrid* grid = nullptr;
    if (overlay_) {
        overlay_->decide(state());
        grid = &overlay_->last_grid();
    }
    const auto& events = runner_->tick();
    if (cfg_.overlay && !overlay_) grid = &static_cast<const ca::CaPacman&>(*pacman_).last_grid();
    std::vector<json> out{state_frame(state(), events, grid)};
    if (over()) {
        running_ = false;
        bool recorded = false;
        if (cfg_.mode == Mode::Human && sink_) {
            const auto r = runner_->result();
            sink_->append({participant_, game_index_, r.final_score, r.levels_cleared, r.ticks_survived, r.seed});
            recorded = true;
        }
        out.push_back(over_frame(recorded));
    }
    return out;
}

json Session::over_frame(bool recorded) const {
    const auto r = runner_->result();
    return {{"v", kWireVersion},
            {"type", "over"},
            {"result",
             {{"participant", participant_},
              {"game_index", game_index_},
              {"score", r.final_score},
              {"levels", r.levels_cleared},
              {"ticks", r.ticks_survived},
              {"seed", r.seed},
              {"recorded", recorded}}}};
}

}  // namespace capman::server

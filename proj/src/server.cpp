#include "capman/server.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

namespace capman::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

struct Shared {
    std::shared_ptr<const Maze> maze;
    ServerConfig cfg;
    ResultsSink sink;
};

std::string_view mime_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".ico") return "image/x-icon";
    if (ext == ".wasm") return "application/wasm";
    return "application/octet-stream";
}

// Maps a request target under ui_dir, refusing anything that climbs out of it.
std::optional<std::filesystem::path> static_path(const std::filesystem::path& root, std::string_view target) {
    if (const auto q = target.find_first_of("?#"); q != std::string_view::npos) target = target.substr(0, q);
    if (target.empty() || target.front() != '/') return std::nullopt;
    std::filesystem::path rel = std::filesystem::path(std::string(target.substr(1))).lexically_normal();
    if (rel.empty() || rel == ".") rel = "index.html";
    for (const auto& part : rel) {
        if (part == "..") return std::nullopt;
    }
    auto full = root / rel;
    std::error_code ec;
    if (std::filesystem::is_directory(full, ec)) full /= "index.html";
    return full;
}

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, Shared& shared)
        : ws_(std::move(socket)),
          timer_(ws_.get_executor()),
          tick_(std::chrono::milliseconds(shared.cfg.session.tick_ms)),
          game_(shared.maze, shared.cfg.session, &shared.sink) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (ec) return;
            self->send(self->game_.hello());
            self->send(self->game_.current_state());
            self->read();
        });
    }

private:
    void read() {
        ws_.async_read(buf_, [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            gone_ = true;
            timer_.cancel();
            return;
        }
        const std::string text = beast::buffers_to_string(buf_.data());
        buf_.consume(buf_.size());
        try {
            for (auto& f : game_.on_text(text)) send(f);
        } catch (const ProtocolError& e) {
            close_with(e.what());
            return;
        }
        if (game_.running() && !ticking_) {
            ticking_ = true;
            next_ = std::chrono::steady_clock::now() + tick_;
            arm();
        }
        read();
    }

    void arm() {
        timer_.expires_at(next_);
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) { self->on_timer(ec); });
    }

    void on_timer(beast::error_code ec) {
        if (ec || gone_ || closing_ || !game_.running()) {
            ticking_ = false;
            return;
        }
        try {
            for (auto& f : game_.on_tick()) send(f);
        } catch (const std::exception& e) {
            close_with(std::string("session failed: ") + e.what());
            ticking_ = false;
            return;
        }
        if (!game_.running()) {
            ticking_ = false;
            return;
        }
        next_ += tick_;
        arm();
    }

    void send(const json& frame) {
        if (gone_) return;
        out_.push_back(frame.dump());
        if (out_.size() == 1) write_next();
    }

    void write_next() {
        ws_.text(true);
        ws_.async_write(net::buffer(out_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) {
                self->gone_ = true;
                self->out_.clear();
                self->timer_.cancel();
                return;
            }
            self->out_.pop_front();
            if (!self->out_.empty()) {
                self->write_next();
            } else if (self->closing_) {
                self->do_close();
            }
        });
    }

    void close_with(const std::string& reason) {
        send(error_frame(reason));
        closing_ = true;
        close_reason_ = reason.substr(0, 120);
        timer_.cancel();
        if (out_.empty()) do_close();
    }

    void do_close() {
        ws_.async_close(websocket::close_reason(websocket::close_code::policy_error, close_reason_),
                        [self = shared_from_this()](beast::error_code) { self->gone_ = true; });
    }

    websocket::stream<beast::tcp_stream> ws_;
    net::steady_timer timer_;
    std::chrono::milliseconds tick_;
    std::chrono::steady_clock::time_point next_;
    Session game_;
    beast::flat_buffer buf_;
    std::deque<std::string> out_;
    bool ticking_ = false;
    bool closing_ = false;
    bool gone_ = false;
    std::string close_reason_;
};

class HttpConn : public std::enable_shared_from_this<HttpConn> {
public:
    HttpConn(tcp::socket&& socket, Shared& shared) : stream_(std::move(socket)), shared_(shared) {}

    void run() { read(); }

private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buf_, req_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        if (websocket::is_upgrade(req_)) {
            if (req_.target() != "/session") {
                respond(http::status::not_found, "text/plain", "no WebSocket endpoint here; use /session\n");
                return;
            }
            stream_.expires_never();
            std::shared_ptr<WsSession> ws;
            try {
                ws = std::make_shared<WsSession>(stream_.release_socket(), shared_);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "session setup failed: %s\n", e.what());
                return;
            }
            ws->run(std::move(req_));
            return;
        }
        if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
            respond(http::status::method_not_allowed, "text/plain", "GET only\n");
            return;
        }
        const auto path = static_path(shared_.cfg.ui_dir, std::string_view(req_.target().data(), req_.target().size()));
        if (!path) {
            respond(http::status::bad_request, "text/plain", "bad path\n");
            return;
        }
        std::ifstream in(*path, std::ios::binary);
        if (!in) {
            respond(http::status::not_found, "text/plain", "not found\n");
            return;
        }
        std::ostringstream body;
        body << in.rdbuf();
        respond(http::status::ok, mime_type(*path), body.str());
    }

    void respond(http::status status, std::string_view type, std::string body) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::server, "capman");
        res->set(http::field::content_type, beast::string_view(type.data(), type.size()));
        res->keep_alive(req_.keep_alive());
        const bool head = req_.method() == http::verb::head;
        res->body() = std::move(body);
        res->prepare_payload();
        if (head) res->body().clear();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec) return;
            if (res->keep_alive()) {
                self->read();
            } else {
                beast::error_code ignored;
                self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            }
        });
    }

    beast::tcp_stream stream_;
    Shared& shared_;
    beast::flat_buffer buf_;
    http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
    Impl(std::shared_ptr<const Maze> maze, ServerConfig cfg)
        : shared{std::move(maze), cfg, ResultsSink(cfg.results_path)}, acceptor(ioc) {}

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) {
                if (ec != net::error::operation_aborted) accept();
                return;
            }
            std::make_shared<HttpConn>(std::move(socket), shared)->run();
            accept();
        });
    }

    Shared shared;
    net::io_context ioc{1};
    tcp::acceptor acceptor;
};

Server::Server(std::shared_ptr<const Maze> maze, ServerConfig cfg) {
    cfg.session.validate();
    impl_ = std::make_unique<Impl>(std::move(maze), std::move(cfg));
    const auto& c = impl_->shared.cfg;
    beast::error_code ec;
    const auto addr = net::ip::make_address(c.host, ec);
    if (ec) throw BindError("bad host '" + c.host + "': " + ec.message());
    const tcp::endpoint ep{addr, c.port};
    auto& a = impl_->acceptor;
    a.open(ep.protocol(), ec);
    if (!ec) a.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) a.bind(ep, ec);
    if (!ec) a.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw BindError("cannot listen on " + c.host + ":" + std::to_string(c.port) + ": " + ec.message());
    impl_->accept();
}

Server::~Server() = default;

unsigned short Server::port() const noexcept {
    beast::error_code ec;
    return impl_->acceptor.local_endpoint(ec).port();
}

void Server::run(bool stop_on_signals) {
    std::optional<net::signal_set> signals;
    if (stop_on_signals) {
        signals.emplace(impl_->ioc, SIGINT, SIGTERM);
        signals->async_wait([this](beast::error_code, int) { impl_->ioc.stop(); });
    }
    impl_->ioc.run();
}

void Server::stop() {
    impl_->ioc.stop();
}

int run_server(std::shared_ptr<const Maze> maze, const ServerConfig& cfg) {
    Server server(std::move(maze), cfg);
    std::fprintf(stderr, "listening on http://%s:%u  (WebSocket /session, mode %s, results %s)\n", cfg.host.c_str(),
                 static_cast<unsigned>(server.port()), std::string(to_string(cfg.session.mode)).c_str(),
                 cfg.results_path.string().c_str());
    server.run(true);
    return 0;
}

}  // namespace capman::server

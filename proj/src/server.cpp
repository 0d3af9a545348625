#include "courtside/server.hpp"

#include <chrono>
#include <deque>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "courtside/errors.hpp"

namespace courtside::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

struct Shared {
    session::SessionManager* manager = nullptr;
    std::map<std::string, std::filesystem::path> bundle_dirs;
    ServerOptions options;
};

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket socket, const Shared& shared)
        : ws_(std::move(socket)), timer_(ws_.get_executor()), shared_(shared) {}

    void run(http::request<http::string_body> req) {
        ws_.binary(true);
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
            if (!ec) self->read();
        });
    }

private:
    void read() {
        ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->shutdown();
            self->on_message();
        });
    }

    void on_message() {
        const auto data = buffer_.cdata();
        const std::vector<std::uint8_t> bytes(static_cast<const std::uint8_t*>(data.data()),
                                              static_cast<const std::uint8_t*>(data.data()) + data.size());
        buffer_.consume(buffer_.size());
        for (auto& reply : session::protocol::handle(*shared_.manager, bytes)) {
            if (reply.size() > 4 && reply[4] == session::protocol::kCreated) bind(reply);
            send(std::move(reply));
        }
        read();
    }

    void bind(const std::vector<std::uint8_t>& created) {
        const auto msg = std::get<session::protocol::CreatedMsg>(session::protocol::decode_server(created));
        if (session_id_) {
            try {
                shared_.manager->close_session(*session_id_);
            } catch (const NotFoundError&) {
            }
        }
        session_id_ = msg.session_id;
        period_ = std::chrono::nanoseconds(
            static_cast<std::int64_t>(1e9 / (msg.frame_rate * std::max(shared_.options.speed, 1e-6))));
        if (!ticking_) {
            ticking_ = true;
            next_tick_ = std::chrono::steady_clock::now();
            schedule();
        }
    }

    void schedule() {
        next_tick_ += period_;
        timer_.expires_at(next_tick_);
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (ec || self->closed_) return;
            self->on_tick();
            self->schedule();
        });
    }

    void on_tick() {
        if (!session_id_) return;
        std::optional<overlay::ComposedFrame> frame;
        try {
            frame = shared_.manager->tick(*session_id_);
        } catch (const std::exception&) {
            return;
        }
        if (!frame) return;
        // Presentation advanced regardless; a slow reader only loses deliveries.
        if (queue_.size() >= shared_.options.max_queued_frames) {
            ++dropped_;
            return;
        }
        send(overlay::encode_frame(frame->frame, frame->commands));
    }

    void send(std::vector<std::uint8_t> bytes) {
        queue_.push_back(std::move(bytes));
        if (queue_.size() == 1) write_front();
    }

    void write_front() {
        ws_.async_write(asio::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->shutdown();
            self->queue_.pop_front();
            if (!self->queue_.empty()) self->write_front();
        });
    }

    void shutdown() {
        if (closed_) return;
        closed_ = true;
        timer_.cancel();
        if (session_id_) {
            try {
                shared_.manager->close_session(*session_id_);
            } catch (const NotFoundError&) {
            }
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    asio::steady_timer timer_;
    const Shared& shared_;
    beast::flat_buffer buffer_;
    std::deque<std::vector<std::uint8_t>> queue_;
    std::optional<std::string> session_id_;
    std::chrono::nanoseconds period_{33'333'333};
    std::chrono::steady_clock::time_point next_tick_;
    bool ticking_ = false;
    bool closed_ = false;
    std::size_t dropped_ = 0;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket socket, const Shared& shared) : stream_(std::move(socket)), shared_(shared) {}

    void run() { read(); }

private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            if (ec) return self->close();
            self->on_request();
        });
    }

    void on_request() {
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/ws") {
                stream_.expires_never();
                std::make_shared<WsSession>(stream_.release_socket(), shared_)->run(std::move(req_));
            } else {
                close();
            }
            return;
        }
        if (req_.method() != http::verb::get) return respond_text(http::status::method_not_allowed, "GET only\n");

        const std::string target(req_.target());
        const std::string prefix = "/api/games";
        if (target == prefix) {
            nlohmann::json list = nlohmann::json::array();
            for (const auto& id : shared_.manager->game_ids()) list.push_back(meta_to_json(shared_.manager->game(id)->meta()));
            return respond_json(list);
        }
        if (target.starts_with(prefix + "/")) {
            std::string rest = target.substr(prefix.size() + 1);
            const bool video = rest.ends_with("/video");
            if (video) rest.resize(rest.size() - 6);
            std::shared_ptr<const GameBundle> bundle;
            try {
                bundle = shared_.manager->game(rest);
            } catch (const NotFoundError&) {
                return respond_text(http::status::not_found, "unknown game\n");
            }
            if (!video) return respond_json(meta_to_json(bundle->meta()));
            return respond_video(rest, *bundle);
        }
        respond_text(http::status::not_found, "not found\n");
    }

    void respond_json(const nlohmann::json& body) {
        auto res = std::make_shared<http::response<http::string_body>>(http::status::ok, req_.version());
        res->set(http::field::content_type, "application/json");
        res->body() = body.dump();
        send(res);
    }

    void respond_text(http::status status, std::string body) {
        auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
        res->set(http::field::content_type, "text/plain");
        res->body() = std::move(body);
        send(res);
    }

    void respond_video(const std::string& game_id, const GameBundle& bundle) {
        const auto dir = shared_.bundle_dirs.find(game_id);
        if (!bundle.meta().video || dir == shared_.bundle_dirs.end()) {
            return respond_text(http::status::not_found, "no video for this game\n");
        }
        http::file_body::value_type file;
        beast::error_code ec;
        file.open((dir->second / *bundle.meta().video).string().c_str(), beast::file_mode::scan, ec);
        if (ec) return respond_text(http::status::not_found, "video file missing\n");
        auto res = std::make_shared<http::response<http::file_body>>(
            std::piecewise_construct, std::make_tuple(std::move(file)), std::make_tuple(http::status::ok, req_.version()));
        res->set(http::field::content_type, "video/mp4");
        send(res);
    }

    template <typename Response>
    void send(std::shared_ptr<Response> res) {
        res->keep_alive(req_.keep_alive());
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            if (ec || !res->keep_alive()) return self->close();
            self->read();
        });
    }

    void close() {
        beast::error_code ec;
        stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    }

    beast::tcp_stream stream_;
    const Shared& shared_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
};

}  // namespace

struct Server::Impl {
    Shared shared;
    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::thread thread;
    bool running = false;

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            std::make_shared<HttpSession>(std::move(socket), shared)->run();
            accept();
        });
    }
};

Server::Server(session::SessionManager& manager, std::map<std::string, std::filesystem::path> bundle_dirs,
               ServerOptions options)
    : impl_(std::make_unique<Impl>()) {
    if (!(options.speed > 0.0)) throw ValidationError("speed", "must be positive");
    impl_->shared = {&manager, std::move(bundle_dirs), std::move(options)};
}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
    auto& im = *impl_;
    const tcp::endpoint endpoint(asio::ip::make_address(im.shared.options.address), im.shared.options.port);
    im.acceptor.open(endpoint.protocol());
    im.acceptor.set_option(asio::socket_base::reuse_address(true));
    im.acceptor.bind(endpoint);
    im.acceptor.listen(asio::socket_base::max_listen_connections);
    im.accept();
    im.running = true;
    im.thread = std::thread([&im] { im.io.run(); });
    return im.acceptor.local_endpoint().port();
}

void Server::stop() {
    if (!impl_ || !impl_->running) return;
    impl_->running = false;
    impl_->io.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace courtside::server

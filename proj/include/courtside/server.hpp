#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include "courtside/session.hpp"

// HTTP + WebSocket front end on one port:
//   GET /api/games             bundle metadata for every game
//   GET /api/games/{id}        one game's metadata
//   GET /api/games/{id}/video  the bundle's video file
//   GET /ws                    upgrade; binary protocol messages both ways

namespace courtside::server {

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;  // 0 picks a free port
    double speed = 1.0;         // presentation rate multiplier
    std::size_t max_queued_frames = 8;  // frames beyond this are dropped for slow clients
};

class Server {
public:
    /// `bundle_dirs` maps game ids to bundle directories (for video pass-through).
    Server(session::SessionManager& manager, std::map<std::string, std::filesystem::path> bundle_dirs,
           ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds and serves on a background thread; returns the bound port.
    std::uint16_t start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace courtside::server

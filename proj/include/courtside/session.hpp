#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "courtside/bundle.hpp"
#include "courtside/gaze.hpp"
#include "courtside/overlay.hpp"
#include "courtside/replay.hpp"

// Viewer sessions over preprocessed games, and the binary control/gaze protocol.
// Sessions run on a virtual clock: a frame is presented when tick() is called,
// so delivery pacing lives entirely in the transport.

namespace courtside::session {

enum class PlayState : std::uint8_t { Paused = 0, Playing = 1 };
enum class ControlAction : std::uint8_t { Play = 0, Pause = 1, Seek = 2 };
enum class GazeAck : std::uint8_t { Accepted = 0, IgnoredPaused = 1, RejectedNonMonotonic = 2 };

struct Control {
    ControlAction action = ControlAction::Play;
    FrameIndex frame = 0;  // seek target
};

struct SessionStatus {
    std::string session_id;
    std::string game_id;
    FrameIndex playhead = 0;  // next frame to present
    PlayState state = PlayState::Paused;
};

class SessionManager {
public:
    /// Throws ValidationError when the game id is already registered.
    void add_game(std::shared_ptr<const GameBundle> bundle);
    std::vector<std::string> game_ids() const;
    /// Throws NotFoundError.
    std::shared_ptr<const GameBundle> game(const std::string& game_id) const;

    /// `overrides` are `gaze.*` / `overlay.*` assignments applied to this session only.
    std::string create_session(const std::string& game_id, const std::vector<std::string>& overrides = {});
    void close_session(const std::string& session_id);
    std::size_t session_count() const;

    /// Samples are timestamped on the video clock and must increase strictly.
    /// Samples sent while paused are ignored: the clock is stopped.
    GazeAck submit_gaze(const std::string& session_id, const gaze::GazeSample& sample);
    /// Seek resets gaze state; throws RangeError for frames outside the game.
    SessionStatus control(const std::string& session_id, const Control& control);
    SessionStatus status(const std::string& session_id) const;

    /// While playing: applies due gaze samples, presents the playhead frame and
    /// advances. Pauses after the last frame. Returns nothing while paused.
    std::optional<overlay::ComposedFrame> tick(const std::string& session_id);

private:
    struct Session {
        Session(std::string id, std::shared_ptr<const GameBundle> bundle, const EngineConfig& cfg);

        std::mutex mu;
        std::string id;
        std::shared_ptr<const GameBundle> bundle;
        Presenter presenter;
        std::deque<gaze::GazeSample> pending;
        std::optional<double> last_timestamp;
        FrameIndex playhead = 0;
        PlayState state = PlayState::Paused;
    };

    std::shared_ptr<Session> find(const std::string& session_id) const;
    static SessionStatus status_of(const Session& s);

    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<const GameBundle>> games_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t next_id_ = 1;
};

namespace protocol {

enum MessageType : std::uint8_t {
    kFrame = 0x01,
    kCreated = 0x02,
    kAck = 0x03,
    kState = 0x04,
    kError = 0x05,
    kCreate = 0x10,
    kControl = 0x11,
    kGaze = 0x12,
};

enum class ErrorCode : std::uint8_t { NotFound = 1, Range = 2, Validation = 3, Malformed = 4, State = 5, Internal = 6 };

struct CreateMsg {
    std::string game_id;
    std::vector<std::string> overrides;
    friend bool operator==(const CreateMsg&, const CreateMsg&) = default;
};
struct ControlMsg {
    std::string session_id;
    Control control;
};
struct GazeMsg {
    std::string session_id;
    gaze::GazeSample sample;
};
using ClientMessage = std::variant<CreateMsg, ControlMsg, GazeMsg>;

struct CreatedMsg {
    std::string session_id;
    std::string game_id;
    double frame_rate = 0.0;
    FrameIndex frame_count = 0;
    int width = 0;
    int height = 0;
};
struct AckMsg {
    std::string session_id;
    double timestamp = 0.0;
    GazeAck code = GazeAck::Accepted;
};
struct StateMsg {
    SessionStatus status;
};
struct ErrorMsg {
    ErrorCode code = ErrorCode::Internal;
    std::string message;
};
using ServerMessage = std::variant<overlay::DecodedFrame, CreatedMsg, AckMsg, StateMsg, ErrorMsg>;

std::vector<std::uint8_t> encode(const ClientMessage& msg);
ClientMessage decode_client(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode(const CreatedMsg& msg);
std::vector<std::uint8_t> encode(const AckMsg& msg);
std::vector<std::uint8_t> encode(const StateMsg& msg);
std::vector<std::uint8_t> encode(const ErrorMsg& msg);
ServerMessage decode_server(std::span<const std::uint8_t> bytes);

/// Executes one client message against `manager` and returns the replies.
/// Errors become ErrorMsg replies; nothing throws for bad input.
std::vector<std::vector<std::uint8_t>> handle(SessionManager& manager, std::span<const std::uint8_t> bytes);

}  // namespace protocol

}  // namespace courtside::session

#include "courtside/session.hpp"

#include "courtside/config.hpp"
#include "courtside/errors.hpp"
#include "courtside/wire.hpp"

namespace courtside::session {

SessionManager::Session::Session(std::string id_, std::shared_ptr<const GameBundle> bundle_, const EngineConfig& cfg)
    : id(std::move(id_)), bundle(std::move(bundle_)), presenter(*bundle, cfg.gaze, cfg.overlay) {}

void SessionManager::add_game(std::shared_ptr<const GameBundle> bundle) {
    if (!bundle) throw ValidationError("bundle", "null bundle");
    std::lock_guard lock(mu_);
    const auto& id = bundle->meta().game_id;
    if (!games_.emplace(id, bundle).second) throw ValidationError("game_id", "duplicate game '" + id + "'");
}

std::vector<std::string> SessionManager::game_ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, b] : games_) out.push_back(id);
    return out;
}

std::shared_ptr<const GameBundle> SessionManager::game(const std::string& game_id) const {
    std::lock_guard lock(mu_);
    const auto it = games_.find(game_id);
    if (it == games_.end()) throw NotFoundError("unknown game '" + game_id + "'");
    return it->second;
}

std::string SessionManager::create_session(const std::string& game_id, const std::vector<std::string>& overrides) {
    auto bundle = game(game_id);
    EngineConfig cfg = bundle->meta().config;
    for (const auto& o : overrides) {
        if (!o.starts_with("gaze.") && !o.starts_with("overlay.")) {
            throw ValidationError("override", "only gaze.* and overlay.* can change per session: '" + o + "'");
        }
        apply_override(cfg, o);
    }
    std::lock_guard lock(mu_);
    std::string id = "s" + std::to_string(next_id_++);
    sessions_.emplace(id, std::make_shared<Session>(id, std::move(bundle), cfg));
    return id;
}

void SessionManager::close_session(const std::string& session_id) {
    std::lock_guard lock(mu_);
    if (sessions_.erase(session_id) == 0) throw NotFoundError("unknown session '" + session_id + "'");
}

std::size_t SessionManager::session_count() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& session_id) const {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw NotFoundError("unknown session '" + session_id + "'");
    return it->second;
}

SessionStatus SessionManager::status_of(const Session& s) {
    return {s.id, s.bundle->meta().game_id, s.playhead, s.state};
}

GazeAck SessionManager::submit_gaze(const std::string& session_id, const gaze::GazeSample& sample) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    if (s->state == PlayState::Paused) return GazeAck::IgnoredPaused;
    if (s->last_timestamp && !(sample.timestamp > *s->last_timestamp)) return GazeAck::RejectedNonMonotonic;
    s->last_timestamp = sample.timestamp;
    s->pending.push_back(sample);
    return GazeAck::Accepted;
}

SessionStatus SessionManager::control(const std::string& session_id, const Control& control) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    switch (control.action) {
        case ControlAction::Play: s->state = PlayState::Playing; break;
        case ControlAction::Pause: s->state = PlayState::Paused; break;
        case ControlAction::Seek:
            if (control.frame < 0 || control.frame >= s->bundle->meta().frame_count) {
                throw RangeError("seek target " + std::to_string(control.frame) + " outside [0, " +
                                 std::to_string(s->bundle->meta().frame_count) + ")");
            }
            // Dwell state is meaningless across a discontinuity, and the client's clock jumps.
            s->presenter.reset();
            s->pending.clear();
            s->last_timestamp.reset();
            s->playhead = control.frame;
            break;
    }
    return status_of(*s);
}

SessionStatus SessionManager::status(const std::string& session_id) const {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    return status_of(*s);
}

std::optional<overlay::ComposedFrame> SessionManager::tick(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard lock(s->mu);
    if (s->state != PlayState::Playing) return std::nullopt;
    const double fps = s->bundle->meta().frame_rate();
    while (!s->pending.empty() && sample_due(s->pending.front().timestamp, s->playhead, fps)) {
        s->presenter.observe(s->pending.front());
        s->pending.pop_front();
    }
    auto frame = s->presenter.present(s->playhead);
    if (s->playhead + 1 < s->bundle->meta().frame_count) {
        ++s->playhead;
    } else {
        s->state = PlayState::Paused;
    }
    return frame;
}

namespace protocol {

namespace {

wire::ByteWriter begin(std::uint8_t type) {
    wire::ByteWriter w;
    w.u32(0);
    w.u8(type);
    return w;
}

std::vector<std::uint8_t> finish(wire::ByteWriter& w) {
    w.patch_u32(0, static_cast<std::uint32_t>(w.size() - 4));
    return w.take();
}

/// Checks the length prefix and returns a reader positioned at the type byte.
wire::ByteReader open(std::span<const std::uint8_t> bytes) {
    wire::ByteReader head(bytes);
    if (head.u32() != head.remaining()) throw ParseError("<wire>", 0, "length prefix does not match message size");
    return wire::ByteReader(bytes.subspan(4));
}

void expect_done(const wire::ByteReader& r) {
    if (!r.done()) throw ParseError("<wire>", 0, "trailing bytes in message");
}

std::uint32_t frame_u32(FrameIndex f) {
    if (f < 0 || f > 0xFFFFFFFFLL) throw RangeError("frame index does not fit the wire format");
    return static_cast<std::uint32_t>(f);
}

}  // namespace

std::vector<std::uint8_t> encode(const ClientMessage& msg) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, CreateMsg>) {
                auto w = begin(kCreate);
                w.str(m.game_id);
                if (m.overrides.size() > 0xFFFF) throw ValidationError("overrides", "too many overrides");
                w.u16(static_cast<std::uint16_t>(m.overrides.size()));
                for (const auto& o : m.overrides) w.str(o);
                return finish(w);
            } else if constexpr (std::is_same_v<T, ControlMsg>) {
                auto w = begin(kControl);
                w.str(m.session_id);
                w.u8(static_cast<std::uint8_t>(m.control.action));
                w.u32(frame_u32(m.control.frame));
                return finish(w);
            } else {
                auto w = begin(kGaze);
                w.str(m.session_id);
                w.f64(m.sample.timestamp);
                w.f64(m.sample.point.x);
                w.f64(m.sample.point.y);
                w.u8(m.sample.valid ? 1 : 0);
                return finish(w);
            }
        },
        msg);
}

ClientMessage decode_client(std::span<const std::uint8_t> bytes) {
    auto r = open(bytes);
    const std::uint8_t type = r.u8();
    ClientMessage out;
    switch (type) {
        case kCreate: {
            CreateMsg m;
            m.game_id = r.str();
            const std::uint16_t n = r.u16();
            for (std::uint16_t i = 0; i < n; ++i) m.overrides.push_back(r.str());
            out = std::move(m);
            break;
        }
        case kControl: {
            ControlMsg m;
            m.session_id = r.str();
            const std::uint8_t action = r.u8();
            if (action > 2) throw ParseError("<wire>", 0, "unknown control action " + std::to_string(action));
            m.control.action = static_cast<ControlAction>(action);
            m.control.frame = r.u32();
            out = std::move(m);
            break;
        }
        case kGaze: {
            GazeMsg m;
            m.session_id = r.str();
            m.sample.timestamp = r.f64();
            m.sample.point.x = r.f64();
            m.sample.point.y = r.f64();
            const std::uint8_t valid = r.u8();
            if (valid > 1) throw ParseError("<wire>", 0, "gaze valid flag must be 0 or 1");
            m.sample.valid = valid == 1;
            out = std::move(m);
            break;
        }
        default: throw ParseError("<wire>", 0, "unknown client message type " + std::to_string(type));
    }
    expect_done(r);
    return out;
}

std::vector<std::uint8_t> encode(const CreatedMsg& m) {
    auto w = begin(kCreated);
    w.str(m.session_id);
    w.str(m.game_id);
    w.f64(m.frame_rate);
    w.u32(frame_u32(m.frame_count));
    w.u32(static_cast<std::uint32_t>(m.width));
    w.u32(static_cast<std::uint32_t>(m.height));
    return finish(w);
}

std::vector<std::uint8_t> encode(const AckMsg& m) {
    auto w = begin(kAck);
    w.str(m.session_id);
    w.f64(m.timestamp);
    w.u8(static_cast<std::uint8_t>(m.code));
    return finish(w);
}

std::vector<std::uint8_t> encode(const StateMsg& m) {
    auto w = begin(kState);
    w.str(m.status.session_id);
    w.str(m.status.game_id);
    w.u8(static_cast<std::uint8_t>(m.status.state));
    w.u32(frame_u32(m.status.playhead));
    return finish(w);
}

std::vector<std::uint8_t> encode(const ErrorMsg& m) {
    auto w = begin(kError);
    w.u8(static_cast<std::uint8_t>(m.code));
    w.str(m.message);
    return finish(w);
}

ServerMessage decode_server(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > 4 && bytes[4] == kFrame) return overlay::decode_frame(bytes);
    auto r = open(bytes);
    const std::uint8_t type = r.u8();
    ServerMessage out;
    switch (type) {
        case kCreated: {
            CreatedMsg m;
            m.session_id = r.str();
            m.game_id = r.str();
            m.frame_rate = r.f64();
            m.frame_count = r.u32();
            m.width = static_cast<int>(r.u32());
            m.height = static_cast<int>(r.u32());
            out = std::move(m);
            break;
        }
        case kAck: {
            AckMsg m;
            m.session_id = r.str();
            m.timestamp = r.f64();
            const std::uint8_t code = r.u8();
            if (code > 2) throw ParseError("<wire>", 0, "unknown ack code");
            m.code = static_cast<GazeAck>(code);
            out = std::move(m);
            break;
        }
        case kState: {
            StateMsg m;
            m.status.session_id = r.str();
            m.status.game_id = r.str();
            const std::uint8_t st = r.u8();
            if (st > 1) throw ParseError("<wire>", 0, "unknown play state");
            m.status.state = static_cast<PlayState>(st);
            m.status.playhead = r.u32();
            out = std::move(m);
            break;
        }
        case kError: {
            ErrorMsg m;
            const std::uint8_t code = r.u8();
            if (code < 1 || code > 6) throw ParseError("<wire>", 0, "unknown error code");
            m.code = static_cast<ErrorCode>(code);
            m.message = r.str();
            out = std::move(m);
            break;
        }
        default: throw ParseError("<wire>", 0, "unknown server message type " + std::to_string(type));
    }
    expect_done(r);
    return out;
}

std::vector<std::vector<std::uint8_t>> handle(SessionManager& manager, std::span<const std::uint8_t> bytes) {
    std::vector<std::vector<std::uint8_t>> replies;
    try {
        const auto msg = decode_client(bytes);
        if (const auto* m = std::get_if<CreateMsg>(&msg)) {
            const auto id = manager.create_session(m->game_id, m->overrides);
            const auto& meta = manager.game(m->game_id)->meta();
            replies.push_back(
                encode(CreatedMsg{id, meta.game_id, meta.frame_rate(), meta.frame_count, meta.width, meta.height}));
            replies.push_back(encode(StateMsg{manager.status(id)}));
        } else if (const auto* m = std::get_if<ControlMsg>(&msg)) {
            replies.push_back(encode(StateMsg{manager.control(m->session_id, m->control)}));
        } else if (const auto* m = std::get_if<GazeMsg>(&msg)) {
            const auto code = manager.submit_gaze(m->session_id, m->sample);
            replies.push_back(encode(AckMsg{m->session_id, m->sample.timestamp, code}));
        }
    } catch (const ParseError& e) {
        replies.push_back(encode(ErrorMsg{ErrorCode::Malformed, e.what()}));
    } catch (const NotFoundError& e) {
        replies.push_back(encode(ErrorMsg{ErrorCode::NotFound, e.what()}));
    } catch (const RangeError& e) {
        replies.push_back(encode(ErrorMsg{ErrorCode::Range, e.what()}));
    } catch (const ValidationError& e) {
        replies.push_back(encode(ErrorMsg{ErrorCode::Validation, e.what()}));
    } catch (const StateError& e) {
        replies.push_back(encode(ErrorMsg{ErrorCode::State, e.what()}));
    } catch (const std::exception& e) {
        replies.push_back(encode(ErrorMsg{ErrorCode::Internal, e.what()}));
    }
    return replies;
}

}  // namespace protocol

}  // namespace courtside::session

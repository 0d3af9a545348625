#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "courtside/types.hpp"

namespace courtside::game_state {

struct GameStateConfig {
    double possession_window = 0.5;  // s
    double lookahead = 1.8;          // s
    double open_distance = 6.0;      // ft
    double handler_distance = 3.0;   // ft
    double guard_distance_max = 12.0;  // ft
    double frame_rate = 30.0;        // frames per second

    void validate() const;
    /// Frames in the trailing possession window (at least 1, including the current frame).
    FrameIndex window_frames() const;
    /// Frames looked ahead for the next receiver.
    FrameIndex lookahead_frames() const;
};

/// Importance levels; Lv2_5 is only ever produced by the gaze engine.
enum class Importance { Lv1, Lv2, Lv2_5, Lv3 };

double numeric_level(Importance level) noexcept;
std::string_view to_string(Importance level);

struct Link {
    PlayerId defender;
    PlayerId handler;

    friend auto operator<=>(const Link&, const Link&) = default;
};

struct GameStateFrame {
    FrameIndex frame = 0;
    std::optional<TeamId> offense;
    std::optional<PlayerId> ball_handler;
    std::optional<PlayerId> next_receiver;
    std::set<PlayerId> open_players;
    std::set<PlayerId> key_defenders;
    std::set<Link> links;
    std::map<PlayerId, Importance> importance;  // every player sampled at the frame

    friend bool operator==(const GameStateFrame&, const GameStateFrame&) = default;
};

struct FrameSamples {
    std::optional<CourtPoint> ball;
    std::map<PlayerId, CourtPoint> players;
};

/// Read-only, frame-indexed view over the tracking samples.
class TrackingStore {
public:
    TrackingStore() = default;
    explicit TrackingStore(std::span<const CourtSample> samples);

    const FrameSamples* at(FrameIndex frame) const;
    std::optional<CourtPoint> position(FrameIndex frame, const PlayerId& player) const;
    FrameIndex first_frame() const noexcept { return first_; }
    FrameIndex last_frame() const noexcept { return last_; }
    bool empty() const noexcept { return frames_.empty(); }

private:
    std::map<FrameIndex, FrameSamples> frames_;
    FrameIndex first_ = 0;
    FrameIndex last_ = -1;
};

/// Nearest player within handler_distance of the ball (ties: ascending id).
/// Throws StateError when the frame has no ball sample.
std::optional<PlayerId> detect_ball_handler(const FrameSamples& samples, const GameStateConfig& cfg);
std::optional<PlayerId> detect_ball_handler(const TrackingStore& store, FrameIndex frame, const GameStateConfig& cfg);

/// Team of the most recent ball handler in the trailing possession window.
std::optional<TeamId> detect_offense(const TrackingStore& store, FrameIndex frame, const Roster& roster,
                                     const GameStateConfig& cfg);

/// First handler within the look-ahead horizon that differs from the current one
/// (the current handler, or the most recent one in the possession window when the ball is loose).
std::optional<PlayerId> detect_next_receiver(const TrackingStore& store, FrameIndex frame, const GameStateConfig& cfg);

/// Offensive players other than the handler whose nearest defender is at least open_distance away.
std::set<PlayerId> detect_open_players(const FrameSamples& samples, const TeamId& offense,
                                       const std::optional<PlayerId>& handler, const Roster& roster,
                                       const GameStateConfig& cfg);

/// Defenders whose closest offensive player, by mean distance over the trailing
/// possession window, is the handler, and who are within guard_distance_max of
/// the handler at `frame`.
std::set<PlayerId> detect_key_defenders(const TrackingStore& store, FrameIndex frame, const PlayerId& handler,
                                        const Roster& roster, const GameStateConfig& cfg);

struct RankingInput {
    std::vector<PlayerId> players;  // everyone to rank
    std::optional<PlayerId> ball_handler;
    std::optional<PlayerId> next_receiver;
    std::set<PlayerId> open_players;
    std::set<PlayerId> key_defenders;
};

/// Offense first: handler, receiver, open players -> Lv3; key defenders -> Lv2; the rest Lv1.
std::map<PlayerId, Importance> rank_importance(const RankingInput& input);

std::set<Link> one_on_one_links(const std::set<PlayerId>& key_defenders, const std::optional<PlayerId>& handler);

/// Full per-frame derivation. A frame without a ball sample is a dead ball.
GameStateFrame compute_frame(const TrackingStore& store, FrameIndex frame, const Roster& roster,
                             const GameStateConfig& cfg);
std::vector<GameStateFrame> compute_all(const TrackingStore& store, const Roster& roster, const GameStateConfig& cfg,
                                        FrameIndex frame_count);

/// gamestate.csv: frame,offense,handler,receiver,open_list,defender_list (lists ';'-separated).
void write_game_states(std::ostream& out, const std::vector<GameStateFrame>& frames);
/// Rebuilds links and importance using the players sampled in `store`.
std::vector<GameStateFrame> parse_game_states(std::istream& in, const std::string& source,
                                              const TrackingStore& store);

}  // namespace courtside::game_state

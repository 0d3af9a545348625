#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "courtside/game_state.hpp"
#include "courtside/track.hpp"
#include "courtside/types.hpp"

// Gaze-driven interaction state: dwell-based focus (lift to Lv2.5 with a glow
// ramp and a linger window) and the smoothed spotlight filter.

namespace courtside::gaze {

struct GazeConfig {
    double dwell_trigger = 0.25;     // s of gaze to lift a player
    double linger = 1.8;             // s a lift persists after the gaze leaves
    double filter_radius = 650.0;    // px
    double dwell_grace = 0.1;        // s of absence tolerated before a dwell resets
    double center_smoothing = 0.85;  // fraction of the distance closed per second
    double hitbox_margin = 10.0;     // px added around each box for hit testing
    double spotlight_ease = 0.3;     // s of ease-in-out when a spotlight toggles

    void validate() const;
};

/// Comparison slack for timestamps computed from frame indices.
inline constexpr double kTimeEpsilon = 1e-9;

struct GazeSample {
    double timestamp = 0.0;  // s on the video clock
    PixelPoint point;
    bool valid = true;

    friend bool operator==(const GazeSample&, const GazeSample&) = default;
};

struct FocusEntry {
    double banked = 0.0;                  // dwell from closed gaze segments
    std::optional<double> segment_start;  // open segment (gaze currently on the player)
    double last_on = 0.0;
    std::optional<double> absent_since;
    double accumulator = 0.0;  // dwell seconds as of the last update
    bool lifted = false;
    std::optional<double> lift_expiry;  // unset while the gaze is on the player

    double glow(const GazeConfig& cfg) const;
    bool lifted_at(double now) const;
};

struct SpotlightFade {
    bool on = true;
    double changed_at = 0.0;
    bool animating = false;
};

struct GazeSessionState {
    std::map<PlayerId, FocusEntry> focus;
    std::optional<PixelPoint> filter_center;
    std::optional<double> filter_time;
    std::optional<double> last_sample_time;
    std::map<PlayerId, SpotlightFade> spotlights;
};

/// Player whose margin-expanded box contains `point`; overlaps resolve to the
/// nearest box center, then ascending id.
std::optional<PlayerId> hit_test(const PixelPoint& point, std::span<const track::TrackedBox> boxes,
                                 const GazeConfig& cfg);

/// Dwell bookkeeping for one sample. Invalid samples count as absence.
void step_focus(GazeSessionState& state, const GazeSample& sample, const std::optional<PlayerId>& hit,
                const GazeConfig& cfg);
/// Expires lifts and grace windows at `now` without a new sample.
void advance_focus(GazeSessionState& state, double now, const GazeConfig& cfg);
/// Exponential smoothing of the filter center toward valid samples.
void step_filter(GazeSessionState& state, const GazeSample& sample, const GazeConfig& cfg);

struct DarkenRegion {
    PixelPoint center;
    double radius = 0.0;
};

struct GazeOutput {
    std::map<PlayerId, game_state::Importance> importance;
    std::set<PlayerId> spotlight_on;
    std::optional<DarkenRegion> darken;  // audience outside the disk is darkened
    std::map<PlayerId, double> glow;     // players with a non-zero glow
};

/// Lifted players below Lv3 become Lv2.5; spotlight anchors farther than the
/// filter radius from the smoothed center are off. Before any valid sample every
/// spotlight is on and nothing is darkened.
GazeOutput apply_gaze(const std::map<PlayerId, game_state::Importance>& importance, const GazeSessionState& state,
                      double now, const std::map<PlayerId, PixelPoint>& spotlight_anchors, const GazeConfig& cfg);

struct SpotlightStyle {
    double opacity = 1.0;
    double ease_phase = 1.0;  // 0 at a toggle, 1 once settled
};

/// One session's gaze engine. Single writer: samples and frame ticks are fed in
/// presentation-time order.
class GazeEngine {
public:
    explicit GazeEngine(GazeConfig cfg = {});

    /// Throws StateError when the timestamp does not increase.
    void observe(const GazeSample& sample, std::span<const track::TrackedBox> boxes_at_sample);

    struct Frame {
        GazeOutput output;
        std::map<PlayerId, SpotlightStyle> spotlights;  // candidates still visible (opacity > 0)
    };
    /// Snapshot for the frame presented at `now`. Updates spotlight easing.
    Frame frame(double now, const std::map<PlayerId, game_state::Importance>& importance,
                const std::map<PlayerId, PixelPoint>& spotlight_anchors);

    void reset();
    const GazeSessionState& state() const noexcept { return state_; }
    const GazeConfig& config() const noexcept { return cfg_; }

private:
    GazeConfig cfg_;
    GazeSessionState state_;
};

/// Gaze trace replay file: timestamp,x,y,valid(0|1). Timestamps must increase strictly.
std::vector<GazeSample> parse_gaze_trace(std::istream& in, const std::string& source);
std::vector<GazeSample> load_gaze_trace(const std::string& path);
void write_gaze_trace(std::ostream& out, const std::vector<GazeSample>& samples);

}  // namespace courtside::gaze

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "courtside/bundle.hpp"
#include "courtside/gaze.hpp"
#include "courtside/overlay.hpp"

// Presentation pipeline shared by offline replay and live sessions.

namespace courtside {

/// Presentation time of `frame` on the virtual video clock.
double presentation_time(FrameIndex frame, double frame_rate) noexcept;
/// Whether a gaze sample stamped `t` must be applied before presenting `frame`.
bool sample_due(double t, FrameIndex frame, double frame_rate) noexcept;

/// One viewer's gaze engine bound to an immutable bundle. Samples must be fed
/// in timestamp order, interleaved with present() calls in presentation order.
class Presenter {
public:
    Presenter(const GameBundle& bundle, gaze::GazeConfig gaze_cfg, overlay::OverlayConfig overlay_cfg);

    /// Hit-tests against the boxes of the frame on screen at the sample time.
    void observe(const gaze::GazeSample& sample);
    overlay::ComposedFrame present(FrameIndex frame);
    /// Drops all gaze state (used on seek).
    void reset();

    const gaze::GazeEngine& engine() const noexcept { return engine_; }

private:
    const GameBundle* bundle_;
    overlay::OverlayConfig overlay_cfg_;
    gaze::GazeEngine engine_;
};

struct ReplayResult {
    std::vector<std::uint8_t> wire;  // concatenated frame messages
    std::string text;                // same commands, one per line
    std::vector<std::string> warnings;
};

/// Presents every frame in order, applying each gaze sample before the first
/// frame whose presentation time reaches it.
ReplayResult replay(const GameBundle& bundle, std::span<const gaze::GazeSample> trace);

/// 64-bit FNV-1a, used to pin golden dumps.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept;

}  // namespace courtside

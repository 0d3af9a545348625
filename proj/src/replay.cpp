#include "courtside/replay.hpp"

#include <sstream>

namespace courtside {

double presentation_time(FrameIndex frame, double frame_rate) noexcept {
    return static_cast<double>(frame) / frame_rate;
}

bool sample_due(double t, FrameIndex frame, double frame_rate) noexcept {
    return t <= presentation_time(frame, frame_rate) + gaze::kTimeEpsilon;
}

Presenter::Presenter(const GameBundle& bundle, gaze::GazeConfig gaze_cfg, overlay::OverlayConfig overlay_cfg)
    : bundle_(&bundle), overlay_cfg_(overlay_cfg), engine_(gaze_cfg) {
    overlay_cfg_.validate();
}

void Presenter::observe(const gaze::GazeSample& sample) {
    engine_.observe(sample, bundle_->boxes_at(bundle_->frame_at_time(sample.timestamp)));
}

overlay::ComposedFrame Presenter::present(FrameIndex frame) {
    const double now = presentation_time(frame, bundle_->meta().frame_rate());
    auto input = bundle_->frame_input(frame, nullptr);
    const auto& importance = input.state ? input.state->importance : std::map<PlayerId, game_state::Importance>{};
    const auto g = engine_.frame(now, importance, overlay::green_spotlight_anchors(input, overlay_cfg_));
    input.gaze = &g;
    return overlay::compose_frame(input, bundle_->context(), overlay_cfg_);
}

void Presenter::reset() { engine_.reset(); }

ReplayResult replay(const GameBundle& bundle, std::span<const gaze::GazeSample> trace) {
    const auto& cfg = bundle.meta().config;
    Presenter presenter(bundle, cfg.gaze, cfg.overlay);
    ReplayResult out;
    std::ostringstream text;
    std::size_t next = 0;
    for (FrameIndex f = 0; f < bundle.meta().frame_count; ++f) {
        while (next < trace.size() && sample_due(trace[next].timestamp, f, bundle.meta().frame_rate())) {
            presenter.observe(trace[next++]);
        }
        auto frame = presenter.present(f);
        overlay::append_frame(out.wire, f, frame.commands);
        overlay::write_text(text, f, frame.commands);
        out.warnings.insert(out.warnings.end(), frame.warnings.begin(), frame.warnings.end());
    }
    out.text = text.str();
    return out;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace courtside

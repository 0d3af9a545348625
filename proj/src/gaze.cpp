#include "courtside/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

namespace courtside::gaze {

void GazeConfig::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"dwell_trigger", dwell_trigger}, {"linger", linger},           {"filter_radius", filter_radius},
        {"dwell_grace", dwell_grace},     {"hitbox_margin", hitbox_margin}, {"spotlight_ease", spotlight_ease}};
    for (const auto& [name, value] : fields) {
        if (!(value > 0.0)) throw ValidationError(name, "must be positive");
    }
    if (!(center_smoothing > 0.0 && center_smoothing <= 1.0)) {
        throw ValidationError("center_smoothing", "must lie in (0,1]");
    }
}

double FocusEntry::glow(const GazeConfig& cfg) const { return std::min(1.0, accumulator / cfg.dwell_trigger); }

bool FocusEntry::lifted_at(double now) const {
    return lifted && (!lift_expiry || now < *lift_expiry - kTimeEpsilon);
}

std::optional<PlayerId> hit_test(const PixelPoint& point, std::span<const track::TrackedBox> boxes,
                                 const GazeConfig& cfg) {
    std::optional<PlayerId> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& tb : boxes) {
        const auto& b = tb.box;
        const double m = cfg.hitbox_margin;
        if (point.x < b.x - m || point.x > b.x + b.w + m || point.y < b.y - m || point.y > b.y + b.h + m) continue;
        const double d = std::hypot(point.x - b.center_x(), point.y - b.center_y());
        if (d < best_dist || (d == best_dist && best && tb.identity < *best)) {
            best_dist = d;
            best = tb.identity;
        }
    }
    return best;
}

void advance_focus(GazeSessionState& state, double now, const GazeConfig& cfg) {
    for (auto it = state.focus.begin(); it != state.focus.end();) {
        auto& e = it->second;
        if (e.lifted && e.lift_expiry && now >= *e.lift_expiry - kTimeEpsilon) {
            e.lifted = false;
            e.lift_expiry.reset();
        }
        if (!e.segment_start && e.absent_since && now - *e.absent_since >= cfg.dwell_grace - kTimeEpsilon) {
            e.banked = 0.0;
            e.accumulator = 0.0;
            e.absent_since.reset();
        }
        const bool idle = !e.lifted && !e.segment_start && !e.absent_since && e.accumulator == 0.0;
        it = idle ? state.focus.erase(it) : std::next(it);
    }
}

void step_focus(GazeSessionState& state, const GazeSample& sample, const std::optional<PlayerId>& hit,
                const GazeConfig& cfg) {
    const double t = sample.timestamp;
    const auto target = sample.valid ? hit : std::nullopt;

    for (auto& [id, e] : state.focus) {
        if (target && *target == id) continue;
        if (e.segment_start) {
            e.banked += e.last_on - *e.segment_start;
            e.segment_start.reset();
            e.accumulator = e.banked;
            e.absent_since = t;
            if (e.lifted) e.lift_expiry = t + cfg.linger;
        }
    }

    if (target) {
        auto& e = state.focus[*target];
        if (!e.segment_start) {
            e.segment_start = t;
            e.absent_since.reset();
            e.lift_expiry.reset();
        }
        e.last_on = t;
        e.accumulator = e.banked + (t - *e.segment_start);
        if (e.accumulator >= cfg.dwell_trigger - kTimeEpsilon) e.lifted = true;
    }

    advance_focus(state, t, cfg);
    state.last_sample_time = t;
}

void step_filter(GazeSessionState& state, const GazeSample& sample, const GazeConfig& cfg) {
    if (!sample.valid) return;
    if (!state.filter_center) {
        state.filter_center = sample.point;
        state.filter_time = sample.timestamp;
        return;
    }
    const double dt = sample.timestamp - *state.filter_time;
    if (dt <= 0.0) return;
    const double alpha = 1.0 - std::pow(1.0 - cfg.center_smoothing, dt);
    auto& c = *state.filter_center;
    c.x += alpha * (sample.point.x - c.x);
    c.y += alpha * (sample.point.y - c.y);
    state.filter_time = sample.timestamp;
}

GazeOutput apply_gaze(const std::map<PlayerId, game_state::Importance>& importance, const GazeSessionState& state,
                      double now, const std::map<PlayerId, PixelPoint>& spotlight_anchors, const GazeConfig& cfg) {
    using game_state::Importance;
    GazeOutput out;
    out.importance = importance;
    for (const auto& [id, e] : state.focus) {
        if (e.lifted_at(now)) {
            auto it = out.importance.find(id);
            if (it != out.importance.end() && (it->second == Importance::Lv1 || it->second == Importance::Lv2)) {
                it->second = Importance::Lv2_5;
            }
        }
        if (e.accumulator > 0.0) out.glow[id] = e.glow(cfg);
    }
    for (const auto& [id, anchor] : spotlight_anchors) {
        if (!state.filter_center) {
            out.spotlight_on.insert(id);
            continue;
        }
        const double d = std::hypot(anchor.x - state.filter_center->x, anchor.y - state.filter_center->y);
        if (d <= cfg.filter_radius) out.spotlight_on.insert(id);
    }
    if (state.filter_center) out.darken = DarkenRegion{*state.filter_center, cfg.filter_radius};
    return out;
}

GazeEngine::GazeEngine(GazeConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void GazeEngine::observe(const GazeSample& sample, std::span<const track::TrackedBox> boxes_at_sample) {
    if (state_.last_sample_time && !(sample.timestamp > *state_.last_sample_time)) {
        throw StateError("gaze timestamps must increase strictly");
    }
    const auto hit = sample.valid ? hit_test(sample.point, boxes_at_sample, cfg_) : std::nullopt;
    step_focus(state_, sample, hit, cfg_);
    step_filter(state_, sample, cfg_);
}

GazeEngine::Frame GazeEngine::frame(double now, const std::map<PlayerId, game_state::Importance>& importance,
                                    const std::map<PlayerId, PixelPoint>& spotlight_anchors) {
    advance_focus(state_, now, cfg_);
    Frame f;
    f.output = apply_gaze(importance, state_, now, spotlight_anchors, cfg_);

    std::map<PlayerId, SpotlightFade> next;
    for (const auto& [id, anchor] : spotlight_anchors) {
        const bool on = f.output.spotlight_on.contains(id);
        const auto it = state_.spotlights.find(id);
        // A spotlight appearing for the first time starts settled.
        SpotlightFade fade = it == state_.spotlights.end() ? SpotlightFade{on, now, false} : it->second;
        if (fade.on != on) fade = {on, now, true};
        double phase = 1.0;
        if (fade.animating) {
            phase = std::clamp((now - fade.changed_at) / cfg_.spotlight_ease, 0.0, 1.0);
            if (phase >= 1.0) fade.animating = false;
        }
        const double eased = phase * phase * (3.0 - 2.0 * phase);
        const double opacity = on ? eased : 1.0 - eased;
        next[id] = fade;
        if (opacity > 0.0) f.spotlights[id] = {opacity, phase};
    }
    state_.spotlights = std::move(next);
    return f;
}

void GazeEngine::reset() { state_ = {}; }

std::vector<GazeSample> parse_gaze_trace(std::istream& in, const std::string& source) {
    std::vector<GazeSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) continue;
        const auto f = text::split(text::trim(line), ',');
        if (f.size() != 4) throw ParseError(source, line_no, "expected timestamp,x,y,valid");
        GazeSample s;
        long long valid = 0;
        if (!text::parse_double(f[0], s.timestamp) || !text::parse_double(f[1], s.point.x) ||
            !text::parse_double(f[2], s.point.y) || !text::parse_int(f[3], valid) || (valid != 0 && valid != 1)) {
            throw ParseError(source, line_no, "malformed gaze sample");
        }
        s.valid = valid == 1;
        if (!out.empty() && !(s.timestamp > out.back().timestamp)) {
            throw ValidationError("timestamp", source + ":" + std::to_string(line_no) + ": timestamps must increase");
        }
        out.push_back(s);
    }
    return out;
}

std::vector<GazeSample> load_gaze_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("path", "cannot open '" + path + "'");
    return parse_gaze_trace(in, path);
}

void write_gaze_trace(std::ostream& out, const std::vector<GazeSample>& samples) {
    for (const auto& s : samples) {
        out << text::format_double(s.timestamp) << ',' << text::format_double(s.point.x) << ','
            << text::format_double(s.point.y) << ',' << (s.valid ? 1 : 0) << '\n';
    }
}

}  // namespace courtside::gaze

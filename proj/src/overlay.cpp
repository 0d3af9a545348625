#include "courtside/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <tuple>

#include "courtside/errors.hpp"
#include "courtside/text.hpp"
#include "courtside/wire.hpp"

namespace courtside::overlay {

std::string_view to_string(Layer v) {
    switch (v) {
        case Layer::BackgroundDarken: return "background-darken";
        case Layer::CourtOverlay: return "court-overlay";
        case Layer::ForegroundRestore: return "foreground-restore";
        case Layer::Label: return "label";
    }
    return "?";
}

std::string_view to_string(Primitive v) {
    switch (v) {
        case Primitive::Spotlight: return "spotlight";
        case Primitive::OffenseRing: return "offense-ring";
        case Primitive::DefenseShield: return "defense-shield";
        case Primitive::Link: return "link";
        case Primitive::NameLabel: return "name-label";
        case Primitive::AudienceDarken: return "audience-darken";
        case Primitive::BackdropDarken: return "backdrop-darken";
        case Primitive::ForegroundRestore: return "foreground-restore";
        case Primitive::Highlight: return "highlight";
    }
    return "?";
}

std::string_view to_string(ColorRole v) {
    switch (v) {
        case ColorRole::None: return "none";
        case ColorRole::White: return "white";
        case ColorRole::Green: return "green";
        case ColorRole::Sequential: return "sequential";
        case ColorRole::Shield: return "shield";
        case ColorRole::Link: return "link";
        case ColorRole::Gold: return "gold";
        case ColorRole::Glow: return "glow";
        case ColorRole::Bright: return "bright";
        case ColorRole::Shade: return "shade";
    }
    return "?";
}

std::string_view to_string(Icon v) {
    switch (v) {
        case Icon::None: return "none";
        case Icon::Shooter: return "shooter";
        case Icon::Defender: return "defender";
    }
    return "?";
}

void OverlayConfig::validate() const {
    const std::pair<const char*, double> positive[] = {
        {"reference_height", reference_height}, {"ring_inner", ring_inner},     {"shield_radius", shield_radius},
        {"guard_distance_max", guard_distance_max}, {"spotlight_radius", spotlight_radius},
        {"ground_aspect", ground_aspect}};
    for (const auto& [name, value] : positive) {
        if (!(value > 0.0)) throw ValidationError(name, "must be positive");
    }
    if (!(ring_outer > ring_inner)) throw ValidationError("ring_outer", "must exceed ring_inner");
    const std::pair<const char*, double> unit[] = {{"backdrop_darken", backdrop_darken},
                                                   {"audience_darken", audience_darken},
                                                   {"foot_confidence_min", foot_confidence_min}};
    for (const auto& [name, value] : unit) {
        if (!(value >= 0.0 && value <= 1.0)) throw ValidationError(name, "must lie in [0,1]");
    }
    if (ring_stroke < 0.0 || shield_px_per_point < 0.0 || link_width < 0.0 || label_offset < 0.0) {
        throw ValidationError("overlay", "stroke widths and offsets must be non-negative");
    }
}

PixelPoint feet_anchor(const BoundingBox& box, const PoseKeypoints* keypoints, const OverlayConfig& cfg) {
    if (keypoints) {
        const Keypoint* left = keypoints->joint("left_foot");
        const Keypoint* right = keypoints->joint("right_foot");
        if (left && right && left->confidence >= cfg.foot_confidence_min &&
            right->confidence >= cfg.foot_confidence_min) {
            return {(left->point.x + right->point.x) / 2.0, (left->point.y + right->point.y) / 2.0};
        }
    }
    return {box.x + box.w / 2.0, box.y + box.h};
}

RingSpec ring_spec(double epv, double box_height, const OverlayConfig& cfg) {
    const double scale = box_height / cfg.reference_height;
    const double t = std::clamp(epv / 3.0, 0.0, 1.0);
    const double inner = cfg.ring_inner * scale;
    const double outer = cfg.ring_outer * scale;
    return {inner + (outer - inner) * t, inner, outer, t};
}

ShieldSpec shield_spec(double diff_percent, double dist_ft, double box_height, const OverlayConfig& cfg) {
    const double scale = box_height / cfg.reference_height;
    const double arc = std::clamp((cfg.guard_distance_max - dist_ft) / cfg.guard_distance_max, 0.0, 1.0);
    return {cfg.shield_radius * scale, std::max(0.0, -diff_percent) * cfg.shield_px_per_point * scale, arc};
}

namespace {

struct PlayerView {
    const track::TrackedBox* box = nullptr;
    PixelPoint feet;
};

class FrameIndexer {
public:
    FrameIndexer(const FrameInput& input, const OverlayConfig& cfg) {
        for (const auto& kp : input.keypoints) keypoints_.emplace(kp.player, &kp);
        for (const auto& tb : input.boxes) {
            if (views_.contains(tb.identity)) continue;
            const auto kp = keypoints_.find(tb.identity);
            views_[tb.identity] = {&tb, feet_anchor(tb.box, kp == keypoints_.end() ? nullptr : kp->second, cfg)};
        }
    }

    const PlayerView* find(const PlayerId& id) const {
        const auto it = views_.find(id);
        return it == views_.end() ? nullptr : &it->second;
    }

private:
    std::map<PlayerId, const PoseKeypoints*> keypoints_;
    std::map<PlayerId, PlayerView> views_;
};

RenderCommand make(Layer layer, Primitive primitive, ColorRole color, const PlayerId& player, PixelPoint at) {
    RenderCommand c;
    c.layer = layer;
    c.primitive = primitive;
    c.color = color;
    c.player = player;
    c.x = at.x;
    c.y = at.y;
    return c;
}

std::optional<CourtPoint> court_position(const FrameInput& input, const PlayerId& id) {
    if (!input.samples) return std::nullopt;
    const auto it = input.samples->players.find(id);
    if (it == input.samples->players.end()) return std::nullopt;
    return it->second;
}

bool attacks_left(const GameContext& game, const TeamId& team) {
    const auto it = game.attacks_left.find(team);
    return it == game.attacks_left.end() || it->second;
}

}  // namespace

std::map<PlayerId, PixelPoint> green_spotlight_anchors(const FrameInput& input, const OverlayConfig& cfg) {
    std::map<PlayerId, PixelPoint> out;
    if (!input.state) return out;
    const FrameIndexer index(input, cfg);
    for (const auto& id : input.state->open_players) {
        if (const auto* v = index.find(id)) out[id] = v->feet;
    }
    return out;
}

ComposedFrame compose_frame(const FrameInput& input, const GameContext& game, const OverlayConfig& cfg) {
    using game_state::Importance;
    ComposedFrame out;
    out.frame = input.frame;
    auto& cmds = out.commands;

    {
        RenderCommand c = make(Layer::BackgroundDarken, Primitive::BackdropDarken, ColorRole::Shade, {}, {});
        c.a = cfg.backdrop_darken;
        cmds.push_back(c);
    }
    if (input.gaze && input.gaze->output.darken) {
        const auto& dk = *input.gaze->output.darken;
        RenderCommand c = make(Layer::BackgroundDarken, Primitive::AudienceDarken, ColorRole::Shade, {}, dk.center);
        c.a = dk.radius;
        c.b = cfg.audience_darken;
        cmds.push_back(c);
    }
    if (input.mask) {
        RenderCommand c = make(Layer::ForegroundRestore, Primitive::ForegroundRestore, ColorRole::None, {}, {});
        c.a = input.mask->width;
        c.b = input.mask->height;
        cmds.push_back(c);
    }

    if (input.state) {
        const auto& st = *input.state;
        const FrameIndexer index(input, cfg);
        const auto& importance = input.gaze ? input.gaze->output.importance : st.importance;
        const PlayerView* handler = st.ball_handler ? index.find(*st.ball_handler) : nullptr;
        const auto handler_pos = st.ball_handler ? court_position(input, *st.ball_handler) : std::nullopt;

        auto warn = [&](const PlayerId& id, const std::string& what) {
            out.warnings.push_back("frame " + std::to_string(input.frame) + ": player " + id + " " + what);
        };

        for (const auto& [id, level] : importance) {
            double glow = 0.0;
            if (input.gaze) {
                const auto g = input.gaze->output.glow.find(id);
                if (g != input.gaze->output.glow.end()) glow = g->second;
            }
            const bool glowing = level == Importance::Lv2_5 || (level != Importance::Lv3 && glow > 0.0);
            if (level == Importance::Lv1 && !glowing) continue;

            const PlayerView* view = index.find(id);
            if (!view) {
                warn(id, "has no tracked box; skipped");
                continue;
            }
            const auto& box = view->box->box;
            const RosterEntry* entry = game.roster ? game.roster->find(id) : nullptr;
            const bool offensive = st.offense && entry && entry->team == *st.offense;

            if (level == Importance::Lv3) {
                const bool open = st.open_players.contains(id);
                RenderCommand c = make(Layer::CourtOverlay, Primitive::Spotlight,
                                       open ? ColorRole::Green : ColorRole::White, id, view->feet);
                c.a = cfg.spotlight_radius * box.h / cfg.reference_height;
                bool visible = true;
                if (open && input.gaze) {
                    const auto s = input.gaze->spotlights.find(id);
                    visible = s != input.gaze->spotlights.end();
                    if (visible) {
                        c.opacity = s->second.opacity;
                        c.ease_phase = s->second.ease_phase;
                    }
                }
                if (visible) cmds.push_back(c);
            }
            if (level == Importance::Lv2) {
                RenderCommand c = make(Layer::CourtOverlay, Primitive::Highlight, ColorRole::Bright, id,
                                       {box.center_x(), box.center_y()});
                c.a = box.w / 2.0;
                c.b = box.h / 2.0;
                cmds.push_back(c);
            }
            if (glowing) {
                RenderCommand c = make(Layer::CourtOverlay, Primitive::Highlight, ColorRole::Glow, id,
                                       {box.center_x(), box.center_y()});
                c.a = box.w / 2.0;
                c.b = box.h / 2.0;
                c.opacity = level == Importance::Lv2_5 ? 1.0 : std::clamp(glow, 0.0, 1.0);
                cmds.push_back(c);
            }

            if (game_state::numeric_level(level) >= 2.0 && st.offense) {
                const auto pos = court_position(input, id);
                if (!pos) {
                    warn(id, "has no court position; ability overlay skipped");
                } else if (offensive) {
                    double epv = 0.0;
                    if (game.epv && game.partition) {
                        const auto m = game.epv->find(id);
                        if (m != game.epv->end()) {
                            epv = ability::epv_at(m->second, ability::to_attacking_frame(*pos, attacks_left(game, *st.offense)),
                                                  *game.partition);
                        }
                    }
                    const RingSpec ring = ring_spec(epv, box.h, cfg);
                    RenderCommand c = make(Layer::CourtOverlay, Primitive::OffenseRing, ColorRole::Sequential, id,
                                           view->feet);
                    c.a = ring.radius;
                    c.b = ring.inner;
                    c.c = ring.outer;
                    c.d = cfg.ring_stroke * box.h / cfg.reference_height;
                    c.color_pos = ring.color_pos;
                    cmds.push_back(c);
                } else {
                    // DIFF% is taken in the region of the shooter being guarded.
                    const CourtPoint guarded = handler_pos ? *handler_pos : *pos;
                    double diff = 0.0;
                    if (game.defense && game.partition) {
                        diff = ability::diff_at(*game.defense, id,
                                                ability::to_attacking_frame(guarded, attacks_left(game, *st.offense)),
                                                *game.partition)
                                   .diff_percent;
                    }
                    const double d = handler_pos ? ability::dist(*pos, *handler_pos) : cfg.guard_distance_max;
                    const ShieldSpec shield = shield_spec(diff, d, box.h, cfg);
                    RenderCommand c = make(Layer::CourtOverlay, Primitive::DefenseShield, ColorRole::Shield, id,
                                           view->feet);
                    c.a = shield.radius;
                    c.b = shield.thickness;
                    c.c = shield.arc_fraction;
                    c.d = handler ? std::atan2(handler->feet.y - view->feet.y, handler->feet.x - view->feet.x) : 0.0;
                    cmds.push_back(c);
                }
            }

            if (game_state::numeric_level(level) > 2.0) {
                RenderCommand c = make(Layer::Label, Primitive::NameLabel, ColorRole::White, id,
                                       {box.center_x(), box.y - cfg.label_offset * box.h / cfg.reference_height});
                c.text = entry ? entry->name : id;
                if (entry && entry->role != StarRole::None) {
                    c.color = ColorRole::Gold;
                    c.icon = entry->role == StarRole::Shooter ? Icon::Shooter : Icon::Defender;
                }
                cmds.push_back(c);
            }
        }

        for (const auto& link : st.links) {
            const PlayerView* def = index.find(link.defender);
            const PlayerView* hnd = index.find(link.handler);
            if (!def || !hnd) continue;  // already reported above
            RenderCommand c = make(Layer::CourtOverlay, Primitive::Link, ColorRole::Link, link.defender, def->feet);
            c.a = hnd->feet.x;
            c.b = hnd->feet.y;
            c.c = cfg.link_width;
            cmds.push_back(c);
        }
    }

    std::stable_sort(cmds.begin(), cmds.end(), [](const RenderCommand& l, const RenderCommand& r) {
        return std::tie(l.layer, l.player, l.primitive) < std::tie(r.layer, r.player, r.primitive);
    });
    return out;
}

void append_frame(std::vector<std::uint8_t>& out, FrameIndex frame, std::span<const RenderCommand> commands) {
    if (frame < 0 || frame > 0xFFFFFFFFLL) throw RangeError("frame index does not fit the wire format");
    wire::ByteWriter w;
    w.u32(0);
    w.u8(kFrameMessage);
    w.u32(static_cast<std::uint32_t>(frame));
    w.u32(static_cast<std::uint32_t>(commands.size()));
    for (const auto& c : commands) {
        w.u8(static_cast<std::uint8_t>(c.layer));
        w.u8(static_cast<std::uint8_t>(c.primitive));
        w.u8(static_cast<std::uint8_t>(c.color));
        w.u8(static_cast<std::uint8_t>(c.icon));
        w.str(c.player);
        for (double v : {c.x, c.y, c.a, c.b, c.c, c.d, c.color_pos, c.opacity, c.ease_phase}) w.f64(v);
        w.str(c.text);
    }
    w.patch_u32(0, static_cast<std::uint32_t>(w.size() - 4));
    const auto& bytes = w.bytes();
    out.insert(out.end(), bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> encode_frame(FrameIndex frame, std::span<const RenderCommand> commands) {
    std::vector<std::uint8_t> out;
    append_frame(out, frame, commands);
    return out;
}

namespace {

template <typename E>
E checked_enum(std::uint8_t raw, std::uint8_t max, const char* what) {
    if (raw > max) throw ParseError("<wire>", 0, std::string("unknown ") + what + " " + std::to_string(raw));
    return static_cast<E>(raw);
}

DecodedFrame decode_payload(wire::ByteReader& r) {
    if (r.u8() != kFrameMessage) throw ParseError("<wire>", 0, "not a frame message");
    DecodedFrame f;
    f.frame = r.u32();
    const std::uint32_t count = r.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        RenderCommand c;
        c.layer = checked_enum<Layer>(r.u8(), 3, "layer");
        c.primitive = checked_enum<Primitive>(r.u8(), 8, "primitive");
        c.color = checked_enum<ColorRole>(r.u8(), 9, "color role");
        c.icon = checked_enum<Icon>(r.u8(), 2, "icon");
        c.player = r.str();
        for (double* v : {&c.x, &c.y, &c.a, &c.b, &c.c, &c.d, &c.color_pos, &c.opacity, &c.ease_phase}) *v = r.f64();
        c.text = r.str();
        f.commands.push_back(std::move(c));
    }
    return f;
}

}  // namespace

DecodedFrame decode_frame(std::span<const std::uint8_t> message) {
    wire::ByteReader head(message);
    const std::uint32_t len = head.u32();
    if (len != head.remaining()) throw ParseError("<wire>", 0, "length prefix does not match message size");
    wire::ByteReader body(message.subspan(4));
    auto f = decode_payload(body);
    if (!body.done()) throw ParseError("<wire>", 0, "trailing bytes after frame");
    return f;
}

std::vector<DecodedFrame> decode_frames(std::span<const std::uint8_t> stream) {
    std::vector<DecodedFrame> out;
    std::size_t pos = 0;
    while (pos < stream.size()) {
        wire::ByteReader head(stream.subspan(pos));
        const std::uint32_t len = head.u32();
        if (head.remaining() < len) throw ParseError("<wire>", 0, "truncated frame stream");
        out.push_back(decode_frame(stream.subspan(pos, 4 + static_cast<std::size_t>(len))));
        pos += 4 + static_cast<std::size_t>(len);
    }
    return out;
}

void write_text(std::ostream& out, FrameIndex frame, std::span<const RenderCommand> commands) {
    for (const auto& c : commands) {
        out << frame << ' ' << to_string(c.layer) << ' ' << to_string(c.primitive) << ' '
            << (c.player.empty() ? "-" : c.player) << ' ' << to_string(c.color) << ' ' << to_string(c.icon);
        for (double v : {c.x, c.y, c.a, c.b, c.c, c.d, c.color_pos, c.opacity, c.ease_phase}) {
            out << ' ' << text::format_double(v);
        }
        if (!c.text.empty()) out << " \"" << c.text << '"';
        out << '\n';
    }
}

}  // namespace courtside::overlay

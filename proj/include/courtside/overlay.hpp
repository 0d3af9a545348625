#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "courtside/ability.hpp"
#include "courtside/game_state.hpp"
#include "courtside/gaze.hpp"
#include "courtside/track.hpp"
#include "courtside/types.hpp"

// Per-frame render commands for the embedded visualizations, plus their binary
// wire encoding. Rasterization is left to the viewer.

namespace courtside::overlay {

enum class Layer : std::uint8_t { BackgroundDarken = 0, CourtOverlay = 1, ForegroundRestore = 2, Label = 3 };

enum class Primitive : std::uint8_t {
    Spotlight = 0,
    OffenseRing = 1,
    DefenseShield = 2,
    Link = 3,
    NameLabel = 4,
    AudienceDarken = 5,
    BackdropDarken = 6,
    ForegroundRestore = 7,
    Highlight = 8,
};

enum class ColorRole : std::uint8_t {
    None = 0,
    White = 1,       // spotlight of a key offensive player
    Green = 2,       // spotlight of an open player
    Sequential = 3,  // EPV ring; color_pos picks the scale position
    Shield = 4,
    Link = 5,
    Gold = 6,   // star player label
    Glow = 7,   // gaze focus highlight
    Bright = 8, // key defender highlight
    Shade = 9,  // darkening
};

enum class Icon : std::uint8_t { None = 0, Shooter = 1, Defender = 2 };

std::string_view to_string(Layer v);
std::string_view to_string(Primitive v);
std::string_view to_string(ColorRole v);
std::string_view to_string(Icon v);

/// Geometry per primitive (pixels, angles in radians in image coordinates):
///   BackdropDarken     a = darken strength in [0,1]
///   AudienceDarken     (x,y) disk center, a = radius, b = strength; outside the disk is darkened
///   ForegroundRestore  a = frame width, b = frame height
///   Spotlight          (x,y) feet, a = radius
///   Highlight          (x,y) box center, a = half width, b = half height
///   OffenseRing        (x,y) feet, a = radius, b = inner radius, c = outer radius, d = stroke width
///   DefenseShield      (x,y) feet, a = radius, b = thickness, c = arc fraction of a full turn, d = orientation
///   Link               (x,y) defender feet, (a,b) handler feet, c = width
///   NameLabel          (x,y) bottom-center of the label
/// Ground-plane primitives (spotlight, ring, shield) are ellipses whose vertical
/// radius is OverlayConfig::ground_aspect times the horizontal one.
struct RenderCommand {
    Layer layer = Layer::CourtOverlay;
    Primitive primitive = Primitive::Spotlight;
    ColorRole color = ColorRole::None;
    Icon icon = Icon::None;
    PlayerId player;  // empty for frame-wide commands
    double x = 0.0, y = 0.0;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double color_pos = 0.0;
    double opacity = 1.0;
    double ease_phase = 1.0;
    std::string text;

    friend bool operator==(const RenderCommand&, const RenderCommand&) = default;
};

struct OverlayConfig {
    double reference_height = 180.0;  // box height at which the pixel sizes below apply
    double ring_inner = 18.0;
    double ring_outer = 48.0;
    double ring_stroke = 4.0;
    double shield_radius = 34.0;
    double shield_px_per_point = 2.0;  // thickness per point of negative DIFF%
    double guard_distance_max = 12.0;  // ft
    double spotlight_radius = 28.0;
    double link_width = 3.0;
    double label_offset = 8.0;
    double ground_aspect = 0.35;
    double backdrop_darken = 0.35;
    double audience_darken = 0.6;
    double foot_confidence_min = 0.3;

    void validate() const;
};

/// Midpoint of the feet when both foot keypoints are confident; otherwise the
/// bottom-center of the box.
PixelPoint feet_anchor(const BoundingBox& box, const PoseKeypoints* keypoints, const OverlayConfig& cfg);

struct RingSpec {
    double radius, inner, outer, color_pos;
};
RingSpec ring_spec(double epv, double box_height, const OverlayConfig& cfg);

struct ShieldSpec {
    double radius, thickness, arc_fraction;
};
ShieldSpec shield_spec(double diff_percent, double dist_ft, double box_height, const OverlayConfig& cfg);

/// Game-wide, immutable inputs shared by every frame.
struct GameContext {
    const Roster* roster = nullptr;
    const ability::RegionPartition* partition = nullptr;
    const std::map<PlayerId, ability::EpvMap>* epv = nullptr;
    const ability::DefenseTable* defense = nullptr;
    std::map<TeamId, bool> attacks_left;  // teams absent here attack the x=0 basket
};

struct FrameInput {
    FrameIndex frame = 0;
    std::span<const track::TrackedBox> boxes;  // boxes at `frame`
    const game_state::GameStateFrame* state = nullptr;
    const game_state::FrameSamples* samples = nullptr;  // court positions at `frame`
    std::span<const PoseKeypoints> keypoints;           // at `frame`
    const SegmentationMask* mask = nullptr;
    const gaze::GazeEngine::Frame* gaze = nullptr;  // null: no gaze interaction
};

struct ComposedFrame {
    FrameIndex frame = 0;
    std::vector<RenderCommand> commands;
    std::vector<std::string> warnings;
};

/// Spotlight anchors of the open players, for GazeEngine::frame.
std::map<PlayerId, PixelPoint> green_spotlight_anchors(const FrameInput& input, const OverlayConfig& cfg);

/// Pure: ordered by (layer, player, primitive).
ComposedFrame compose_frame(const FrameInput& input, const GameContext& game, const OverlayConfig& cfg);

/// Frame message: u32 payload length, u8 type 1, u32 frame, u32 count, commands.
std::vector<std::uint8_t> encode_frame(FrameIndex frame, std::span<const RenderCommand> commands);
void append_frame(std::vector<std::uint8_t>& out, FrameIndex frame, std::span<const RenderCommand> commands);

struct DecodedFrame {
    FrameIndex frame = 0;
    std::vector<RenderCommand> commands;
};
/// Decodes one frame message; throws ParseError on malformed input.
DecodedFrame decode_frame(std::span<const std::uint8_t> message);
/// Splits a concatenation of frame messages.
std::vector<DecodedFrame> decode_frames(std::span<const std::uint8_t> stream);

/// Human-readable dump, one command per line.
void write_text(std::ostream& out, FrameIndex frame, std::span<const RenderCommand> commands);

inline constexpr std::uint8_t kFrameMessage = 0x01;

}  // namespace courtside::overlay

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace courtside {

using FrameIndex = std::int64_t;
using PlayerId = std::string;
using TeamId = std::string;

/// Reserved entity name for the ball in tracking data.
inline constexpr const char* kBallEntity = "BALL";

/// Axis-aligned box in pixels, top-left origin.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const noexcept { return w * h; }
    double center_x() const noexcept { return x + w / 2.0; }
    double center_y() const noexcept { return y + h / 2.0; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct PixelPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Court position in feet. x runs 0..94 along the length, y 0..50 across.
struct CourtPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const CourtPoint&, const CourtPoint&) = default;
};

inline constexpr double kCourtLength = 94.0;
inline constexpr double kCourtWidth = 50.0;

struct Detection {
    FrameIndex frame = 0;
    BoundingBox box;
    PlayerId identity;
    double confidence = 0.0;

    friend bool operator==(const Detection&, const Detection&) = default;
};

/// One positional sample; `entity` is a player id or kBallEntity.
struct CourtSample {
    FrameIndex frame = 0;
    std::string entity;
    CourtPoint position;
    std::optional<double> height;  // ball only, feet

    bool is_ball() const { return entity == kBallEntity; }

    friend bool operator==(const CourtSample&, const CourtSample&) = default;
};

/// Run-length-encoded binary mask, row-major, first run counts background pixels.
struct SegmentationMask {
    FrameIndex frame = 0;
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> runs;

    /// Expands to one byte per pixel (1 = foreground).
    std::vector<std::uint8_t> decode() const;
    std::uint64_t foreground_count() const;

    friend bool operator==(const SegmentationMask&, const SegmentationMask&) = default;
};

struct Keypoint {
    std::string joint;
    PixelPoint point;
    double confidence = 0.0;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct PoseKeypoints {
    FrameIndex frame = 0;
    PlayerId player;
    std::vector<Keypoint> joints;

    const Keypoint* joint(std::string_view name) const;

    friend bool operator==(const PoseKeypoints&, const PoseKeypoints&) = default;
};

struct ShotRecord {
    PlayerId player;
    CourtPoint position;
    bool made = false;
    int points = 2;

    friend bool operator==(const ShotRecord&, const ShotRecord&) = default;
};

struct DefenseRecord {
    PlayerId player;
    std::string region;
    double diff_percent = 0.0;

    friend bool operator==(const DefenseRecord&, const DefenseRecord&) = default;
};

enum class StarRole { None, Shooter, Defender };

struct RosterEntry {
    PlayerId player;
    std::string name;
    TeamId team;
    StarRole role = StarRole::None;

    friend bool operator==(const RosterEntry&, const RosterEntry&) = default;
};

class Roster {
public:
    Roster() = default;
    /// Throws ValidationError on duplicate ids.
    explicit Roster(std::vector<RosterEntry> entries);

    const RosterEntry* find(const PlayerId& id) const;
    bool contains(const PlayerId& id) const { return find(id) != nullptr; }
    /// Team of `id`; throws NotFoundError for unknown players.
    const TeamId& team_of(const PlayerId& id) const;
    /// Entries in ascending player-id order.
    const std::vector<RosterEntry>& entries() const noexcept { return entries_; }
    std::vector<TeamId> teams() const;

    friend bool operator==(const Roster&, const Roster&) = default;

private:
    std::vector<RosterEntry> entries_;
};

std::string_view to_string(StarRole role);
std::optional<StarRole> star_role_from_string(std::string_view text);

}  // namespace courtside

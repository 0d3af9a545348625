#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtside/ability.hpp"
#include "courtside/config.hpp"
#include "courtside/game_state.hpp"
#include "courtside/overlay.hpp"
#include "courtside/track.hpp"
#include "courtside/types.hpp"

// A preprocessed game: everything the presentation path needs, immutable once built.
//
// On disk a bundle is a directory holding bundle.json plus tracks.csv,
// tracking.csv, gamestate.csv, epvmap.csv, defense.csv, roster.csv,
// partition.csv, masks.rle and keypoints.csv. Tracking frames share the video
// frame index.

namespace courtside {

struct BundleMeta {
    std::string game_id;
    FrameIndex frame_count = 0;
    int width = 1280;
    int height = 720;
    std::map<TeamId, bool> attacks_left;
    std::optional<std::string> video;  // file name inside the bundle directory
    EngineConfig config;

    double frame_rate() const noexcept { return config.game_state.frame_rate; }
};

class GameBundle {
public:
    GameBundle() = default;
    /// Sorts and indexes the streams; throws ValidationError when they do not fit
    /// [0, frame_count) or reference players missing from the roster.
    GameBundle(BundleMeta meta, std::vector<track::TrackedBox> tracks, std::vector<CourtSample> tracking,
               std::vector<game_state::GameStateFrame> states, std::map<PlayerId, ability::EpvMap> epv,
               std::vector<DefenseRecord> defense, ability::RegionPartition partition, Roster roster,
               std::vector<SegmentationMask> masks, std::vector<PoseKeypoints> keypoints);

    const BundleMeta& meta() const noexcept { return meta_; }
    const std::vector<track::TrackedBox>& tracks() const noexcept { return tracks_; }
    const std::vector<CourtSample>& tracking() const noexcept { return tracking_; }
    const game_state::TrackingStore& store() const noexcept { return store_; }
    const std::vector<game_state::GameStateFrame>& states() const noexcept { return states_; }
    const std::map<PlayerId, ability::EpvMap>& epv() const noexcept { return epv_; }
    const std::vector<DefenseRecord>& defense_records() const noexcept { return defense_records_; }
    const ability::DefenseTable& defense() const noexcept { return defense_; }
    const ability::RegionPartition& partition() const noexcept { return partition_; }
    const Roster& roster() const noexcept { return roster_; }
    const std::vector<SegmentationMask>& masks() const noexcept { return masks_; }
    const std::vector<PoseKeypoints>& keypoints() const noexcept { return keypoints_; }

    std::span<const track::TrackedBox> boxes_at(FrameIndex frame) const;
    std::span<const PoseKeypoints> keypoints_at(FrameIndex frame) const;
    const SegmentationMask* mask_at(FrameIndex frame) const;
    /// Frame presented at time `t` (s), clamped to the game.
    FrameIndex frame_at_time(double t) const;

    overlay::GameContext context() const;
    overlay::FrameInput frame_input(FrameIndex frame, const gaze::GazeEngine::Frame* gaze) const;

private:
    BundleMeta meta_;
    std::vector<track::TrackedBox> tracks_;
    std::vector<CourtSample> tracking_;
    game_state::TrackingStore store_;
    std::vector<game_state::GameStateFrame> states_;
    std::map<PlayerId, ability::EpvMap> epv_;
    std::vector<DefenseRecord> defense_records_;
    ability::DefenseTable defense_;
    ability::RegionPartition partition_;
    Roster roster_;
    std::vector<SegmentationMask> masks_;
    std::vector<PoseKeypoints> keypoints_;
    std::vector<std::size_t> box_offsets_;  // frame_count + 1 offsets into tracks_
    std::vector<std::size_t> keypoint_offsets_;
    std::map<FrameIndex, std::size_t> mask_index_;
};

struct PreprocessInputs {
    std::filesystem::path detections;
    std::filesystem::path tracking;
    std::filesystem::path masks;
    std::filesystem::path shots;
    std::filesystem::path defense;
    std::filesystem::path roster;
    std::optional<std::filesystem::path> keypoints;
    std::optional<std::filesystem::path> partition;  // standard partition when absent
    std::optional<std::filesystem::path> video;
    std::string game_id = "game";
    std::optional<FrameIndex> frame_count;  // default: one past the last frame of any stream
    std::map<TeamId, bool> attacks_left;
};

/// Loads and validates every input, runs track post-processing, game-state
/// derivation and EPV aggregation. Missing files raise ValidationError naming the path.
GameBundle preprocess(const PreprocessInputs& inputs, const EngineConfig& cfg);

/// Writes the bundle directory (created if needed). Copies the video when set.
void write_bundle(const GameBundle& bundle, const std::filesystem::path& dir,
                  const std::optional<std::filesystem::path>& video_source = std::nullopt);
GameBundle load_bundle(const std::filesystem::path& dir);

nlohmann::json meta_to_json(const BundleMeta& meta);

}  // namespace courtside

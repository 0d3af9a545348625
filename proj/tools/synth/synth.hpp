#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <tuple>
#include <string>
#include <vector>

#include "courtside/gaze.hpp"
#include "courtside/track.hpp"
#include "courtside/types.hpp"

// Seeded synthetic data: tracking scenes for the evaluator and a small scripted
// game used as the shipped fixture.

namespace courtside::synth {

/// mt19937_64 with hand-rolled conversions so streams match across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    bool chance(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

struct SceneOptions {
    int players = 10;
    int frames = 60;
    double dip_rate = 0.06;      // per detection: confidence drops into the low band
    double dropout_rate = 0.03;  // per frame and player: start of a missed run
    int max_dropout = 3;         // frames per missed run
    double max_speed = 2.5;      // px per frame
};

struct Scene {
    std::vector<track::TrackedBox> ground_truth;  // one exact affine box per player and frame
    std::vector<Detection> detections;            // what a detector would report
};

/// Constant-velocity players whose boxes stay separated, with confidence dips
/// into the low band and short dropouts. Every scene has at least one dip or dropout.
Scene make_scene(const SceneOptions& options, Rng& rng);

/// Box of a player moving from `start` with constant `velocity` (x, y, w, h per frame).
BoundingBox affine_box(const BoundingBox& start, const BoundingBox& velocity, FrameIndex frame);

struct FixtureGame {
    int width = 1280;
    int height = 720;
    int frames = 150;
    double frame_rate = 30.0;
    std::string game_id = "demo";
    std::map<TeamId, bool> attacks_left;
    std::vector<RosterEntry> roster;
    std::vector<Detection> detections;
    std::vector<CourtSample> tracking;
    std::vector<SegmentationMask> masks;
    std::vector<PoseKeypoints> keypoints;
    std::vector<ShotRecord> shots;
    std::vector<DefenseRecord> defense;
    std::vector<gaze::GazeSample> gaze;
};

/// Court feet to pixels for the fixture camera.
PixelPoint project(const CourtPoint& p);
/// Player box standing at court position `p`.
BoundingBox player_box(const CourtPoint& p);

/// A scripted half-court possession with two passes, ten players and a gaze trace.
FixtureGame make_fixture_game(std::uint64_t seed);

/// Writes the raw inputs (detections.csv, tracking.csv, masks.rle, keypoints.csv,
/// shots.csv, defense.csv, roster.csv, game.json, gaze.csv) into `dir`.
void write_fixture(const FixtureGame& game, const std::filesystem::path& dir);

}  // namespace courtside::synth

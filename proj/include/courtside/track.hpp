#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "courtside/types.hpp"

// Detection post-processing: confidence clustering, two-stage tracker
// association (ByteTrack-style), gap interpolation and temporal smoothing.

namespace courtside::track {

enum class Assignment { Greedy, Hungarian };

struct MatcherConfig {
    double t_high = 0.6;
    double t_low = 0.1;
    double iou_match_min = 0.3;
    int max_gap = 4;
    int smooth_window = 5;
    Assignment assignment = Assignment::Greedy;

    /// Throws ValidationError when thresholds are out of order or out of range.
    void validate() const;
};

enum class BoxSource { Detected, Interpolated };

struct TrackedBox {
    FrameIndex frame = 0;
    PlayerId identity;
    BoundingBox box;
    BoxSource source = BoxSource::Detected;
    /// Detector score; interpolated boxes carry the smaller endpoint score.
    double confidence = 0.0;

    friend bool operator==(const TrackedBox&, const TrackedBox&) = default;
};

/// Intersection over union. Symmetric, in [0,1]; two zero-area boxes give 0.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

struct Clusters {
    std::vector<Detection> high;
    std::vector<Detection> low;
    std::vector<Detection> rejected;
};

/// score > t_high -> high; t_low < score <= t_high -> low; otherwise rejected.
Clusters cluster_detections(std::span<const Detection> detections, const MatcherConfig& cfg);

/// Constant-velocity Kalman filter over (cx, cy, w, h, vcx, vcy, vw, vh) with
/// noise scaled by box height.
class KalmanBoxFilter {
public:
    using State = Eigen::Matrix<double, 8, 1>;
    using Covariance = Eigen::Matrix<double, 8, 8>;

    static constexpr double kStdWeightPosition = 1.0 / 20.0;
    static constexpr double kStdWeightVelocity = 1.0 / 160.0;

    explicit KalmanBoxFilter(const BoundingBox& first_observation);

    /// Advances one frame. Returns the predicted box.
    BoundingBox predict();
    /// Standard measurement correction with the observed box.
    void update(const BoundingBox& observation);

    /// Current state as a box; width/height are clamped to >= 0.
    BoundingBox box() const;
    const State& state() const noexcept { return mean_; }
    const Covariance& covariance() const noexcept { return covariance_; }

private:
    State mean_;
    Covariance covariance_;
};

struct TrackerState {
    std::uint64_t track_id = 0;
    PlayerId identity;
    KalmanBoxFilter filter;
    BoundingBox predicted;
    FrameIndex last_updated = 0;
    int hits = 0;
};

struct AssociationResult {
    std::vector<TrackedBox> matched;
    /// Trackers spawned this frame (already appended to the tracker list).
    std::size_t spawned = 0;
};

/// Runs the per-video association loop. Owns the tracker set.
class Associator {
public:
    explicit Associator(MatcherConfig cfg);

    /// Predicts every live tracker to `frame`, associates the frame's detections,
    /// then retires trackers unmatched for more than max_gap frames.
    AssociationResult step(FrameIndex frame, std::span<const Detection> detections);

    const std::vector<TrackerState>& trackers() const noexcept { return trackers_; }
    const MatcherConfig& config() const noexcept { return cfg_; }

private:
    MatcherConfig cfg_;
    std::vector<TrackerState> trackers_;
    std::optional<FrameIndex> current_frame_;
    std::uint64_t next_id_ = 1;
};

/// One association pass over trackers already predicted to the current frame.
/// Stage 1 matches high boxes (unmatched ones spawn trackers); stage 2 matches
/// low boxes against the remaining trackers only. Matching is identity-aware.
AssociationResult associate_frame(std::vector<TrackerState>& trackers, FrameIndex frame,
                                  std::span<const Detection> high, std::span<const Detection> low,
                                  const MatcherConfig& cfg, std::uint64_t& next_track_id);

/// Fills per-identity gaps of at most max_gap frames by linear interpolation.
std::vector<TrackedBox> interpolate_gaps(std::vector<TrackedBox> boxes, int max_gap);
/// Centered moving average over `window` frames per identity and contiguous run.
/// The window shrinks symmetrically near run ends, so affine motion is a fixed point.
std::vector<TrackedBox> smooth(std::vector<TrackedBox> boxes, int window);

/// Full pipeline: association over every frame, interpolation, smoothing.
/// Output sorted by (frame, identity), at most one box per (frame, identity).
std::vector<TrackedBox> postprocess(std::span<const Detection> detections, const MatcherConfig& cfg);

/// The detector-only stage: every high-cluster box as a TrackedBox.
std::vector<TrackedBox> high_cluster_only(std::span<const Detection> detections, const MatcherConfig& cfg);

std::string_view to_string(BoxSource source);

/// tracks.csv: frame,identity,x,y,w,h,source,confidence
void write_tracks(std::ostream& out, const std::vector<TrackedBox>& boxes);
std::vector<TrackedBox> parse_tracks(std::istream& in, const std::string& source);

}  // namespace courtside::track

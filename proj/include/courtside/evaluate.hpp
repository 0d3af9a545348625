#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "courtside/track.hpp"
#include "courtside/types.hpp"

namespace courtside::evaluate {

/// IoU thresholds 0.50, 0.55, ..., 0.95 (computed as k/20 so 0.9 is the exact double).
std::array<double, 10> iou_thresholds();

/// A scored box in the evaluation's common currency.
struct ScoredBox {
    FrameIndex frame = 0;
    PlayerId identity;
    BoundingBox box;
    double confidence = 0.0;
};

struct IdentityAp {
    std::array<double, 10> ap{};  // per IoU threshold
    std::size_t ground_truth = 0;
    std::size_t predictions = 0;

    double ap_50_95() const;
};

struct EvaluationReport {
    double ap_50_95 = 0.0;
    double ap_50 = 0.0;
    double ap_75 = 0.0;
    std::map<PlayerId, IdentityAp> per_identity;  // identities present in ground truth
    std::size_t ground_truth_count = 0;
    std::size_t prediction_count = 0;
    /// Prediction identities absent from ground truth; all of their boxes are false positives.
    std::vector<PlayerId> unknown_identities;
};

/// All-point interpolated AP of one ranked list. `is_tp` is in rank order.
double average_precision(const std::vector<bool>& is_tp, std::size_t ground_truth);

/// Per-identity AP averaged over identities present in ground truth. Predictions
/// are ranked by descending confidence, then ascending frame, then input order;
/// each ranks greedily claims the unclaimed same-frame, same-identity ground
/// truth box of highest IoU at or above the threshold.
EvaluationReport evaluate_ap(std::span<const ScoredBox> predictions, std::span<const ScoredBox> ground_truth);

std::vector<ScoredBox> from_detections(std::span<const Detection> detections);
std::vector<ScoredBox> from_tracks(std::span<const track::TrackedBox> boxes);

}  // namespace courtside::evaluate

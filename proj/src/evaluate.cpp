#include "courtside/evaluate.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace courtside::evaluate {

std::array<double, 10> iou_thresholds() {
    std::array<double, 10> t{};
    for (int k = 0; k < 10; ++k) t[k] = static_cast<double>(10 + k) / 20.0;
    return t;
}

double IdentityAp::ap_50_95() const { return std::accumulate(ap.begin(), ap.end(), 0.0) / 10.0; }

double average_precision(const std::vector<bool>& is_tp, std::size_t ground_truth) {
    if (ground_truth == 0) return 0.0;
    const std::size_t n = is_tp.size();
    std::vector<double> precision(n), recall(n);
    std::size_t tp = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (is_tp[i]) ++tp;
        precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
        recall[i] = static_cast<double>(tp) / static_cast<double>(ground_truth);
    }
    // Precision envelope, then integrate over recall steps.
    for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (recall[i] != prev_recall) {
            ap += (recall[i] - prev_recall) * precision[i];
            prev_recall = recall[i];
        }
    }
    return ap;
}

EvaluationReport evaluate_ap(std::span<const ScoredBox> predictions, std::span<const ScoredBox> ground_truth) {
    EvaluationReport report;
    report.ground_truth_count = ground_truth.size();
    report.prediction_count = predictions.size();

    std::map<PlayerId, std::vector<std::size_t>> gt_by_id, pred_by_id;
    for (std::size_t i = 0; i < ground_truth.size(); ++i) gt_by_id[ground_truth[i].identity].push_back(i);
    for (std::size_t i = 0; i < predictions.size(); ++i) pred_by_id[predictions[i].identity].push_back(i);

    for (const auto& [id, indices] : pred_by_id) {
        if (!gt_by_id.contains(id)) report.unknown_identities.push_back(id);
    }

    const auto thresholds = iou_thresholds();
    for (const auto& [id, gt_indices] : gt_by_id) {
        IdentityAp result;
        result.ground_truth = gt_indices.size();

        std::vector<std::size_t> ranked = pred_by_id.contains(id) ? pred_by_id.at(id) : std::vector<std::size_t>{};
        result.predictions = ranked.size();
        std::stable_sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
            if (predictions[a].confidence != predictions[b].confidence) {
                return predictions[a].confidence > predictions[b].confidence;
            }
            return predictions[a].frame < predictions[b].frame;
        });

        std::map<FrameIndex, std::vector<std::size_t>> gt_by_frame;
        for (const auto g : gt_indices) gt_by_frame[ground_truth[g].frame].push_back(g);

        for (std::size_t t = 0; t < thresholds.size(); ++t) {
            std::set<std::size_t> claimed;
            std::vector<bool> is_tp;
            is_tp.reserve(ranked.size());
            for (const auto p : ranked) {
                const auto& pred = predictions[p];
                int best = -1;
                double best_iou = thresholds[t];
                if (auto it = gt_by_frame.find(pred.frame); it != gt_by_frame.end()) {
                    for (const auto g : it->second) {
                        if (claimed.contains(g)) continue;
                        const double overlap = track::iou(pred.box, ground_truth[g].box);
                        if (overlap >= best_iou && (best < 0 || overlap > best_iou)) {
                            best_iou = overlap;
                            best = static_cast<int>(g);
                        }
                    }
                }
                if (best >= 0) claimed.insert(static_cast<std::size_t>(best));
                is_tp.push_back(best >= 0);
            }
            result.ap[t] = average_precision(is_tp, result.ground_truth);
        }
        report.per_identity.emplace(id, result);
    }

    if (!report.per_identity.empty()) {
        const double n = static_cast<double>(report.per_identity.size());
        for (const auto& [id, r] : report.per_identity) {
            report.ap_50_95 += r.ap_50_95() / n;
            report.ap_50 += r.ap[0] / n;
            report.ap_75 += r.ap[5] / n;
        }
    }
    return report;
}

std::vector<ScoredBox> from_detections(std::span<const Detection> detections) {
    std::vector<ScoredBox> out;
    out.reserve(detections.size());
    for (const auto& d : detections) out.push_back({d.frame, d.identity, d.box, d.confidence});
    return out;
}

std::vector<ScoredBox> from_tracks(std::span<const track::TrackedBox> boxes) {
    std::vector<ScoredBox> out;
    out.reserve(boxes.size());
    for (const auto& b : boxes) out.push_back({b.frame, b.identity, b.box, b.confidence});
    return out;
}

}  // namespace courtside::evaluate

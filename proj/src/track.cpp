#include "courtside/track.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include <Eigen/Cholesky>

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

namespace courtside::track {

void MatcherConfig::validate() const {
    if (!(t_low >= 0.0 && t_low < t_high && t_high <= 1.0)) {
        throw ValidationError("t_high", "thresholds must satisfy 0 <= t_low < t_high <= 1");
    }
    if (!(iou_match_min > 0.0 && iou_match_min < 1.0)) {
        throw ValidationError("iou_match_min", "must lie in (0,1)");
    }
    if (max_gap < 0) throw ValidationError("max_gap", "must be non-negative");
    if (smooth_window < 1) throw ValidationError("smooth_window", "must be at least 1");
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (!(uni > 0.0)) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

Clusters cluster_detections(std::span<const Detection> detections, const MatcherConfig& cfg) {
    Clusters out;
    for (const auto& d : detections) {
        if (d.confidence > cfg.t_high) {
            out.high.push_back(d);
        } else if (d.confidence > cfg.t_low) {
            out.low.push_back(d);
        } else {
            out.rejected.push_back(d);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Kalman filter

namespace {

using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

double noise_scale(double h) { return std::max(h, 1.0); }

Vec4 measurement(const BoundingBox& b) { return Vec4(b.center_x(), b.center_y(), b.w, b.h); }

}  // namespace

KalmanBoxFilter::KalmanBoxFilter(const BoundingBox& first_observation) {
    mean_.setZero();
    mean_.head<4>() = measurement(first_observation);
    const double h = noise_scale(first_observation.h);
    State std_dev;
    std_dev << 2 * kStdWeightPosition * h, 2 * kStdWeightPosition * h, 2 * kStdWeightPosition * h,
        2 * kStdWeightPosition * h, 10 * kStdWeightVelocity * h, 10 * kStdWeightVelocity * h,
        10 * kStdWeightVelocity * h, 10 * kStdWeightVelocity * h;
    covariance_ = std_dev.array().square().matrix().asDiagonal();
}

BoundingBox KalmanBoxFilter::predict() {
    Covariance motion = Covariance::Identity();
    for (int i = 0; i < 4; ++i) motion(i, i + 4) = 1.0;

    const double h = noise_scale(mean_(3));
    State std_dev;
    std_dev << kStdWeightPosition * h, kStdWeightPosition * h, kStdWeightPosition * h, kStdWeightPosition * h,
        kStdWeightVelocity * h, kStdWeightVelocity * h, kStdWeightVelocity * h, kStdWeightVelocity * h;
    const Covariance process = std_dev.array().square().matrix().asDiagonal();

    mean_ = motion * mean_;
    covariance_ = motion * covariance_ * motion.transpose() + process;
    covariance_ = 0.5 * (covariance_ + covariance_.transpose());
    return box();
}

void KalmanBoxFilter::update(const BoundingBox& observation) {
    Mat48 proj = Mat48::Zero();
    proj.leftCols<4>().setIdentity();

    const double h = noise_scale(mean_(3));
    const Vec4 std_dev = Vec4::Constant(kStdWeightPosition * h);
    const Mat4 meas_noise = std_dev.array().square().matrix().asDiagonal();

    const Mat4 innovation_cov = proj * covariance_ * proj.transpose() + meas_noise;
    // K = P H^T S^-1, solved through the Cholesky factor of S.
    const Eigen::Matrix<double, 8, 4> gain =
        innovation_cov.llt().solve(proj * covariance_).transpose();
    const Vec4 innovation = measurement(observation) - proj * mean_;
    mean_ += gain * innovation;

    // Joseph form keeps the covariance symmetric positive semi-definite.
    const Covariance i_kh = Covariance::Identity() - gain * proj;
    covariance_ = i_kh * covariance_ * i_kh.transpose() + gain * meas_noise * gain.transpose();
    covariance_ = 0.5 * (covariance_ + covariance_.transpose());
}

BoundingBox KalmanBoxFilter::box() const {
    const double w = std::max(0.0, mean_(2));
    const double h = std::max(0.0, mean_(3));
    return {mean_(0) - w / 2.0, mean_(1) - h / 2.0, w, h};
}

// ---------------------------------------------------------------------------
// Association

namespace {

constexpr double kInfeasible = 1e9;

/// Minimum-cost assignment (Kuhn-Munkres, O(n^3)). Returns row -> column or -1.
std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int rows = static_cast<int>(cost.size());
    if (rows == 0) return {};
    const int cols = static_cast<int>(cost[0].size());
    const int n = std::max(rows, cols);
    auto at = [&](int r, int c) { return (r < rows && c < cols) ? cost[r][c] : kInfeasible; };

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            const int i0 = p[j0];
            double delta = std::numeric_limits<double>::infinity();
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> result(rows, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] >= 1 && p[j] <= rows && j <= cols) result[p[j] - 1] = j - 1;
    }
    return result;
}

std::vector<std::size_t> score_order(std::span<const Detection> boxes) {
    std::vector<std::size_t> order(boxes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (boxes[a].confidence != boxes[b].confidence) return boxes[a].confidence > boxes[b].confidence;
        return boxes[a].identity < boxes[b].identity;
    });
    return order;
}

/// Matches `boxes` against trackers whose `available` flag is set. Returns box -> tracker index or -1.
std::vector<int> match_stage(std::span<const Detection> boxes, const std::vector<TrackerState>& trackers,
                             const std::vector<bool>& available, const MatcherConfig& cfg) {
    std::vector<int> result(boxes.size(), -1);
    if (boxes.empty()) return result;

    if (cfg.assignment == Assignment::Hungarian) {
        std::vector<int> columns;
        for (std::size_t t = 0; t < trackers.size(); ++t) {
            if (available[t]) columns.push_back(static_cast<int>(t));
        }
        if (columns.empty()) return result;
        std::vector<std::vector<double>> cost(boxes.size(), std::vector<double>(columns.size(), kInfeasible));
        for (std::size_t b = 0; b < boxes.size(); ++b) {
            for (std::size_t c = 0; c < columns.size(); ++c) {
                const auto& tr = trackers[columns[c]];
                if (tr.identity != boxes[b].identity) continue;
                const double overlap = iou(boxes[b].box, tr.predicted);
                if (overlap >= cfg.iou_match_min) cost[b][c] = 1.0 - overlap;
            }
        }
        const auto assignment = solve_assignment(cost);
        for (std::size_t b = 0; b < boxes.size(); ++b) {
            const int c = assignment[b];
            if (c >= 0 && cost[b][c] < kInfeasible) result[b] = columns[c];
        }
        return result;
    }

    std::vector<bool> free = available;
    for (const auto b : score_order(boxes)) {
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t t = 0; t < trackers.size(); ++t) {
            if (!free[t] || trackers[t].identity != boxes[b].identity) continue;
            const double overlap = iou(boxes[b].box, trackers[t].predicted);
            if (overlap > best_iou) {
                best_iou = overlap;
                best = static_cast<int>(t);
            }
        }
        if (best >= 0 && best_iou >= cfg.iou_match_min) {
            result[b] = best;
            free[best] = false;
        }
    }
    return result;
}

TrackedBox emit(const Detection& d) { return {d.frame, d.identity, d.box, BoxSource::Detected, d.confidence}; }

}  // namespace

AssociationResult associate_frame(std::vector<TrackerState>& trackers, FrameIndex frame,
                                  std::span<const Detection> high, std::span<const Detection> low,
                                  const MatcherConfig& cfg, std::uint64_t& next_track_id) {
    AssociationResult result;
    const std::size_t existing = trackers.size();
    std::vector<bool> available(existing, true);

    // Stage 1: high boxes; a miss spawns a tracker.
    const auto high_match = match_stage(high, trackers, available, cfg);
    std::vector<TrackedBox> stage1;
    for (const auto b : score_order(high)) {
        const auto& det = high[b];
        if (const int t = high_match[b]; t >= 0) {
            auto& tr = trackers[t];
            tr.filter.update(det.box);
            tr.last_updated = frame;
            ++tr.hits;
            available[t] = false;
        } else {
            TrackerState tr{next_track_id++, det.identity, KalmanBoxFilter(det.box), det.box, frame, 1};
            trackers.push_back(std::move(tr));
            ++result.spawned;
        }
        stage1.push_back(emit(det));
    }

    // Stage 2: low boxes against trackers left over from stage 1; no spawning.
    available.resize(trackers.size(), false);
    const auto low_match = match_stage(low, trackers, available, cfg);
    std::vector<TrackedBox> stage2;
    for (const auto b : score_order(low)) {
        const int t = low_match[b];
        if (t < 0) continue;
        auto& tr = trackers[t];
        tr.filter.update(low[b].box);
        tr.last_updated = frame;
        ++tr.hits;
        stage2.push_back(emit(low[b]));
    }

    // One box per identity: stage-1 boxes first, then by score (both lists are score-ordered).
    std::map<PlayerId, TrackedBox> kept;
    for (auto* stage : {&stage1, &stage2}) {
        for (auto& tb : *stage) kept.try_emplace(tb.identity, tb);
    }
    for (auto& [id, tb] : kept) result.matched.push_back(std::move(tb));
    return result;
}

Associator::Associator(MatcherConfig cfg) : cfg_(cfg) { cfg_.validate(); }

AssociationResult Associator::step(FrameIndex frame, std::span<const Detection> detections) {
    // Every live tracker is current as of the previous step; advance one prediction per elapsed frame.
    const FrameIndex elapsed = current_frame_ ? std::max<FrameIndex>(1, frame - *current_frame_) : 1;
    for (auto& tr : trackers_) {
        for (FrameIndex i = 0; i < elapsed; ++i) tr.predicted = tr.filter.predict();
    }
    current_frame_ = frame;
    const auto clusters = cluster_detections(detections, cfg_);
    auto result = associate_frame(trackers_, frame, clusters.high, clusters.low, cfg_, next_id_);
    std::erase_if(trackers_, [&](const TrackerState& tr) { return frame - tr.last_updated > cfg_.max_gap; });
    return result;
}

// ---------------------------------------------------------------------------
// Interpolation / smoothing

namespace {

std::map<PlayerId, std::vector<TrackedBox>> by_identity(std::vector<TrackedBox> boxes) {
    std::map<PlayerId, std::vector<TrackedBox>> groups;
    for (auto& b : boxes) groups[b.identity].push_back(std::move(b));
    for (auto& [id, series] : groups) {
        std::stable_sort(series.begin(), series.end(),
                         [](const TrackedBox& a, const TrackedBox& b) { return a.frame < b.frame; });
    }
    return groups;
}

std::vector<TrackedBox> flatten_sorted(std::map<PlayerId, std::vector<TrackedBox>> groups) {
    std::vector<TrackedBox> out;
    for (auto& [id, series] : groups) {
        for (auto& b : series) out.push_back(std::move(b));
    }
    std::stable_sort(out.begin(), out.end(), [](const TrackedBox& a, const TrackedBox& b) {
        return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
    });
    return out;
}

double lerp(double a, double b, double t) { return a + t * (b - a); }

}  // namespace

std::vector<TrackedBox> interpolate_gaps(std::vector<TrackedBox> boxes, int max_gap) {
    auto groups = by_identity(std::move(boxes));
    for (auto& [id, series] : groups) {
        std::vector<TrackedBox> filled;
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (i > 0) {
                const auto& a = series[i - 1];
                const auto& b = series[i];
                const FrameIndex span = b.frame - a.frame;
                if (span >= 2 && span - 1 <= max_gap) {
                    for (FrameIndex k = 1; k < span; ++k) {
                        const double t = static_cast<double>(k) / static_cast<double>(span);
                        TrackedBox mid;
                        mid.frame = a.frame + k;
                        mid.identity = id;
                        mid.box = {lerp(a.box.x, b.box.x, t), lerp(a.box.y, b.box.y, t), lerp(a.box.w, b.box.w, t),
                                   lerp(a.box.h, b.box.h, t)};
                        mid.source = BoxSource::Interpolated;
                        mid.confidence = std::min(a.confidence, b.confidence);
                        filled.push_back(std::move(mid));
                    }
                }
            }
            filled.push_back(series[i]);
        }
        series = std::move(filled);
    }
    return flatten_sorted(std::move(groups));
}

std::vector<TrackedBox> smooth(std::vector<TrackedBox> boxes, int window) {
    const int half_window = std::max(0, (window - 1) / 2);
    auto groups = by_identity(std::move(boxes));
    if (half_window == 0) return flatten_sorted(std::move(groups));

    for (auto& [id, series] : groups) {
        std::vector<TrackedBox> result = series;
        std::size_t run_start = 0;
        while (run_start < series.size()) {
            std::size_t run_end = run_start + 1;
            while (run_end < series.size() && series[run_end].frame == series[run_end - 1].frame + 1) ++run_end;
            const std::size_t n = run_end - run_start;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t half =
                    std::min<std::size_t>({static_cast<std::size_t>(half_window), i, n - 1 - i});
                double sx = 0, sy = 0, sw = 0, sh = 0;
                for (std::size_t j = i - half; j <= i + half; ++j) {
                    const auto& b = series[run_start + j].box;
                    sx += b.x;
                    sy += b.y;
                    sw += b.w;
                    sh += b.h;
                }
                const double count = static_cast<double>(2 * half + 1);
                result[run_start + i].box = {sx / count, sy / count, sw / count, sh / count};
            }
            run_start = run_end;
        }
        series = std::move(result);
    }
    return flatten_sorted(std::move(groups));
}

std::vector<TrackedBox> postprocess(std::span<const Detection> detections, const MatcherConfig& cfg) {
    if (detections.empty()) return {};
    Associator associator(cfg);
    std::vector<TrackedBox> matched;

    std::size_t i = 0;
    FrameIndex first = detections.front().frame, last = detections.front().frame;
    for (const auto& d : detections) {
        first = std::min(first, d.frame);
        last = std::max(last, d.frame);
    }
    std::vector<Detection> sorted(detections.begin(), detections.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const Detection& a, const Detection& b) { return a.frame < b.frame; });
    for (FrameIndex frame = first; frame <= last; ++frame) {
        const std::size_t begin = i;
        while (i < sorted.size() && sorted[i].frame == frame) ++i;
        auto step = associator.step(frame, std::span<const Detection>(sorted).subspan(begin, i - begin));
        for (auto& tb : step.matched) matched.push_back(std::move(tb));
    }
    return smooth(interpolate_gaps(std::move(matched), cfg.max_gap), cfg.smooth_window);
}

std::vector<TrackedBox> high_cluster_only(std::span<const Detection> detections, const MatcherConfig& cfg) {
    std::vector<TrackedBox> out;
    for (const auto& d : detections) {
        if (d.confidence > cfg.t_high) out.push_back(emit(d));
    }
    std::stable_sort(out.begin(), out.end(), [](const TrackedBox& a, const TrackedBox& b) {
        return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
    });
    return out;
}

std::string_view to_string(BoxSource source) {
    return source == BoxSource::Interpolated ? "interpolated" : "detected";
}

void write_tracks(std::ostream& out, const std::vector<TrackedBox>& boxes) {
    using text::format_double;
    for (const auto& b : boxes) {
        out << b.frame << ',' << b.identity << ',' << format_double(b.box.x) << ',' << format_double(b.box.y) << ','
            << format_double(b.box.w) << ',' << format_double(b.box.h) << ',' << to_string(b.source) << ','
            << format_double(b.confidence) << '\n';
    }
}

std::vector<TrackedBox> parse_tracks(std::istream& in, const std::string& source) {
    std::vector<TrackedBox> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) continue;
        auto f = text::split(text::trim(line), ',');
        if (f.size() != 7 && f.size() != 8) throw ParseError(source, line_no, "expected 7 or 8 fields");
        TrackedBox b;
        long long frame = 0;
        if (!text::parse_int(f[0], frame) || frame < 0) throw ParseError(source, line_no, "malformed frame");
        b.frame = frame;
        b.identity = std::string(text::trim(f[1]));
        if (!text::parse_double(f[2], b.box.x) || !text::parse_double(f[3], b.box.y) ||
            !text::parse_double(f[4], b.box.w) || !text::parse_double(f[5], b.box.h)) {
            throw ParseError(source, line_no, "malformed box");
        }
        const auto src = text::trim(f[6]);
        if (src == "detected") {
            b.source = BoxSource::Detected;
        } else if (src == "interpolated") {
            b.source = BoxSource::Interpolated;
        } else {
            throw ParseError(source, line_no, "source must be detected|interpolated");
        }
        b.confidence = 1.0;
        if (f.size() == 8 && !text::parse_double(f[7], b.confidence)) {
            throw ParseError(source, line_no, "malformed confidence");
        }
        out.push_back(std::move(b));
    }
    std::stable_sort(out.begin(), out.end(), [](const TrackedBox& a, const TrackedBox& b) {
        return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
    });
    return out;
}

}  // namespace courtside::track

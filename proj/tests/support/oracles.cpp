#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace courtside::testing {

// ---- average precision ----------------------------------------------------

namespace {

double box_iou(const BoundingBox& a, const BoundingBox& b) {
    const double left = std::max(a.x, b.x);
    const double right = std::min(a.x + a.w, b.x + b.w);
    const double top = std::max(a.y, b.y);
    const double bottom = std::min(a.y + a.h, b.y + b.h);
    if (right <= left || bottom <= top) return 0.0;
    const double inter = (right - left) * (bottom - top);
    const double uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double ranked_ap(const std::vector<bool>& tp, std::size_t gt_count) {
    if (gt_count == 0) return 0.0;
    std::vector<double> precision;
    std::vector<std::size_t> hits;
    std::size_t count = 0;
    for (std::size_t i = 0; i < tp.size(); ++i) {
        count += tp[i] ? 1 : 0;
        hits.push_back(count);
        precision.push_back(static_cast<double>(count) / static_cast<double>(i + 1));
    }
    double ap = 0.0;
    for (std::size_t level = 1; level <= gt_count; ++level) {
        double best = 0.0;
        for (std::size_t i = 0; i < tp.size(); ++i) {
            if (hits[i] >= level) best = std::max(best, precision[i]);
        }
        ap += best / static_cast<double>(gt_count);
    }
    return ap;
}

}  // namespace

OracleAp brute_force_ap(std::span<const evaluate::ScoredBox> predictions,
                        std::span<const evaluate::ScoredBox> ground_truth) {
    static constexpr double kThresholds[10] = {0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    OracleAp out;
    std::set<PlayerId> identities;
    for (const auto& g : ground_truth) identities.insert(g.identity);

    for (const auto& id : identities) {
        std::vector<std::size_t> gts, preds;
        for (std::size_t i = 0; i < ground_truth.size(); ++i) {
            if (ground_truth[i].identity == id) gts.push_back(i);
        }
        for (std::size_t i = 0; i < predictions.size(); ++i) {
            if (predictions[i].identity == id) preds.push_back(i);
        }
        std::sort(preds.begin(), preds.end(), [&](std::size_t a, std::size_t b) {
            const auto& pa = predictions[a];
            const auto& pb = predictions[b];
            if (pa.confidence != pb.confidence) return pa.confidence > pb.confidence;
            if (pa.frame != pb.frame) return pa.frame < pb.frame;
            return a < b;
        });
        std::array<double, 10> aps{};
        for (int t = 0; t < 10; ++t) {
            std::vector<bool> used(gts.size(), false);
            std::vector<bool> tp;
            for (const auto p : preds) {
                int pick = -1;
                double pick_iou = 0.0;
                for (std::size_t k = 0; k < gts.size(); ++k) {
                    const auto& g = ground_truth[gts[k]];
                    if (used[k] || g.frame != predictions[p].frame) continue;
                    const double v = box_iou(predictions[p].box, g.box);
                    if (v >= kThresholds[t] && (pick < 0 || v > pick_iou)) {
                        pick = static_cast<int>(k);
                        pick_iou = v;
                    }
                }
                if (pick >= 0) used[pick] = true;
                tp.push_back(pick >= 0);
            }
            aps[t] = ranked_ap(tp, gts.size());
        }
        out.per_identity[id] = aps;
    }
    if (!identities.empty()) {
        const double n = static_cast<double>(identities.size());
        for (const auto& [id, aps] : out.per_identity) {
            double mean = 0.0;
            for (const double v : aps) mean += v;
            out.ap_50_95 += mean / 10.0 / n;
            out.ap_50 += aps[0] / n;
            out.ap_75 += aps[5] / n;
        }
    }
    return out;
}

// ---- Kalman filter --------------------------------------------------------

namespace {

constexpr double kPos = 1.0 / 20.0;
constexpr double kVel = 1.0 / 160.0;

using Mat8 = std::array<std::array<double, 8>, 8>;

Mat8 multiply(const Mat8& a, const Mat8& b) {
    Mat8 c{};
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            double s = 0.0;
            for (int k = 0; k < 8; ++k) s += a[i][k] * b[k][j];
            c[i][j] = s;
        }
    }
    return c;
}

Mat8 transpose(const Mat8& a) {
    Mat8 t{};
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) t[i][j] = a[j][i];
    }
    return t;
}

void symmetrize(Mat8& p) {
    for (int i = 0; i < 8; ++i) {
        for (int j = i + 1; j < 8; ++j) {
            const double v = 0.5 * (p[i][j] + p[j][i]);
            p[i][j] = p[j][i] = v;
        }
    }
}

std::array<std::array<double, 4>, 4> invert4(std::array<std::array<double, 4>, 4> m) {
    std::array<std::array<double, 4>, 4> inv{};
    for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        }
        std::swap(m[col], m[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = m[col][col];
        for (int k = 0; k < 4; ++k) {
            m[col][k] /= d;
            inv[col][k] /= d;
        }
        for (int r = 0; r < 4; ++r) {
            if (r == col) continue;
            const double f = m[r][col];
            for (int k = 0; k < 4; ++k) {
                m[r][k] -= f * m[col][k];
                inv[r][k] -= f * inv[col][k];
            }
        }
    }
    return inv;
}

BoundingBox as_box(const std::array<double, 8>& x) {
    const double w = std::max(0.0, x[2]);
    const double h = std::max(0.0, x[3]);
    return {x[0] - w / 2.0, x[1] - h / 2.0, w, h};
}

}  // namespace

KalmanOracle::KalmanOracle(const BoundingBox& first) {
    x_ = {first.x + first.w / 2.0, first.y + first.h / 2.0, first.w, first.h, 0, 0, 0, 0};
    const double h = std::max(first.h, 1.0);
    for (int i = 0; i < 4; ++i) p_[i][i] = std::pow(2.0 * kPos * h, 2);
    for (int i = 4; i < 8; ++i) p_[i][i] = std::pow(10.0 * kVel * h, 2);
}

BoundingBox KalmanOracle::predict() {
    Mat8 f{};
    for (int i = 0; i < 8; ++i) f[i][i] = 1.0;
    for (int i = 0; i < 4; ++i) f[i][i + 4] = 1.0;
    const double h = std::max(x_[3], 1.0);
    std::array<double, 8> next{};
    for (int i = 0; i < 8; ++i) {
        for (int k = 0; k < 8; ++k) next[i] += f[i][k] * x_[k];
    }
    x_ = next;
    p_ = multiply(multiply(f, p_), transpose(f));
    for (int i = 0; i < 4; ++i) p_[i][i] += std::pow(kPos * h, 2);
    for (int i = 4; i < 8; ++i) p_[i][i] += std::pow(kVel * h, 2);
    symmetrize(p_);
    return as_box(x_);
}

void KalmanOracle::update(const BoundingBox& z_box) {
    const double h = std::max(x_[3], 1.0);
    const double r = std::pow(kPos * h, 2);
    std::array<std::array<double, 4>, 4> s{};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) s[i][j] = p_[i][j] + (i == j ? r : 0.0);
    }
    const auto s_inv = invert4(s);
    // K = P[:, 0:4] S^-1
    std::array<std::array<double, 4>, 8> k{};
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 4; ++j) {
            for (int m = 0; m < 4; ++m) k[i][j] += p_[i][m] * s_inv[m][j];
        }
    }
    const double z[4] = {z_box.x + z_box.w / 2.0, z_box.y + z_box.h / 2.0, z_box.w, z_box.h};
    double innovation[4];
    for (int j = 0; j < 4; ++j) innovation[j] = z[j] - x_[j];
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 4; ++j) x_[i] += k[i][j] * innovation[j];
    }
    Mat8 a{};  // I - K H
    for (int i = 0; i < 8; ++i) {
        a[i][i] = 1.0;
        for (int j = 0; j < 4; ++j) a[i][j] -= k[i][j];
    }
    Mat8 next = multiply(multiply(a, p_), transpose(a));
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            for (int m = 0; m < 4; ++m) next[i][j] += k[i][m] * r * k[j][m];
        }
    }
    p_ = next;
    symmetrize(p_);
}

// ---- EPV ------------------------------------------------------------------

const ability::Region& owner_region(const ability::RegionPartition& partition, const CourtPoint& p) {
    for (const auto& region : partition.regions()) {
        if (std::any_of(region.polygons.begin(), region.polygons.end(),
                        [&](const ability::Polygon& poly) { return poly.contains(p); })) {
            return region;
        }
    }
    return partition.regions().back();
}

std::map<ability::RegionId, ability::EpvEntry> epv_rescan(const PlayerId& player, std::span<const ShotRecord> all_shots,
                                                         const ability::RegionPartition& partition) {
    std::map<ability::RegionId, ability::EpvEntry> out;
    for (const auto& region : partition.regions()) {
        // EPV as points scored per attempt.
        int attempts = 0, makes = 0, points = 0, league_attempts = 0, league_points = 0;
        for (const auto& s : all_shots) {
            if (owner_region(partition, s.position).id != region.id) continue;
            ++league_attempts;
            league_points += s.made ? region.point_value : 0;
            if (s.player == player) {
                ++attempts;
                makes += s.made ? 1 : 0;
                points += s.made ? region.point_value : 0;
            }
        }
        ability::EpvEntry e;
        e.attempts = attempts;
        e.makes = makes;
        if (region.point_value == 0) {
            e.epv = 0.0;
            e.is_default = attempts == 0;
        } else if (attempts > 0) {
            e.epv = static_cast<double>(points) / attempts;
        } else {
            e.is_default = true;
            e.epv = league_attempts > 0 ? static_cast<double>(league_points) / league_attempts : 1.0;
        }
        out[region.id] = e;
    }
    return out;
}

// ---- rasterizer -----------------------------------------------------------

Image source_frame(int width, int height, FrameIndex frame) {
    Image img{width, height, std::vector<Rgb>(static_cast<std::size_t>(width) * height)};
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto f = static_cast<int>(frame);
            img.at(x, y) = {static_cast<std::uint8_t>((x * 7 + f * 3) % 251), static_cast<std::uint8_t>((y * 5 + x) % 241),
                            static_cast<std::uint8_t>((x ^ y) + f)};
        }
    }
    return img;
}

namespace {

using overlay::ColorRole;
using overlay::Primitive;

Rgb color_of(ColorRole role, double color_pos) {
    switch (role) {
        case ColorRole::White: return {255, 255, 255};
        case ColorRole::Green: return {40, 220, 90};
        case ColorRole::Sequential: {
            const auto v = static_cast<std::uint8_t>(std::lround(60 + 195 * std::clamp(color_pos, 0.0, 1.0)));
            return {v, static_cast<std::uint8_t>(255 - v), 200};
        }
        case ColorRole::Shield: return {60, 110, 255};
        case ColorRole::Link: return {255, 200, 0};
        case ColorRole::Glow: return {255, 240, 160};
        case ColorRole::Bright: return {255, 255, 210};
        default: return {0, 0, 0};
    }
}

std::uint8_t mix(std::uint8_t p, std::uint8_t c, double alpha) {
    return static_cast<std::uint8_t>(std::lround(p + (c - p) * alpha));
}

std::uint8_t scale(std::uint8_t p, double factor) { return static_cast<std::uint8_t>(std::lround(p * factor)); }

template <typename Inside, typename Paint>
void for_pixels(Image& img, double x0, double y0, double x1, double y1, Inside inside, Paint paint) {
    const int ix0 = std::max(0, static_cast<int>(std::floor(x0)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y0)));
    const int ix1 = std::min(img.width, static_cast<int>(std::ceil(x1)) + 1);
    const int iy1 = std::min(img.height, static_cast<int>(std::ceil(y1)) + 1);
    for (int y = iy0; y < iy1; ++y) {
        for (int x = ix0; x < ix1; ++x) {
            if (inside(x + 0.5, y + 0.5)) paint(img.at(x, y));
        }
    }
}

void draw(Image& img, const overlay::RenderCommand& c, const overlay::OverlayConfig& cfg) {
    const Rgb col = color_of(c.color, c.color_pos);
    const double alpha = 0.5 * c.opacity;
    auto blend = [&](Rgb& p) { p = {mix(p.r, col.r, alpha), mix(p.g, col.g, alpha), mix(p.b, col.b, alpha)}; };
    const double aspect = cfg.ground_aspect;
    auto ground_r = [&](double px, double py) { return std::hypot(px - c.x, (py - c.y) / aspect); };

    switch (c.primitive) {
        case Primitive::BackdropDarken: {
            const double f = 1.0 - c.a * c.opacity;
            for (auto& p : img.pixels) p = {scale(p.r, f), scale(p.g, f), scale(p.b, f)};
            break;
        }
        case Primitive::AudienceDarken: {
            const double f = 1.0 - c.b * c.opacity;
            for (int y = 0; y < img.height; ++y) {
                for (int x = 0; x < img.width; ++x) {
                    if (std::hypot(x + 0.5 - c.x, y + 0.5 - c.y) > c.a) {
                        auto& p = img.at(x, y);
                        p = {scale(p.r, f), scale(p.g, f), scale(p.b, f)};
                    }
                }
            }
            break;
        }
        case Primitive::Spotlight:
            for_pixels(img, c.x - c.a, c.y - c.a * aspect, c.x + c.a, c.y + c.a * aspect,
                       [&](double px, double py) { return ground_r(px, py) <= c.a; }, blend);
            break;
        case Primitive::OffenseRing: {
            const double outer = c.a + c.d / 2.0;
            for_pixels(img, c.x - outer, c.y - outer * aspect, c.x + outer, c.y + outer * aspect,
                       [&](double px, double py) { return std::abs(ground_r(px, py) - c.a) <= std::max(c.d, 1.0) / 2.0; },
                       blend);
            break;
        }
        case Primitive::DefenseShield: {
            if (c.c <= 0.0) break;
            const double thickness = std::max(c.b, 1.0);
            const double outer = c.a + thickness;
            const double half = c.c * std::numbers::pi;
            for_pixels(
                img, c.x - outer, c.y - outer * aspect, c.x + outer, c.y + outer * aspect,
                [&](double px, double py) {
                    const double r = ground_r(px, py);
                    if (r < c.a || r > outer) return false;
                    double delta = std::atan2((py - c.y) / aspect, px - c.x) - c.d;
                    delta = std::remainder(delta, 2.0 * std::numbers::pi);
                    return std::abs(delta) <= half;
                },
                blend);
            break;
        }
        case Primitive::Link: {
            const double half = std::max(c.c, 1.0) / 2.0;
            for_pixels(
                img, std::min(c.x, c.a) - half, std::min(c.y, c.b) - half, std::max(c.x, c.a) + half,
                std::max(c.y, c.b) + half,
                [&](double px, double py) {
                    const double dx = c.a - c.x, dy = c.b - c.y;
                    const double len2 = dx * dx + dy * dy;
                    const double t = len2 > 0.0 ? std::clamp(((px - c.x) * dx + (py - c.y) * dy) / len2, 0.0, 1.0) : 0.0;
                    return std::hypot(px - (c.x + t * dx), py - (c.y + t * dy)) <= half;
                },
                blend);
            break;
        }
        case Primitive::Highlight:
            for_pixels(img, c.x - c.a, c.y - c.b, c.x + c.a, c.y + c.b,
                       [&](double px, double py) { return std::abs(px - c.x) <= c.a && std::abs(py - c.y) <= c.b; },
                       blend);
            break;
        case Primitive::NameLabel:
        case Primitive::ForegroundRestore:
            break;
    }
}

}  // namespace

Image rasterize(const Image& source, const SegmentationMask* mask, std::span<const overlay::RenderCommand> commands,
                const overlay::OverlayConfig& cfg, RasterStats* stats) {
    std::vector<overlay::RenderCommand> ordered(commands.begin(), commands.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.layer < b.layer; });
    const std::vector<std::uint8_t> bits = mask ? mask->decode() : std::vector<std::uint8_t>{};

    Image img = source;
    bool counted = false;
    auto count_touched = [&] {
        if (counted || !stats) return;
        counted = true;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (!bits[i]) continue;
            ++stats->mask_pixels;
            if (!(img.pixels[i] == source.pixels[i])) ++stats->mask_pixels_touched;
        }
    };
    for (const auto& c : ordered) {
        if (c.primitive == Primitive::ForegroundRestore) {
            count_touched();
            for (std::size_t i = 0; i < bits.size(); ++i) {
                if (bits[i]) img.pixels[i] = source.pixels[i];
            }
            continue;
        }
        draw(img, c, cfg);
    }
    count_touched();
    return img;
}

}  // namespace courtside::testing

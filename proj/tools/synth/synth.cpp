#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "courtside/ability.hpp"
#include "courtside/errors.hpp"
#include "courtside/ingest.hpp"

namespace courtside::synth {

namespace fs = std::filesystem;

BoundingBox affine_box(const BoundingBox& start, const BoundingBox& velocity, FrameIndex frame) {
    const double f = static_cast<double>(frame);
    return {start.x + velocity.x * f, start.y + velocity.y * f, start.w + velocity.w * f, start.h + velocity.h * f};
}

Scene make_scene(const SceneOptions& options, Rng& rng) {
    Scene scene;
    bool any_event = false;
    std::vector<std::vector<bool>> detected(options.players, std::vector<bool>(options.frames, true));
    std::vector<std::vector<double>> confidence(options.players, std::vector<double>(options.frames, 0.0));

    for (int p = 0; p < options.players; ++p) {
        const std::string id = "P" + std::string(p < 9 ? "0" : "") + std::to_string(p + 1);
        const BoundingBox start{60.0 + 120.0 * (p % 10), 80.0 + 260.0 * (p / 10), rng.uniform(40.0, 60.0),
                                rng.uniform(100.0, 140.0)};
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double speed = rng.uniform(0.0, options.max_speed);
        const BoundingBox velocity{speed * std::cos(angle), speed * std::sin(angle), rng.uniform(-0.05, 0.05),
                                   rng.uniform(-0.1, 0.1)};

        // Endpoints stay detected so every gap is interior.
        for (int f = 1; f < options.frames - 1; ++f) {
            if (detected[p][f - 1] && rng.chance(options.dropout_rate)) {
                const int run = static_cast<int>(rng.integer(1, options.max_dropout));
                for (int k = 0; k < run && f + k < options.frames - 1; ++k) detected[p][f + k] = false;
                f += run;  // the frame after a run is always detected
                any_event = true;
            }
        }
        for (int f = 0; f < options.frames; ++f) {
            const bool dip = f > 0 && f < options.frames - 1 && rng.chance(options.dip_rate);
            confidence[p][f] = dip ? rng.uniform(0.15, 0.55) : rng.uniform(0.7, 0.99);
            if (dip && detected[p][f]) any_event = true;
        }
        for (int f = 0; f < options.frames; ++f) {
            const auto box = affine_box(start, velocity, f);
            scene.ground_truth.push_back({f, id, box, track::BoxSource::Detected, 1.0});
            if (detected[p][f]) scene.detections.push_back({f, box, id, confidence[p][f]});
        }
    }
    if (!any_event && options.frames > 2) {
        for (auto& d : scene.detections) {
            if (d.frame == options.frames / 2) {
                d.confidence = 0.3;
                break;
            }
        }
    }
    std::stable_sort(scene.detections.begin(), scene.detections.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
    });
    return scene;
}

PixelPoint project(const CourtPoint& p) { return {40.0 + p.y * 24.0, 160.0 + p.x * 11.0}; }

BoundingBox player_box(const CourtPoint& p) {
    const PixelPoint feet = project(p);
    const double h = 110.0 + 0.12 * (feet.y - 160.0);
    const double w = 0.42 * h;
    return {feet.x - w / 2.0, feet.y - h, w, h};
}

namespace {

struct Script {
    PlayerId id;
    CourtPoint base;
    double phase;
};

CourtPoint offense_position(const Script& s, FrameIndex f) {
    const double t = static_cast<double>(f) / 30.0;
    return {s.base.x + 1.5 * std::sin(1.3 * t + s.phase), s.base.y + 1.0 * std::cos(0.9 * t + s.phase)};
}

/// Stands `gap` feet from the man, on the line to the basket.
CourtPoint guard_position(const CourtPoint& man, double gap) {
    const double dx = ability::kBasket.x - man.x;
    const double dy = ability::kBasket.y - man.y;
    const double len = std::hypot(dx, dy);
    return {man.x + dx / len * gap, man.y + dy / len * gap};
}

std::vector<std::uint8_t> rasterize_boxes(int width, int height, const std::vector<BoundingBox>& boxes) {
    std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height, 0);
    for (const auto& b : boxes) {
        const int x0 = std::max(0, static_cast<int>(std::floor(b.x)));
        const int y0 = std::max(0, static_cast<int>(std::floor(b.y)));
        const int x1 = std::min(width, static_cast<int>(std::ceil(b.x + b.w)));
        const int y1 = std::min(height, static_cast<int>(std::ceil(b.y + b.h)));
        for (int y = y0; y < y1; ++y) {
            std::fill(pixels.begin() + static_cast<std::ptrdiff_t>(y) * width + x0,
                      pixels.begin() + static_cast<std::ptrdiff_t>(y) * width + x1, std::uint8_t{1});
        }
    }
    return pixels;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

FixtureGame make_fixture_game(std::uint64_t seed) {
    Rng rng(seed);
    FixtureGame g;
    g.attacks_left = {{"AWAY", false}, {"HOME", true}};

    const std::vector<Script> offense = {{"H01", {31.0, 25.0}, 0.0},
                                         {"H02", {22.0, 8.0}, 1.1},
                                         {"H03", {22.0, 42.0}, 2.3},
                                         {"H04", {8.0, 3.0}, 0.7},
                                         {"H05", {12.0, 18.0}, 1.9}};
    // A03 sags off H03, leaving H03 open.
    const std::vector<std::pair<PlayerId, double>> defense = {
        {"A01", 4.0}, {"A02", 3.5}, {"A03", 9.0}, {"A04", 3.0}, {"A05", 2.5}};

    g.roster = {{"A01", "Avery Stone", "AWAY", StarRole::Defender}, {"A02", "Blake Rivera", "AWAY", StarRole::None},
                {"A03", "Casey Lin", "AWAY", StarRole::None},       {"A04", "Drew Okafor", "AWAY", StarRole::None},
                {"A05", "Emery Walsh", "AWAY", StarRole::None},     {"H01", "Finn Castro", "HOME", StarRole::Shooter},
                {"H02", "Gray Novak", "HOME", StarRole::None},      {"H03", "Harper Quinn", "HOME", StarRole::None},
                {"H04", "Indy Mercer", "HOME", StarRole::Shooter},  {"H05", "Jules Park", "HOME", StarRole::None}};

    // Possession: H01 holds, passes to H03 (frames 60-69), H03 passes back (110-119).
    auto holder_at = [](FrameIndex f) -> int {
        if (f < 60) return 0;
        if (f < 70) return -1;
        if (f < 110) return 2;
        if (f < 120) return -1;
        return 0;
    };

    for (FrameIndex f = 0; f < g.frames; ++f) {
        std::vector<std::pair<PlayerId, CourtPoint>> players;
        for (const auto& s : offense) players.emplace_back(s.id, offense_position(s, f));
        for (std::size_t i = 0; i < defense.size(); ++i) {
            players.emplace_back(defense[i].first, guard_position(players[i].second, defense[i].second));
        }

        CourtPoint ball;
        const int holder = holder_at(f);
        if (holder >= 0) {
            ball = {players[holder].second.x + 0.6, players[holder].second.y + 0.4};
        } else {
            const auto [from, to, start] = f < 70 ? std::tuple{0, 2, FrameIndex{60}} : std::tuple{2, 0, FrameIndex{110}};
            const double u = static_cast<double>(f - start + 1) / 11.0;
            const auto a = players[from].second;
            const auto b = players[to].second;
            ball = {a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u};
        }
        g.tracking.push_back({f, kBallEntity, ball, 4.0});

        std::vector<BoundingBox> boxes;
        for (const auto& [id, pos] : players) {
            g.tracking.push_back({f, id, pos, std::nullopt});
            const auto box = player_box(pos);
            boxes.push_back(box);

            PoseKeypoints kp{f, id, {}};
            const double foot_conf = f % 25 == 7 ? 0.2 : 0.9;
            kp.joints.push_back({"head", {box.center_x(), box.y + 0.08 * box.h}, 0.95});
            kp.joints.push_back({"left_foot", {box.x + 0.3 * box.w, box.y + box.h - 2.0}, foot_conf});
            kp.joints.push_back({"right_foot", {box.x + 0.7 * box.w, box.y + box.h}, 0.9});
            g.keypoints.push_back(std::move(kp));
        }
        for (std::size_t i = 0; i < players.size(); ++i) {
            // Detector noise: a few dips into the low band and short misses.
            const double r = rng.uniform();
            if (f > 0 && f + 1 < g.frames && r < 0.03) continue;
            const double conf = r < 0.10 ? rng.uniform(0.2, 0.55) : rng.uniform(0.7, 0.98);
            g.detections.push_back({f, boxes[i], players[i].first, std::round(conf * 1000.0) / 1000.0});
        }
        g.masks.push_back(ingest::encode_mask(f, g.width, g.height, rasterize_boxes(g.width, g.height, boxes)));
    }
    std::stable_sort(g.detections.begin(), g.detections.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
    });

    // Shot history in the attacking-half frame.
    for (const auto& entry : g.roster) {
        for (int k = 0; k < 40; ++k) {
            const CourtPoint p{round1(rng.uniform(0.5, 32.0)), round1(rng.uniform(0.5, 49.5))};
            const double d = ability::dist(p, ability::kBasket);
            const bool corner = p.x < 14.0 && (p.y < 3.0 || p.y >= 47.0);
            const int points = d > 23.75 || corner ? 3 : 2;
            const bool made = rng.chance(std::clamp(0.62 - 0.012 * d, 0.2, 0.7));
            g.shots.push_back({entry.player, p, made, points});
        }
    }

    const auto partition = ability::RegionPartition::standard();
    for (const auto& entry : g.roster) {
        for (const auto& region : partition.regions()) {
            if (region.point_value == 0) continue;
            double diff = round1(rng.uniform(-6.0, 3.0));
            if (entry.player == "A01" && region.id == "above_break3_center") diff = -3.6;
            g.defense.push_back({entry.player, region.id, diff});
        }
    }

    // Gaze at 60 Hz: a defender until lifted, away, a dropout, an open player, then the far corner.
    for (int k = 0; k < 300; ++k) {
        const double t = k / 60.0 + 0.004;
        const FrameIndex f = std::min<FrameIndex>(g.frames - 1, static_cast<FrameIndex>(std::floor(t * 30.0)));
        auto center_of = [&](const PlayerId& id) {
            for (const auto& s : g.tracking) {
                if (s.frame == f && s.entity == id) {
                    const auto b = player_box(s.position);
                    return PixelPoint{b.center_x(), b.center_y()};
                }
            }
            throw StateError("fixture player missing");
        };
        gaze::GazeSample s{t, {}, true};
        if (t < 0.8) {
            s.point = center_of("A04");
        } else if (t < 1.5) {
            s.point = {640.0, 40.0};
        } else if (t < 1.6) {
            s.valid = false;
        } else if (t < 3.0) {
            s.point = center_of("H03");
        } else {
            s.point = {60.0, 60.0};
        }
        s.point.x = std::round(s.point.x * 100.0) / 100.0;
        s.point.y = std::round(s.point.y * 100.0) / 100.0;
        g.gaze.push_back(s);
    }
    return g;
}

namespace {

template <typename F>
void write_to(const fs::path& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    body(out);
}

}  // namespace

void write_fixture(const FixtureGame& g, const fs::path& dir) {
    fs::create_directories(dir);
    write_to(dir / "detections.csv", [&](std::ostream& o) { ingest::write_detections(o, g.detections); });
    write_to(dir / "tracking.csv", [&](std::ostream& o) { ingest::write_tracking(o, g.tracking); });
    write_to(dir / "masks.rle", [&](std::ostream& o) { ingest::write_masks(o, g.masks); });
    write_to(dir / "keypoints.csv", [&](std::ostream& o) { ingest::write_keypoints(o, g.keypoints); });
    write_to(dir / "shots.csv", [&](std::ostream& o) { ingest::write_shots(o, g.shots); });
    write_to(dir / "defense.csv", [&](std::ostream& o) { ingest::write_defense(o, g.defense); });
    write_to(dir / "roster.csv", [&](std::ostream& o) { ingest::write_roster(o, Roster(g.roster)); });
    write_to(dir / "gaze.csv", [&](std::ostream& o) { gaze::write_gaze_trace(o, g.gaze); });
    nlohmann::json meta;
    meta["game_id"] = g.game_id;
    meta["frame_count"] = g.frames;
    meta["frame_rate"] = g.frame_rate;
    for (const auto& [team, left] : g.attacks_left) meta["attacks_left"][team] = left;
    write_to(dir / "game.json", [&](std::ostream& o) { o << meta.dump(2) << '\n'; });
}

}  // namespace courtside::synth

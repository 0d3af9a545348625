#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <sstream>

#include "courtside/errors.hpp"
#include "courtside/ingest.hpp"
#include "courtside/overlay.hpp"

using namespace courtside;
using namespace courtside::overlay;
using game_state::Importance;

namespace {

struct Scene {
    Roster roster{{{"H1", "Hal One", "HOME", StarRole::Shooter},
                   {"H2", "Hal Two", "HOME", StarRole::None},
                   {"A1", "Al One", "AWAY", StarRole::Defender},
                   {"A2", "Al Two", "AWAY", StarRole::None}}};
    ability::RegionPartition partition = ability::RegionPartition::standard();
    std::map<PlayerId, ability::EpvMap> epv;
    std::vector<DefenseRecord> defense_records = {{"A1", "above_break3_center", -3.6}};
    ability::DefenseTable defense{defense_records};
    std::vector<track::TrackedBox> boxes = {{0, "A1", {380, 200, 60, 180}, track::BoxSource::Detected, 1},
                                            {0, "A2", {700, 200, 60, 180}, track::BoxSource::Detected, 1},
                                            {0, "H1", {300, 200, 60, 180}, track::BoxSource::Detected, 1},
                                            {0, "H2", {900, 200, 60, 180}, track::BoxSource::Detected, 1}};
    game_state::GameStateFrame state;
    game_state::FrameSamples samples;

    Scene() {
        // 4 of 10 threes from straight on: EPV 1.2 there.
        std::vector<ShotRecord> shots;
        for (int i = 0; i < 10; ++i) shots.push_back({"H1", {31.0 + 0.1 * i, 25}, i < 4, 3});
        epv = ability::build_epv_maps(shots, partition, std::vector<PlayerId>{"H2"});
        samples.ball = CourtPoint{31.5, 25};
        samples.players = {{"H1", {31, 25}}, {"A1", {27, 25}}, {"H2", {20, 45}}, {"A2", {40, 10}}};
        state.frame = 0;
        state.offense = "HOME";
        state.ball_handler = "H1";
        state.key_defenders = {"A1"};
        state.links = {{"A1", "H1"}};
        state.importance = {{"H1", Importance::Lv3}, {"A1", Importance::Lv2}, {"H2", Importance::Lv1},
                            {"A2", Importance::Lv1}};
    }

    GameContext context() const { return {&roster, &partition, &epv, &defense, {{"HOME", true}}}; }
    FrameInput input() const {
        FrameInput in;
        in.boxes = boxes;
        in.state = &state;
        in.samples = &samples;
        return in;
    }
};

const RenderCommand* find(const ComposedFrame& f, Primitive p, const PlayerId& player) {
    for (const auto& c : f.commands) {
        if (c.primitive == p && c.player == player) return &c;
    }
    return nullptr;
}

}  // namespace

TEST_CASE("feet anchor") {
    const OverlayConfig cfg;
    const BoundingBox box{80, 200, 40, 200};
    PoseKeypoints kp{0, "P", {{"left_foot", {100, 400}, 0.9}, {"right_foot", {120, 400}, 0.8}}};
    CHECK(feet_anchor(box, &kp, cfg) == PixelPoint{110, 400});
    kp.joints[1].confidence = 0.1;
    CHECK(feet_anchor(box, &kp, cfg) == PixelPoint{100, 400});  // box bottom-center
    const BoundingBox other{0, 0, 50, 100};
    CHECK(feet_anchor(other, &kp, cfg) == PixelPoint{25, 100});
    CHECK(feet_anchor(other, nullptr, cfg) == PixelPoint{25, 100});
}

TEST_CASE("ring and shield specs") {
    const OverlayConfig cfg;
    const auto ring = ring_spec(1.2, 180, cfg);
    CHECK(ring.color_pos == doctest::Approx(0.4));
    CHECK(ring.radius == doctest::Approx(18 + 0.4 * 30));
    CHECK(ring_spec(5.0, 180, cfg).color_pos == 1.0);
    CHECK(ring_spec(1.0, 90, cfg).inner == 9.0);

    const auto shield = shield_spec(-3.6, 4.0, 180, cfg);
    CHECK(shield.arc_fraction == doctest::Approx(8.0 / 12.0));
    CHECK(shield.thickness == doctest::Approx(7.2));
    CHECK(shield_spec(2.0, 13.0, 180, cfg).arc_fraction == 0.0);
    CHECK(shield_spec(2.0, 13.0, 180, cfg).thickness == 0.0);
    CHECK(shield_spec(0, 0, 180, cfg).arc_fraction == 1.0);
}

TEST_CASE("ring and shield are monotone") {
    const OverlayConfig cfg;
    for (double e = 0.0; e < 3.0; e += 0.05) {
        CHECK(ring_spec(e + 0.05, 150, cfg).radius > ring_spec(e, 150, cfg).radius);
        CHECK(ring_spec(e + 0.05, 150, cfg).color_pos > ring_spec(e, 150, cfg).color_pos);
    }
    for (double d = 0.0; d < 12.0; d += 0.5) {
        CHECK(shield_spec(-1, d + 0.5, 150, cfg).arc_fraction < shield_spec(-1, d, 150, cfg).arc_fraction);
        CHECK(shield_spec(-d - 0.5, 3, 150, cfg).thickness > shield_spec(-d, 3, 150, cfg).thickness);
    }
}

TEST_CASE("handler and key defender") {
    const Scene s;
    const OverlayConfig cfg;
    const auto f = compose_frame(s.input(), s.context(), cfg);
    CHECK(f.warnings.empty());

    const auto* spot = find(f, Primitive::Spotlight, "H1");
    REQUIRE(spot);
    CHECK(spot->color == ColorRole::White);
    const auto* ring = find(f, Primitive::OffenseRing, "H1");
    REQUIRE(ring);
    CHECK(ring->color_pos == doctest::Approx(0.4));
    CHECK(ring->a == doctest::Approx(18 + 0.4 * 30));
    const auto* label = find(f, Primitive::NameLabel, "H1");
    REQUIRE(label);
    CHECK(label->color == ColorRole::Gold);
    CHECK(label->icon == Icon::Shooter);
    CHECK(label->text == "Hal One");

    const auto* shield = find(f, Primitive::DefenseShield, "A1");
    REQUIRE(shield);
    CHECK(shield->c == doctest::Approx(8.0 / 12.0));
    CHECK(shield->b == doctest::Approx(7.2));
    CHECK(shield->d == doctest::Approx(std::numbers::pi));  // handler is to the left
    CHECK(find(f, Primitive::Highlight, "A1")->color == ColorRole::Bright);
    CHECK(find(f, Primitive::NameLabel, "A1") == nullptr);
    const auto* link = find(f, Primitive::Link, "A1");
    REQUIRE(link);
    CHECK(link->a == 330.0);
    CHECK(link->b == 380.0);
    CHECK(find(f, Primitive::Spotlight, "H2") == nullptr);
    CHECK(find(f, Primitive::AudienceDarken, "") == nullptr);
    CHECK(find(f, Primitive::ForegroundRestore, "") == nullptr);
}

TEST_CASE("commands are ordered by layer, player, primitive") {
    const Scene s;
    const auto f = compose_frame(s.input(), s.context(), {});
    CHECK(std::is_sorted(f.commands.begin(), f.commands.end(), [](const auto& l, const auto& r) {
        return std::tie(l.layer, l.player, l.primitive) < std::tie(r.layer, r.player, r.primitive);
    }));
    for (const auto& c : f.commands) {
        CHECK(c.opacity >= 0.0);
        CHECK(c.opacity <= 1.0);
    }
    CHECK(compose_frame(s.input(), s.context(), {}).commands == f.commands);
}

TEST_CASE("empty state gives only the backdrop") {
    const Scene s;
    game_state::GameStateFrame empty;
    FrameInput in = s.input();
    in.state = &empty;
    const auto f = compose_frame(in, s.context(), {});
    REQUIRE(f.commands.size() == 1);
    CHECK(f.commands[0].primitive == Primitive::BackdropDarken);
    CHECK(f.commands[0].a == 0.35);
}

TEST_CASE("open players get green spotlights; gaze filters only those") {
    Scene s;
    s.state.open_players = {"H2"};
    s.state.importance["H2"] = Importance::Lv3;
    const OverlayConfig cfg;
    const auto anchors = green_spotlight_anchors(s.input(), cfg);
    REQUIRE(anchors.size() == 1);
    CHECK(anchors.at("H2") == PixelPoint{930, 380});

    gaze::GazeEngine::Frame g;
    g.output.importance = s.state.importance;
    g.output.darken = gaze::DarkenRegion{{0, 0}, 650};
    FrameInput in = s.input();
    in.gaze = &g;
    auto f = compose_frame(in, s.context(), cfg);
    CHECK(find(f, Primitive::Spotlight, "H2") == nullptr);
    CHECK(find(f, Primitive::Spotlight, "H1") != nullptr);
    const auto* dk = find(f, Primitive::AudienceDarken, "");
    REQUIRE(dk);
    CHECK(dk->a == 650.0);
    CHECK(dk->b == 0.6);

    g.spotlights["H2"] = {0.25, 0.5};
    f = compose_frame(in, s.context(), cfg);
    const auto* green = find(f, Primitive::Spotlight, "H2");
    REQUIRE(green);
    CHECK(green->color == ColorRole::Green);
    CHECK(green->opacity == 0.25);
    CHECK(green->ease_phase == 0.5);
}

TEST_CASE("gaze lift and glow") {
    Scene s;
    gaze::GazeEngine::Frame g;
    g.output.importance = s.state.importance;
    g.output.importance["A2"] = Importance::Lv2_5;
    g.output.glow = {{"A2", 1.0}, {"H2", 0.4}};
    FrameInput in = s.input();
    in.gaze = &g;
    const auto f = compose_frame(in, s.context(), {});
    const auto* glow = find(f, Primitive::Highlight, "A2");
    REQUIRE(glow);
    CHECK(glow->color == ColorRole::Glow);
    CHECK(glow->opacity == 1.0);
    CHECK(find(f, Primitive::NameLabel, "A2")->color == ColorRole::White);
    CHECK(find(f, Primitive::DefenseShield, "A2") != nullptr);
    CHECK(find(f, Primitive::Highlight, "H2")->opacity == 0.4);
    CHECK(find(f, Primitive::NameLabel, "H2") == nullptr);
}

TEST_CASE("players without boxes are reported and skipped") {
    Scene s;
    s.boxes.erase(s.boxes.begin());  // A1
    const auto f = compose_frame(s.input(), s.context(), {});
    REQUIRE(f.warnings.size() == 1);
    CHECK(f.warnings[0] == "frame 0: player A1 has no tracked box; skipped");
    CHECK(find(f, Primitive::Link, "A1") == nullptr);
}

TEST_CASE("mask adds the foreground restore") {
    const Scene s;
    const auto mask = ingest::encode_mask(0, 4, 2, {0, 1, 0, 0, 1, 1, 0, 0});
    FrameInput in = s.input();
    in.mask = &mask;
    const auto f = compose_frame(in, s.context(), {});
    const auto* fr = find(f, Primitive::ForegroundRestore, "");
    REQUIRE(fr);
    CHECK(fr->layer == Layer::ForegroundRestore);
    CHECK(fr->a == 4.0);
    CHECK(fr->b == 2.0);
}

TEST_CASE("wire round-trip and malformed input") {
    const Scene s;
    const auto f = compose_frame(s.input(), s.context(), {});
    const auto bytes = encode_frame(7, f.commands);
    const auto back = decode_frame(bytes);
    CHECK(back.frame == 7);
    CHECK(back.commands == f.commands);

    std::vector<std::uint8_t> stream = bytes;
    append_frame(stream, 8, {});
    const auto frames = decode_frames(stream);
    REQUIRE(frames.size() == 2);
    CHECK(frames[1].frame == 8);
    CHECK(frames[1].commands.empty());

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(decode_frame(truncated), ParseError);
    auto bad_layer = encode_frame(1, std::vector<RenderCommand>{RenderCommand{}});
    bad_layer[13] = 9;
    CHECK_THROWS_AS(decode_frame(bad_layer), ParseError);
    CHECK_THROWS_AS(encode_frame(-1, {}), RangeError);
}

TEST_CASE("empty frame message layout") {
    const auto bytes = encode_frame(0x01020304, {});
    const std::vector<std::uint8_t> expected = {9, 0, 0, 0, 0x01, 0x04, 0x03, 0x02, 0x01, 0, 0, 0, 0};
    CHECK(bytes == expected);
}

TEST_CASE("text dump") {
    RenderCommand c;
    c.layer = Layer::Label;
    c.primitive = Primitive::NameLabel;
    c.color = ColorRole::Gold;
    c.icon = Icon::Shooter;
    c.player = "H1";
    c.x = 1.5;
    c.text = "Hal One";
    std::ostringstream out;
    write_text(out, 3, std::vector<RenderCommand>{c});
    CHECK(out.str() == "3 label name-label H1 gold shooter 1.5 0 0 0 0 0 0 1 1 \"Hal One\"\n");
}

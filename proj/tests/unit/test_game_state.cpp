#include <doctest.h>

#include <sstream>

#include "courtside/errors.hpp"
#include "courtside/game_state.hpp"

using namespace courtside;
using namespace courtside::game_state;

namespace {

const Roster& roster() {
    static const Roster r({{"H1", "h1", "HOME", StarRole::None},
                           {"H2", "h2", "HOME", StarRole::None},
                           {"H3", "h3", "HOME", StarRole::None},
                           {"A1", "a1", "AWAY", StarRole::None},
                           {"A2", "a2", "AWAY", StarRole::None}});
    return r;
}

/// H1 holds the ball at (30,25) until `pass_frame`, after which H2 at (20,40) does.
std::vector<CourtSample> pass_scene(FrameIndex frames, FrameIndex pass_frame) {
    std::vector<CourtSample> s;
    for (FrameIndex f = 0; f < frames; ++f) {
        s.push_back({f, "H1", {30, 25}, {}});
        s.push_back({f, "H2", {20, 40}, {}});
        s.push_back({f, "H3", {10, 5}, {}});
        s.push_back({f, "A1", {26, 25}, {}});   // 4 ft from H1
        s.push_back({f, "A2", {20, 37}, {}});   // 3 ft from H2
        s.push_back({f, kBallEntity, f < pass_frame ? CourtPoint{30.5, 25} : CourtPoint{20.5, 40}, 4.0});
    }
    return s;
}

}  // namespace

TEST_CASE("window and horizon frames") {
    GameStateConfig cfg;
    CHECK(cfg.window_frames() == 15);
    CHECK(cfg.lookahead_frames() == 54);
    cfg.possession_window = 0.001;
    CHECK(cfg.window_frames() == 1);
    cfg.frame_rate = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("ball handler: nearest within reach, ties by id") {
    GameStateConfig cfg;
    FrameSamples fs;
    fs.ball = CourtPoint{10, 10};
    fs.players = {{"B", {12, 10}}, {"A", {8, 10}}, {"C", {10, 14}}};
    CHECK(detect_ball_handler(fs, cfg) == PlayerId("A"));
    fs.players = {{"C", {10, 14}}};
    CHECK_FALSE(detect_ball_handler(fs, cfg).has_value());
    fs.ball.reset();
    CHECK_THROWS_AS(detect_ball_handler(fs, cfg), StateError);
}

TEST_CASE("full frame derivation") {
    GameStateConfig cfg;
    const auto samples = pass_scene(120, 30);
    const TrackingStore store(samples);
    const auto st = compute_frame(store, 0, roster(), cfg);
    CHECK(st.offense == TeamId("HOME"));
    CHECK(st.ball_handler == PlayerId("H1"));
    CHECK(st.next_receiver == PlayerId("H2"));
    CHECK(st.open_players == std::set<PlayerId>{"H3"});
    CHECK(st.key_defenders == std::set<PlayerId>{"A1"});
    CHECK(st.links == std::set<Link>{{"A1", "H1"}});
    CHECK(st.importance.at("H1") == Importance::Lv3);
    CHECK(st.importance.at("H2") == Importance::Lv3);
    CHECK(st.importance.at("H3") == Importance::Lv3);
    CHECK(st.importance.at("A1") == Importance::Lv2);
    CHECK(st.importance.at("A2") == Importance::Lv1);

    const auto after = compute_frame(store, 40, roster(), cfg);
    CHECK(after.ball_handler == PlayerId("H2"));
    CHECK_FALSE(after.next_receiver.has_value());
    CHECK(after.key_defenders == std::set<PlayerId>{"A2"});
}

TEST_CASE("look-ahead horizon is inclusive at 54 frames") {
    GameStateConfig cfg;
    const TrackingStore at(pass_scene(120, 54));
    CHECK(compute_frame(at, 0, roster(), cfg).next_receiver == PlayerId("H2"));
    const TrackingStore beyond(pass_scene(120, 55));
    CHECK_FALSE(compute_frame(beyond, 0, roster(), cfg).next_receiver.has_value());
}

TEST_CASE("loose ball keeps the offense for the possession window") {
    GameStateConfig cfg;
    auto samples = pass_scene(60, 100);
    for (auto& s : samples) {
        if (s.is_ball() && s.frame >= 10) s.position = {45, 10};  // nobody within reach
    }
    const TrackingStore store(samples);
    CHECK(compute_frame(store, 20, roster(), cfg).offense == TeamId("HOME"));
    CHECK_FALSE(compute_frame(store, 24, roster(), cfg).offense.has_value());
    CHECK_FALSE(compute_frame(store, 20, roster(), cfg).ball_handler.has_value());
}

TEST_CASE("receivers must be teammates") {
    GameStateConfig cfg;
    auto samples = pass_scene(60, 100);
    for (auto& s : samples) {
        if (s.is_ball() && s.frame >= 20) s.position = {20, 37.5};  // A2 steals
    }
    const TrackingStore store(samples);
    CHECK_FALSE(compute_frame(store, 0, roster(), cfg).next_receiver.has_value());
}

TEST_CASE("frames without a ball are dead balls") {
    GameStateConfig cfg;
    const std::vector<CourtSample> s = {{0, "H1", {30, 25}, {}}, {0, "A1", {26, 25}, {}}};
    const TrackingStore store(s);
    const auto st = compute_frame(store, 0, roster(), cfg);
    CHECK_FALSE(st.offense.has_value());
    CHECK(st.importance.at("H1") == Importance::Lv1);
    const auto empty = compute_frame(store, 5, roster(), cfg);
    CHECK(empty.importance.empty());
}

TEST_CASE("levels and ranking") {
    CHECK(numeric_level(Importance::Lv2_5) == 2.5);
    CHECK(to_string(Importance::Lv2_5) == "2.5");
    RankingInput in;
    in.players = {"A", "B", "C"};
    in.ball_handler = "A";
    in.key_defenders = {"B", "A"};
    const auto levels = rank_importance(in);
    CHECK(levels.at("A") == Importance::Lv3);
    CHECK(levels.at("B") == Importance::Lv2);
    CHECK(levels.at("C") == Importance::Lv1);
    CHECK(one_on_one_links({"B"}, std::nullopt).empty());
}

TEST_CASE("gamestate.csv round-trip") {
    GameStateConfig cfg;
    const TrackingStore store(pass_scene(40, 30));
    const auto states = compute_all(store, roster(), cfg, 40);
    std::ostringstream out;
    write_game_states(out, states);
    std::istringstream in(out.str());
    CHECK(parse_game_states(in, "gamestate.csv", store) == states);
}

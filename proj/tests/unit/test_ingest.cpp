#include <doctest.h>

#include <sstream>

#include "courtside/errors.hpp"
#include "courtside/ingest.hpp"
#include "courtside/text.hpp"

using namespace courtside;
using namespace courtside::ingest;

namespace {

template <typename F>
auto parse(const std::string& text, F f) {
    std::istringstream in(text);
    return f(in, "input.csv");
}

}  // namespace

TEST_CASE("detections parse, sort and round-trip") {
    const auto d = parse("# comment\n2,P2,1,2,3,4,0.5\n1,P1,10.5,20,30,40,0.9\n\n", [](auto& in, auto s) {
        return parse_detections(in, s);
    });
    REQUIRE(d.size() == 2);
    CHECK(d[0].frame == 1);
    CHECK(d[0].box == BoundingBox{10.5, 20, 30, 40});
    std::ostringstream out;
    write_detections(out, d);
    CHECK(out.str() == "1,P1,10.5,20,30,40,0.9\n2,P2,1,2,3,4,0.5\n");
}

TEST_CASE("detection errors carry file and line") {
    try {
        parse("1,P1,1,2,3,4,0.9\n1,P1,1,2,x,4,0.9\n", [](auto& in, auto s) { return parse_detections(in, s); });
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.file() == "input.csv");
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse("1,P1,1,2,0,4,0.9\n", [](auto& in, auto s) { return parse_detections(in, s); }),
                    ValidationError);
    CHECK_THROWS_AS(parse("1,P1,1,2,3,4,1.5\n", [](auto& in, auto s) { return parse_detections(in, s); }),
                    ValidationError);
    CHECK_THROWS_AS(parse("1,P1,1,2,3,4\n", [](auto& in, auto s) { return parse_detections(in, s); }), ParseError);
    const Roster roster({{"P1", "One", "A", StarRole::None}});
    std::istringstream in("1,P9,1,2,3,4,0.5\n");
    CHECK_THROWS_AS(parse_detections(in, "d", &roster), ValidationError);
}

TEST_CASE("tracking samples respect the court bounds and carry ball height") {
    const auto t = parse("0,BALL,10,20,4.5\n0,P1,-3,25\n", [](auto& in, auto s) { return parse_tracking(in, s); });
    REQUIRE(t.size() == 2);
    CHECK(t[0].is_ball());
    CHECK(t[0].height == 4.5);
    CHECK_FALSE(t[1].height.has_value());
    CHECK_THROWS_AS(parse("0,P1,-7,25\n", [](auto& in, auto s) { return parse_tracking(in, s); }), ValidationError);
    CHECK_THROWS_AS(parse("0,P1,1,25,3\n", [](auto& in, auto s) { return parse_tracking(in, s); }), ValidationError);
    CHECK_THROWS_AS(parse("0,P1,1,2\n0,P1,1,3\n", [](auto& in, auto s) { return parse_tracking(in, s); }),
                    ValidationError);
    std::istringstream in("0,P1,-7,25\n");
    CHECK_NOTHROW(parse_tracking(in, "t", CourtBounds{8.0}));
}

TEST_CASE("masks encode, decode and validate run totals") {
    const std::vector<std::uint8_t> px = {1, 1, 0, 0, 0, 1, 0, 1, 1, 1, 1, 0};
    const auto m = encode_mask(3, 4, 3, px);
    CHECK(m.runs == std::vector<std::uint32_t>{0, 2, 3, 1, 1, 4, 1});
    CHECK(m.decode() == px);
    CHECK(m.foreground_count() == 7);

    std::ostringstream out;
    write_masks(out, {m});
    const auto back = parse(out.str(), [](auto& in, auto s) { return parse_masks(in, s); });
    REQUIRE(back.size() == 1);
    CHECK(back[0] == m);
    CHECK_THROWS_AS(parse("0 2 2\n1 2\n", [](auto& in, auto s) { return parse_masks(in, s); }), ValidationError);
    CHECK_THROWS_AS(parse("0 2 2\n", [](auto& in, auto s) { return parse_masks(in, s); }), ParseError);
}

TEST_CASE("shots, defense, roster and keypoints") {
    const auto shots = parse("P2,1,2,1,3\nP1,10,20,0,2\n", [](auto& in, auto s) { return parse_shots(in, s); });
    CHECK(shots.front().player == "P1");
    CHECK_THROWS_AS(parse("P1,1,2,1,4\n", [](auto& in, auto s) { return parse_shots(in, s); }), ValidationError);
    CHECK_THROWS_AS(parse("P1,95,2,1,2\n", [](auto& in, auto s) { return parse_shots(in, s); }), ValidationError);

    const auto def = parse("D1,paint,-3.5\n", [](auto& in, auto s) { return parse_defense(in, s); });
    CHECK(def[0].diff_percent == -3.5);
    CHECK_THROWS_AS(parse("D1,paint,1\nD1,paint,2\n", [](auto& in, auto s) { return parse_defense(in, s); }),
                    ValidationError);

    const auto roster = parse("P1,Ann Lee,HOME,shooter\nP2,Bo,AWAY,none\n",
                              [](auto& in, auto s) { return parse_roster(in, s); });
    CHECK(roster.find("P1")->role == StarRole::Shooter);
    CHECK(roster.team_of("P2") == "AWAY");
    CHECK_THROWS_AS(roster.team_of("P9"), NotFoundError);
    CHECK_THROWS_AS(parse("P1,A,H,none\nP1,B,H,none\n", [](auto& in, auto s) { return parse_roster(in, s); }),
                    ValidationError);
    CHECK_THROWS_AS(parse("P1,A,H,captain\n", [](auto& in, auto s) { return parse_roster(in, s); }), ValidationError);

    const auto kp = parse("0,P1,right_foot,5,6,0.9\n0,P1,left_foot,1,2,0.8\n",
                          [](auto& in, auto s) { return parse_keypoints(in, s); });
    REQUIRE(kp.size() == 1);
    CHECK(kp[0].joints[0].joint == "left_foot");
    CHECK(kp[0].joint("right_foot")->point == PixelPoint{5, 6});
    CHECK(kp[0].joint("head") == nullptr);
}

TEST_CASE("missing files are validation errors naming the path") {
    try {
        load_shots("/nonexistent/shots.csv");
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("/nonexistent/shots.csv") != std::string::npos);
    }
}

TEST_CASE("number formatting round-trips") {
    for (const double v : {0.1, 10.5, 20.0, 1.0 / 3.0, -2.5e-7, 123456789.125}) {
        double back = 0.0;
        REQUIRE(text::parse_double(text::format_double(v), back));
        CHECK(back == v);
    }
    CHECK(text::format_double(20.0) == "20");
    double x = 0;
    CHECK_FALSE(text::parse_double("nan", x));
    CHECK_FALSE(text::parse_double("1.5x", x));
}

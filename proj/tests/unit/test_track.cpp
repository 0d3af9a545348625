#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "courtside/errors.hpp"
#include "courtside/track.hpp"
#include "support/oracles.hpp"
#include "synth/synth.hpp"

using namespace courtside;
using namespace courtside::track;

TEST_CASE("iou basics") {
    const BoundingBox a{0, 0, 10, 10};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, {10, 0, 10, 10}) == 0.0);
    CHECK(iou(a, {5, 0, 10, 10}) == doctest::Approx(50.0 / 150.0));
    CHECK(iou({0, 0, 0, 0}, {0, 0, 0, 0}) == 0.0);
    synth::Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const BoundingBox p{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 30), rng.uniform(1, 30)};
        const BoundingBox q{rng.uniform(0, 50), rng.uniform(0, 50), rng.uniform(1, 30), rng.uniform(1, 30)};
        CHECK(iou(p, q) == iou(q, p));
        CHECK(iou(p, q) >= 0.0);
        CHECK(iou(p, q) <= 1.0);
    }
}

TEST_CASE("confidence clusters split at the thresholds") {
    MatcherConfig cfg;
    const std::vector<Detection> d = {{0, {}, "A", 0.61}, {0, {}, "B", 0.6}, {0, {}, "C", 0.11}, {0, {}, "D", 0.1}};
    const auto c = cluster_detections(d, cfg);
    REQUIRE(c.high.size() == 1);
    CHECK(c.high[0].identity == "A");
    REQUIRE(c.low.size() == 2);
    REQUIRE(c.rejected.size() == 1);
    CHECK(c.rejected[0].identity == "D");
}

TEST_CASE("matcher config validation") {
    MatcherConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.t_low = 0.7;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.iou_match_min = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.smooth_window = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("Kalman filter matches the plain-array oracle") {
    synth::Rng rng(11);
    BoundingBox truth{100, 200, 50, 120};
    KalmanBoxFilter filter(truth);
    testing::KalmanOracle oracle(truth);
    for (int step = 0; step < 40; ++step) {
        truth.x += 2.5;
        truth.y -= 1.0;
        const auto p = filter.predict();
        const auto q = oracle.predict();
        CHECK(p.x == doctest::Approx(q.x).epsilon(1e-12));
        CHECK(p.h == doctest::Approx(q.h).epsilon(1e-12));
        if (step % 7 != 3) {
            const BoundingBox z{truth.x + rng.uniform(-2, 2), truth.y + rng.uniform(-2, 2), truth.w, truth.h};
            filter.update(z);
            oracle.update(z);
        }
        for (int i = 0; i < 8; ++i) {
            CHECK(std::abs(filter.state()(i) - oracle.mean()[i]) <= 1e-9 * std::max(1.0, std::abs(oracle.mean()[i])));
            for (int j = 0; j < 8; ++j) {
                const double o = oracle.covariance()[i][j];
                CHECK(std::abs(filter.covariance()(i, j) - o) <= 1e-9 * std::max(1.0, std::abs(o)));
            }
        }
    }
    // Measurements carry +-2 px of noise, so the velocity is only roughly recovered.
    CHECK(std::abs(filter.state()(4) - 2.5) < 0.5);
    CHECK(std::abs(filter.state()(5) + 1.0) < 0.5);
}

TEST_CASE("Kalman filter on a noiseless constant-velocity box converges") {
    KalmanBoxFilter filter({0, 0, 40, 100});
    for (int f = 1; f <= 60; ++f) {
        filter.predict();
        filter.update({3.0 * f, 1.0 * f, 40, 100});
    }
    const auto next = filter.predict();
    CHECK(next.x == doctest::Approx(183.0).epsilon(1e-3));
    CHECK(next.y == doctest::Approx(61.0).epsilon(1e-3));
}

TEST_CASE("association: low boxes only extend existing tracks") {
    MatcherConfig cfg;
    Associator assoc(cfg);
    const BoundingBox b{100, 100, 40, 100};
    auto r0 = assoc.step(0, std::vector<Detection>{{0, b, "A", 0.9}, {0, {400, 100, 40, 100}, "B", 0.3}});
    CHECK(r0.spawned == 1);
    REQUIRE(r0.matched.size() == 1);
    CHECK(r0.matched[0].identity == "A");

    auto r1 = assoc.step(1, std::vector<Detection>{{1, {101, 100, 40, 100}, "A", 0.35}});
    REQUIRE(r1.matched.size() == 1);
    CHECK(r1.matched[0].confidence == 0.35);
    CHECK(r1.spawned == 0);
    CHECK(assoc.trackers().size() == 1);
}

TEST_CASE("association is identity-aware and keeps one box per identity") {
    MatcherConfig cfg;
    Associator assoc(cfg);
    assoc.step(0, std::vector<Detection>{{0, {100, 100, 40, 100}, "A", 0.9}});
    // Same place, other identity: never matched to A's tracker.
    auto r = assoc.step(1, std::vector<Detection>{{1, {100, 100, 40, 100}, "B", 0.9},
                                                  {1, {100, 100, 40, 100}, "A", 0.8},
                                                  {1, {300, 100, 40, 100}, "A", 0.7}});
    std::set<PlayerId> ids;
    for (const auto& m : r.matched) CHECK(ids.insert(m.identity).second);
    CHECK(ids == std::set<PlayerId>{"A", "B"});
    for (const auto& m : r.matched) {
        if (m.identity == "A") CHECK(m.confidence == 0.8);
    }
}

TEST_CASE("trackers retire after max_gap missed frames") {
    MatcherConfig cfg;
    cfg.max_gap = 2;
    Associator assoc(cfg);
    assoc.step(0, std::vector<Detection>{{0, {100, 100, 40, 100}, "A", 0.9}});
    assoc.step(1, {});
    assoc.step(2, {});
    CHECK(assoc.trackers().size() == 1);
    assoc.step(3, {});
    CHECK(assoc.trackers().empty());
}

TEST_CASE("greedy and Hungarian agree on well-separated scenes") {
    synth::Rng rng(5);
    for (int s = 0; s < 5; ++s) {
        const auto scene = synth::make_scene({}, rng);
        MatcherConfig greedy, hungarian;
        hungarian.assignment = Assignment::Hungarian;
        CHECK(postprocess(scene.detections, greedy) == postprocess(scene.detections, hungarian));
    }
}

TEST_CASE("interpolation fills short gaps only") {
    std::vector<TrackedBox> boxes = {{0, "A", {0, 0, 10, 10}, BoxSource::Detected, 0.9},
                                     {3, "A", {30, 0, 10, 10}, BoxSource::Detected, 0.8},
                                     {10, "A", {100, 0, 10, 10}, BoxSource::Detected, 0.9}};
    const auto out = interpolate_gaps(boxes, 2);
    REQUIRE(out.size() == 5);
    CHECK(out[1].frame == 1);
    CHECK(out[1].source == BoxSource::Interpolated);
    CHECK(out[1].box.x == doctest::Approx(10.0));
    CHECK(out[2].confidence == 0.8);
    CHECK(out[4].frame == 10);
}

TEST_CASE("smoothing keeps affine motion and shrinks at run ends") {
    std::vector<TrackedBox> boxes;
    for (int f = 0; f < 12; ++f) {
        boxes.push_back({f, "A", {1.5 * f, 2.0 - 0.25 * f, 40 + 0.1 * f, 90}, BoxSource::Detected, 0.9});
    }
    const auto out = smooth(boxes, 5);
    REQUIRE(out.size() == boxes.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(std::abs(out[i].box.x - boxes[i].box.x) <= 1e-12);
        CHECK(std::abs(out[i].box.y - boxes[i].box.y) <= 1e-12);
    }
    std::vector<TrackedBox> jitter = {{0, "A", {0, 0, 1, 1}, BoxSource::Detected, 1},
                                      {1, "A", {10, 0, 1, 1}, BoxSource::Detected, 1},
                                      {2, "A", {0, 0, 1, 1}, BoxSource::Detected, 1}};
    const auto s = smooth(jitter, 3);
    CHECK(s[0].box.x == 0.0);
    CHECK(s[1].box.x == doctest::Approx(10.0 / 3.0));
}

TEST_CASE("postprocess output is sorted and unique per frame and identity") {
    synth::Rng rng(21);
    const auto scene = synth::make_scene({}, rng);
    const auto out = postprocess(scene.detections, {});
    std::set<std::pair<FrameIndex, PlayerId>> seen;
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(seen.emplace(out[i].frame, out[i].identity).second);
        if (i > 0) CHECK(std::tie(out[i - 1].frame, out[i - 1].identity) < std::tie(out[i].frame, out[i].identity));
    }
    CHECK(postprocess(scene.detections, {}) == out);
}

TEST_CASE("tracks.csv round-trip") {
    const std::vector<TrackedBox> boxes = {{0, "A", {1.25, 2, 3, 4}, BoxSource::Detected, 0.9},
                                           {1, "A", {1.5, 2, 3, 4}, BoxSource::Interpolated, 0.8}};
    std::ostringstream out;
    write_tracks(out, boxes);
    std::istringstream in(out.str());
    CHECK(parse_tracks(in, "tracks.csv") == boxes);
    std::istringstream bad("0,A,1,2,3,4,guessed,1\n");
    CHECK_THROWS_AS(parse_tracks(bad, "tracks.csv"), ParseError);
}

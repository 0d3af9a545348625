#include <doctest.h>

#include "courtside/evaluate.hpp"
#include "support/oracles.hpp"
#include "synth/synth.hpp"

using namespace courtside;
using namespace courtside::evaluate;

TEST_CASE("thresholds are exact twentieths") {
    const auto t = iou_thresholds();
    CHECK(t[0] == 0.5);
    CHECK(t[5] == 0.75);
    CHECK(t[8] == 0.9);
    CHECK(t[9] == 0.95);
}

TEST_CASE("average precision of ranked lists") {
    CHECK(average_precision({true, true}, 2) == 1.0);
    CHECK(average_precision({false, true}, 1) == 0.5);
    CHECK(average_precision({true, false, true}, 4) == doctest::Approx(0.25 + 0.25 * 2.0 / 3.0));
    CHECK(average_precision({}, 3) == 0.0);
    CHECK(average_precision({true}, 0) == 0.0);
}

TEST_CASE("perfect predictions score 1, unknown identities are reported") {
    const std::vector<ScoredBox> gt = {{0, "A", {0, 0, 10, 10}, 1}, {1, "A", {1, 0, 10, 10}, 1}};
    auto preds = gt;
    preds.push_back({0, "Z", {50, 50, 5, 5}, 0.9});
    const auto r = evaluate_ap(preds, gt);
    CHECK(r.ap_50_95 == 1.0);
    CHECK(r.ap_50 == 1.0);
    CHECK(r.unknown_identities == std::vector<PlayerId>{"Z"});
    CHECK(r.per_identity.at("A").ground_truth == 2);
}

TEST_CASE("each ground truth box is claimed once") {
    const std::vector<ScoredBox> gt = {{0, "A", {0, 0, 10, 10}, 1}};
    const std::vector<ScoredBox> preds = {{0, "A", {0, 0, 10, 10}, 0.9}, {0, "A", {0, 0, 10, 10}, 0.8}};
    const auto r = evaluate_ap(preds, gt);
    CHECK(r.ap_50 == 1.0);  // the duplicate ranks below the hit
    const std::vector<ScoredBox> flipped = {{0, "A", {20, 20, 10, 10}, 0.9}, {0, "A", {0, 0, 10, 10}, 0.8}};
    CHECK(evaluate_ap(flipped, gt).ap_50 == 0.5);
}

TEST_CASE("evaluator matches the brute-force oracle on random instances") {
    synth::Rng rng(99);
    for (int inst = 0; inst < 50; ++inst) {
        std::vector<ScoredBox> gt, preds;
        for (int f = 0; f < 6; ++f) {
            for (int k = 0; k < 3; ++k) {
                const std::string id = k == 0 ? "A" : "B";
                const BoundingBox b{rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(10, 40), rng.uniform(10, 40)};
                gt.push_back({f, id, b, 1.0});
                if (rng.chance(0.8)) {
                    const BoundingBox p{b.x + rng.uniform(-6, 6), b.y + rng.uniform(-6, 6), b.w * rng.uniform(0.8, 1.2),
                                        b.h};
                    preds.push_back({f, id, p, std::round(rng.uniform() * 10) / 10});
                }
            }
        }
        const auto r = evaluate_ap(preds, gt);
        const auto o = testing::brute_force_ap(preds, gt);
        CHECK(std::abs(r.ap_50_95 - o.ap_50_95) <= 1e-9);
        CHECK(std::abs(r.ap_50 - o.ap_50) <= 1e-9);
        CHECK(std::abs(r.ap_75 - o.ap_75) <= 1e-9);
    }
}

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "courtside/config.hpp"
#include "courtside/errors.hpp"

using namespace courtside;

TEST_CASE("config json round-trip") {
    EngineConfig cfg;
    cfg.gaze.linger = 2.5;
    cfg.matcher.assignment = track::Assignment::Hungarian;
    cfg.overlay.ring_outer = 60;
    cfg.court_margin = 3;
    const auto j = config_to_json(cfg);
    CHECK(j.at("gaze").at("linger") == 2.5);
    CHECK(j.at("matcher").at("assignment") == "hungarian");
    const auto back = config_from_json(j);
    CHECK(config_to_json(back) == j);
}

TEST_CASE("missing keys keep defaults") {
    const auto cfg = config_from_json(nlohmann::json::parse(R"({"gaze": {"dwell_trigger": 0.4}})"));
    CHECK(cfg.gaze.dwell_trigger == 0.4);
    CHECK(cfg.gaze.linger == 1.8);
    CHECK(cfg.matcher.t_high == 0.6);
}

TEST_CASE("unknown or ill-typed keys are rejected") {
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"gaze": {"dwel": 1}})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"video": {}})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"matcher": {"max_gap": 1.5}})")), ValidationError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"matcher": {"assignment": "auction"}})")),
                    ValidationError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse("[1]")), ValidationError);
    try {
        config_from_json(nlohmann::json::parse(R"({"overlay": {"radius": 1}})"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "overlay.radius");
    }
}

TEST_CASE("overrides") {
    EngineConfig cfg;
    apply_override(cfg, "gaze.linger=2.0");
    apply_override(cfg, "matcher.max_gap=6");
    apply_override(cfg, "matcher.assignment=hungarian");
    apply_override(cfg, "court.margin=0");
    CHECK(cfg.gaze.linger == 2.0);
    CHECK(cfg.matcher.max_gap == 6);
    CHECK(cfg.matcher.assignment == track::Assignment::Hungarian);
    CHECK(cfg.court_margin == 0.0);
    CHECK_THROWS_AS(apply_override(cfg, "gaze.linger"), ValidationError);
    CHECK_THROWS_AS(apply_override(cfg, "gaze.linger=soon"), ValidationError);
    CHECK_THROWS_AS(apply_override(cfg, "gaze.nothing=1"), ValidationError);
}

TEST_CASE("keys cover every json field") {
    const auto keys = config_keys();
    const auto j = config_to_json(EngineConfig{});
    std::size_t n = 0;
    for (const auto& [section, body] : j.items()) n += body.size();
    CHECK(keys.size() == n);
    CHECK(std::find(keys.begin(), keys.end(), "gaze.filter_radius") != keys.end());
}

TEST_CASE("load_config and validation") {
    const auto path = std::filesystem::temp_directory_path() / "courtside_config_test.json";
    {
        std::ofstream out(path);
        out << R"({"gaze": {"filter_radius": -1}})";
    }
    CHECK_THROWS_AS(load_config(path), ValidationError);
    {
        std::ofstream out(path);
        out << R"({"gaze": {"filter_radius": 500}})";
    }
    CHECK(load_config(path).gaze.filter_radius == 500);
    {
        std::ofstream out(path);
        out << "{";
    }
    CHECK_THROWS_AS(load_config(path), ParseError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path), ValidationError);
    EngineConfig{}.validate();
}

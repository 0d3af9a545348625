#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "courtside/game_state.hpp"
#include "courtside/gaze.hpp"
#include "courtside/overlay.hpp"
#include "courtside/track.hpp"

namespace courtside {

/// Every tunable, grouped by section. JSON keys are `section.field`, e.g.
/// {"gaze": {"linger": 1.8}}; missing keys keep their defaults.
struct EngineConfig {
    track::MatcherConfig matcher;
    game_state::GameStateConfig game_state;
    gaze::GazeConfig gaze;
    overlay::OverlayConfig overlay;
    double court_margin = 6.0;  // ft of out-of-bounds slack accepted in tracking data

    void validate() const;
};

/// Throws ValidationError on unknown sections/keys or ill-typed values.
EngineConfig config_from_json(const nlohmann::json& j, EngineConfig base = {});
nlohmann::json config_to_json(const EngineConfig& cfg);
EngineConfig load_config(const std::filesystem::path& path);

/// Applies one `section.key=value` override.
void apply_override(EngineConfig& cfg, std::string_view assignment);

/// All accepted `section.key` names, in documentation order.
std::vector<std::string> config_keys();

}  // namespace courtside

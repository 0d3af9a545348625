#include "courtside/config.hpp"

#include <algorithm>
#include <fstream>
#include <type_traits>

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

namespace courtside {

namespace {

template <typename Cfg, typename F>
void visit_fields(Cfg& c, F&& f) {
    f("matcher", "t_high", c.matcher.t_high);
    f("matcher", "t_low", c.matcher.t_low);
    f("matcher", "iou_match_min", c.matcher.iou_match_min);
    f("matcher", "max_gap", c.matcher.max_gap);
    f("matcher", "smooth_window", c.matcher.smooth_window);
    f("matcher", "assignment", c.matcher.assignment);
    f("game_state", "possession_window", c.game_state.possession_window);
    f("game_state", "lookahead", c.game_state.lookahead);
    f("game_state", "open_distance", c.game_state.open_distance);
    f("game_state", "handler_distance", c.game_state.handler_distance);
    f("game_state", "guard_distance_max", c.game_state.guard_distance_max);
    f("game_state", "frame_rate", c.game_state.frame_rate);
    f("gaze", "dwell_trigger", c.gaze.dwell_trigger);
    f("gaze", "linger", c.gaze.linger);
    f("gaze", "filter_radius", c.gaze.filter_radius);
    f("gaze", "dwell_grace", c.gaze.dwell_grace);
    f("gaze", "center_smoothing", c.gaze.center_smoothing);
    f("gaze", "hitbox_margin", c.gaze.hitbox_margin);
    f("gaze", "spotlight_ease", c.gaze.spotlight_ease);
    f("overlay", "reference_height", c.overlay.reference_height);
    f("overlay", "ring_inner", c.overlay.ring_inner);
    f("overlay", "ring_outer", c.overlay.ring_outer);
    f("overlay", "ring_stroke", c.overlay.ring_stroke);
    f("overlay", "shield_radius", c.overlay.shield_radius);
    f("overlay", "shield_px_per_point", c.overlay.shield_px_per_point);
    f("overlay", "guard_distance_max", c.overlay.guard_distance_max);
    f("overlay", "spotlight_radius", c.overlay.spotlight_radius);
    f("overlay", "link_width", c.overlay.link_width);
    f("overlay", "label_offset", c.overlay.label_offset);
    f("overlay", "ground_aspect", c.overlay.ground_aspect);
    f("overlay", "backdrop_darken", c.overlay.backdrop_darken);
    f("overlay", "audience_darken", c.overlay.audience_darken);
    f("overlay", "foot_confidence_min", c.overlay.foot_confidence_min);
    f("court", "margin", c.court_margin);
}

std::string assignment_name(track::Assignment a) {
    return a == track::Assignment::Hungarian ? "hungarian" : "greedy";
}

track::Assignment parse_assignment(const std::string& s, const std::string& key) {
    if (s == "greedy") return track::Assignment::Greedy;
    if (s == "hungarian") return track::Assignment::Hungarian;
    throw ValidationError(key, "expected \"greedy\" or \"hungarian\"");
}

template <typename T>
void assign(T& field, const nlohmann::json& v, const std::string& key) {
    if constexpr (std::is_same_v<T, track::Assignment>) {
        if (!v.is_string()) throw ValidationError(key, "expected a string");
        field = parse_assignment(v.get<std::string>(), key);
    } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ValidationError(key, "expected an integer");
        field = v.get<int>();
    } else {
        if (!v.is_number()) throw ValidationError(key, "expected a number");
        field = v.get<double>();
    }
}

}  // namespace

void EngineConfig::validate() const {
    matcher.validate();
    game_state.validate();
    gaze.validate();
    overlay.validate();
    if (!(court_margin >= 0.0)) throw ValidationError("court.margin", "must be non-negative");
}

EngineConfig config_from_json(const nlohmann::json& j, EngineConfig base) {
    if (!j.is_object()) throw ValidationError("config", "top level must be an object");
    const auto known = config_keys();
    for (const auto& [section, body] : j.items()) {
        if (!body.is_object()) throw ValidationError(section, "section must be an object");
        const bool known_section = std::any_of(known.begin(), known.end(),
                                               [&](const std::string& k) { return k.starts_with(section + "."); });
        if (!known_section) throw ValidationError(section, "unknown configuration section");
        for (const auto& [key, value] : body.items()) {
            const std::string full = section + "." + key;
            if (std::find(known.begin(), known.end(), full) == known.end()) {
                throw ValidationError(full, "unknown configuration key");
            }
        }
    }
    visit_fields(base, [&](const char* section, const char* key, auto& field) {
        const auto s = j.find(section);
        if (s == j.end()) return;
        const auto v = s->find(key);
        if (v == s->end()) return;
        assign(field, *v, std::string(section) + "." + key);
    });
    base.validate();
    return base;
}

nlohmann::json config_to_json(const EngineConfig& cfg) {
    nlohmann::json j = nlohmann::json::object();
    visit_fields(cfg, [&](const char* section, const char* key, const auto& field) {
        using T = std::decay_t<decltype(field)>;
        if constexpr (std::is_same_v<T, track::Assignment>) {
            j[section][key] = assignment_name(field);
        } else {
            j[section][key] = field;
        }
    });
    return j;
}

EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "cannot open '" + path.string() + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string(), 0, e.what());
    }
    return config_from_json(j);
}

void apply_override(EngineConfig& cfg, std::string_view assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq) {
        throw ValidationError("--set", "expected section.key=value, got '" + std::string(assignment) + "'");
    }
    const std::string section(text::trim(assignment.substr(0, dot)));
    const std::string key(text::trim(assignment.substr(dot + 1, eq - dot - 1)));
    const std::string raw(text::trim(assignment.substr(eq + 1)));
    nlohmann::json value;
    if (section == "matcher" && key == "assignment") {
        value = raw;
    } else {
        long long i = 0;
        double d = 0.0;
        if (text::parse_int(raw, i)) {
            value = i;
        } else if (text::parse_double(raw, d)) {
            value = d;
        } else {
            throw ValidationError(section + "." + key, "not a number: '" + raw + "'");
        }
    }
    nlohmann::json patch;
    patch[section][key] = value;
    cfg = config_from_json(patch, cfg);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    EngineConfig probe;
    visit_fields(probe, [&](const char* section, const char* key, auto&) {
        keys.push_back(std::string(section) + "." + key);
    });
    return keys;
}

}  // namespace courtside

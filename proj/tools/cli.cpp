#include "cli.hpp"

#include <csignal>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "courtside/ability.hpp"
#include "courtside/bundle.hpp"
#include "courtside/config.hpp"
#include "courtside/errors.hpp"
#include "courtside/evaluate.hpp"
#include "courtside/gaze.hpp"
#include "courtside/ingest.hpp"
#include "courtside/replay.hpp"
#include "courtside/server.hpp"
#include "courtside/session.hpp"
#include "courtside/text.hpp"
#include "courtside/track.hpp"

namespace courtside::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;  // reserved: nothing in the engine is random

    EngineConfig load(std::optional<EngineConfig> base = std::nullopt) const {
        EngineConfig cfg = base.value_or(EngineConfig{});
        if (!config.empty()) cfg = load_config(config);
        for (const auto& o : overrides) apply_override(cfg, o);
        cfg.validate();
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("--config", common.config, "JSON configuration file");
    cmd->add_option("--set", common.overrides, "Override one setting, e.g. --set gaze.linger=2.0");
    cmd->add_option("--seed", common.seed, "Reserved; the engine has no randomness");
}

template <typename F>
void write_output(const fs::path& path, F&& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    body(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::string pct(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << v * 100.0;
    return s.str();
}

std::string signed_pct(double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(1) << std::showpos << v * 100.0;
    return s.str();
}

nlohmann::json report_json(const evaluate::EvaluationReport& r) {
    nlohmann::json j;
    j["ap_50_95"] = r.ap_50_95;
    j["ap_50"] = r.ap_50;
    j["ap_75"] = r.ap_75;
    j["ground_truth"] = r.ground_truth_count;
    j["predictions"] = r.prediction_count;
    j["unknown_identities"] = r.unknown_identities;
    for (const auto& [id, ap] : r.per_identity) {
        j["per_identity"][id] = {{"ap", ap.ap}, {"ap_50_95", ap.ap_50_95()}, {"ground_truth", ap.ground_truth},
                                 {"predictions", ap.predictions}};
    }
    return j;
}

// ---- preprocess -----------------------------------------------------------

struct PreprocessArgs {
    CommonOptions common;
    std::string input;
    std::string detections, tracking, masks, shots, defense, roster, keypoints, partition, video;
    std::string game_id;
    FrameIndex frame_count = 0;
    std::vector<std::string> attack;
    std::string out;
};

int cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
    PreprocessInputs in;
    const fs::path dir = a.input;
    auto pick = [&](const std::string& flag, const char* name) {
        if (!flag.empty()) return fs::path(flag);
        return a.input.empty() ? fs::path() : dir / name;
    };
    auto optional_pick = [&](const std::string& flag, const char* name) -> std::optional<fs::path> {
        if (!flag.empty()) return fs::path(flag);
        if (!a.input.empty() && fs::exists(dir / name)) return dir / name;
        return std::nullopt;
    };
    in.detections = pick(a.detections, "detections.csv");
    in.tracking = pick(a.tracking, "tracking.csv");
    in.masks = pick(a.masks, "masks.rle");
    in.shots = pick(a.shots, "shots.csv");
    in.defense = pick(a.defense, "defense.csv");
    in.roster = pick(a.roster, "roster.csv");
    in.keypoints = optional_pick(a.keypoints, "keypoints.csv");
    in.partition = optional_pick(a.partition, "partition.csv");
    if (!a.video.empty()) in.video = a.video;

    EngineConfig base;
    if (!a.input.empty() && fs::exists(dir / "game.json")) {
        std::ifstream gf(dir / "game.json");
        nlohmann::json g;
        try {
            gf >> g;
            if (g.contains("game_id")) in.game_id = g.at("game_id").get<std::string>();
            if (g.contains("frame_count")) in.frame_count = g.at("frame_count").get<FrameIndex>();
            if (g.contains("frame_rate")) base.game_state.frame_rate = g.at("frame_rate").get<double>();
            if (g.contains("attacks_left")) {
                for (const auto& [team, left] : g.at("attacks_left").items()) in.attacks_left[team] = left.get<bool>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw ParseError((dir / "game.json").string(), 0, e.what());
        }
    }
    if (!a.game_id.empty()) in.game_id = a.game_id;
    if (a.frame_count > 0) in.frame_count = a.frame_count;
    for (const auto& arg : a.attack) {
        const auto eq = arg.find('=');
        const std::string side = eq == std::string::npos ? "" : arg.substr(eq + 1);
        if (side != "left" && side != "right") throw ValidationError("--attack", "expected TEAM=left|right");
        in.attacks_left[arg.substr(0, eq)] = side == "left";
    }

    const EngineConfig cfg = a.common.load(base);
    const auto bundle = preprocess(in, cfg);
    write_bundle(bundle, a.out, in.video);
    out << "bundle " << a.out << ": game " << bundle.meta().game_id << ", " << bundle.meta().frame_count
        << " frames, " << bundle.tracks().size() << " tracked boxes\n";
    return kOk;
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
    CommonOptions common;
    std::string predictions, ground_truth, json;
    bool no_timing = false;
};

double time_postprocess_ms(std::span<const Detection> detections, const track::MatcherConfig& cfg,
                           FrameIndex frames) {
    using clock = std::chrono::steady_clock;
    int reps = 0;
    const auto start = clock::now();
    auto elapsed = clock::duration::zero();
    while (reps < 3 || (elapsed < std::chrono::milliseconds(200) && reps < 1000)) {
        auto result = track::postprocess(detections, cfg);
        ++reps;
        elapsed = clock::now() - start;
        if (result.size() == static_cast<std::size_t>(-1)) break;  // keeps the call observable
    }
    const double ms = std::chrono::duration<double, std::milli>(elapsed).count();
    return ms / reps / static_cast<double>(std::max<FrameIndex>(1, frames));
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    const EngineConfig cfg = a.common.load();
    const auto detections = ingest::load_detections(a.predictions);
    const auto gt_detections = ingest::load_detections(a.ground_truth);
    const auto gt = evaluate::from_detections(gt_detections);

    const auto detection_stage = track::high_cluster_only(detections, cfg.matcher);
    const auto post_stage = track::postprocess(detections, cfg.matcher);
    const auto det_report = evaluate::evaluate_ap(evaluate::from_tracks(detection_stage), gt);
    const auto post_report = evaluate::evaluate_ap(evaluate::from_tracks(post_stage), gt);

    out << "Average Precision (IoU 0.50:0.95 / 0.50 / 0.75)\n";
    out << std::left << std::setw(18) << "Step" << std::right << std::setw(16) << "AP50:95" << std::setw(16)
        << "AP50" << std::setw(16) << "AP75" << '\n';
    out << std::left << std::setw(18) << "Player Detection" << std::right << std::setw(16)
        << pct(det_report.ap_50_95) << std::setw(16) << pct(det_report.ap_50) << std::setw(16)
        << pct(det_report.ap_75) << '\n';
    auto with_gain = [](double v, double base) { return pct(v) + " (" + signed_pct(v - base) + ")"; };
    out << std::left << std::setw(18) << "Post-Processing" << std::right << std::setw(16)
        << with_gain(post_report.ap_50_95, det_report.ap_50_95) << std::setw(16)
        << with_gain(post_report.ap_50, det_report.ap_50) << std::setw(16)
        << with_gain(post_report.ap_75, det_report.ap_75) << '\n';
    for (const auto& id : post_report.unknown_identities) {
        out << "warning: prediction identity " << id << " is absent from ground truth\n";
    }

    if (!a.no_timing) {
        FrameIndex first = 0, last = -1;
        if (!detections.empty()) {
            first = detections.front().frame;
            last = detections.back().frame;
        }
        const double post_ms = time_postprocess_ms(detections, cfg.matcher, last - first + 1);
        out << "\nTime cost per frame\n";
        out << std::left << std::setw(18) << "Step" << std::right << std::setw(12) << "Time (ms)" << '\n';
        out << std::left << std::setw(18) << "Player Detection" << std::right << std::setw(12) << "ingested" << '\n';
        std::ostringstream ms;
        ms << std::fixed << std::setprecision(3) << post_ms;
        out << std::left << std::setw(18) << "Post-Processing" << std::right << std::setw(12) << ms.str() << '\n';
        out << std::left << std::setw(18) << "Pose Estimation" << std::right << std::setw(12) << "ingested" << '\n';
        out << std::left << std::setw(18) << "Semantic Seg." << std::right << std::setw(12) << "ingested" << '\n';
    }

    if (!a.json.empty()) {
        nlohmann::json j;
        j["player_detection"] = report_json(det_report);
        j["post_processing"] = report_json(post_report);
        write_output(a.json, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    }
    return kOk;
}

// ---- epvmap ---------------------------------------------------------------

struct EpvArgs {
    std::string shots, partition, out;
    std::vector<std::string> players;
};

int cmd_epvmap(const EpvArgs& a, std::ostream& out) {
    const auto shots = ingest::load_shots(a.shots);
    const auto partition =
        a.partition.empty() ? ability::RegionPartition::standard() : ability::load_partition(a.partition);
    auto maps = ability::build_epv_maps(shots, partition, a.players);
    if (!a.players.empty()) {
        std::erase_if(maps, [&](const auto& kv) {
            return std::find(a.players.begin(), a.players.end(), kv.first) == a.players.end();
        });
    }
    const fs::path dir = a.out;
    write_output(dir / "epvmap.csv", [&](std::ostream& o) { ability::write_epv_maps(o, maps); });
    for (const auto& [player, map] : maps) {
        std::vector<ShotRecord> own;
        for (const auto& s : shots) {
            if (s.player == player) own.push_back(s);
        }
        write_output(dir / (player + ".svg"),
                     [&](std::ostream& o) { ability::write_epv_chart_svg(o, map, partition, own); });
    }
    out << "epv maps for " << maps.size() << " player(s) in " << dir << '\n';
    return kOk;
}

// ---- replay ---------------------------------------------------------------

struct ReplayArgs {
    CommonOptions common;
    std::string bundle, gaze, out, text;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
    auto bundle = load_bundle(a.bundle);
    if (!a.common.config.empty() || !a.common.overrides.empty()) {
        // Only presentation settings can change after preprocessing.
        const EngineConfig cfg = a.common.load(bundle.meta().config);
        BundleMeta meta = bundle.meta();
        meta.config.gaze = cfg.gaze;
        meta.config.overlay = cfg.overlay;
        bundle = GameBundle(meta, bundle.tracks(), bundle.tracking(), bundle.states(), bundle.epv(),
                            bundle.defense_records(), bundle.partition(), bundle.roster(), bundle.masks(),
                            bundle.keypoints());
    }
    const auto trace = a.gaze.empty() ? std::vector<gaze::GazeSample>{} : gaze::load_gaze_trace(a.gaze);
    const auto result = replay(bundle, trace);
    write_output(a.out, [&](std::ostream& o) {
        o.write(reinterpret_cast<const char*>(result.wire.data()), static_cast<std::streamsize>(result.wire.size()));
    });
    if (!a.text.empty()) write_output(a.text, [&](std::ostream& o) { o << result.text; });
    for (const auto& w : result.warnings) err << "warning: " << w << '\n';
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a64(result.wire)));
    out << "frames " << bundle.meta().frame_count << ", bytes " << result.wire.size() << ", fnv1a64 " << hash
        << '\n';
    return kOk;
}

// ---- serve ----------------------------------------------------------------

struct ServeArgs {
    std::vector<std::string> bundles;
    std::string address = "127.0.0.1";
    std::uint16_t port = 8080;
    double speed = 1.0;
};

int cmd_serve(const ServeArgs& a, std::ostream& out) {
    session::SessionManager manager;
    std::map<std::string, fs::path> dirs;
    for (const auto& dir : a.bundles) {
        auto bundle = std::make_shared<const GameBundle>(load_bundle(dir));
        dirs[bundle->meta().game_id] = dir;
        manager.add_game(std::move(bundle));
    }
    server::Server server(manager, dirs, {a.address, a.port, a.speed, 8});

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // inherited by the server thread

    const auto port = server.start();
    out << "serving " << manager.game_ids().size() << " game(s) on http://" << a.address << ':' << port
        << " (WebSocket at /ws)" << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    out << "stopped" << std::endl;
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Basketball video augmentation engine"};
    app.require_subcommand(1);

    PreprocessArgs pre;
    auto* p = app.add_subcommand("preprocess", "Build a game bundle from raw inputs");
    add_common(p, pre.common);
    p->add_option("--input", pre.input, "Directory with the standard input file names");
    p->add_option("--detections", pre.detections);
    p->add_option("--tracking", pre.tracking);
    p->add_option("--masks", pre.masks);
    p->add_option("--shots", pre.shots);
    p->add_option("--defense", pre.defense);
    p->add_option("--roster", pre.roster);
    p->add_option("--keypoints", pre.keypoints);
    p->add_option("--partition", pre.partition, "Region partition file (default: standard)");
    p->add_option("--video", pre.video, "Video file copied into the bundle");
    p->add_option("--game-id", pre.game_id);
    p->add_option("--frame-count", pre.frame_count);
    p->add_option("--attack", pre.attack, "TEAM=left|right: basket the team attacks");
    p->add_option("--out", pre.out, "Bundle directory")->required();

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "AP of the detection and post-processing stages");
    add_common(e, ev.common);
    e->add_option("--predictions", ev.predictions, "Raw detections")->required();
    e->add_option("--ground-truth", ev.ground_truth, "Annotated boxes (detections format)")->required();
    e->add_option("--json", ev.json, "Write the full report as JSON");
    e->add_flag("--no-timing", ev.no_timing, "Skip the timing table");

    EpvArgs epv;
    auto* m = app.add_subcommand("epvmap", "Per-player EPV maps and shot charts");
    m->add_option("--shots", epv.shots)->required();
    m->add_option("--partition", epv.partition);
    m->add_option("--player", epv.players, "Limit to these players");
    m->add_option("--out", epv.out, "Output directory")->required();

    ReplayArgs rp;
    auto* r = app.add_subcommand("replay", "Render a bundle offline with an optional gaze trace");
    add_common(r, rp.common);
    r->add_option("--bundle", rp.bundle)->required();
    r->add_option("--gaze", rp.gaze, "Gaze trace (timestamp,x,y,valid)");
    r->add_option("--out", rp.out, "Binary render-command dump")->required();
    r->add_option("--text", rp.text, "Also write a text dump");

    ServeArgs sv;
    auto* s = app.add_subcommand("serve", "Serve bundles to viewers");
    s->add_option("--bundle", sv.bundles)->required();
    s->add_option("--address", sv.address);
    s->add_option("--port", sv.port);
    s->add_option("--speed", sv.speed, "Presentation rate multiplier");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& ex) {
        const int code = app.exit(ex, out, err);
        return code == 0 ? kOk : kValidationError;
    }

    try {
        if (p->parsed()) return cmd_preprocess(pre, out);
        if (e->parsed()) return cmd_evaluate(ev, out);
        if (m->parsed()) return cmd_epvmap(epv, out);
        if (r->parsed()) return cmd_replay(rp, out, err);
        if (s->parsed()) return cmd_serve(sv, out);
    } catch (const ValidationError& ex) {
        err << "error: " << ex.what() << '\n';
        return kValidationError;
    } catch (const ParseError& ex) {
        err << "error: " << ex.what() << '\n';
        return kValidationError;
    } catch (const NotFoundError& ex) {
        err << "error: " << ex.what() << '\n';
        return kValidationError;
    } catch (const RangeError& ex) {
        err << "error: " << ex.what() << '\n';
        return kValidationError;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}

}  // namespace courtside::cli

#include "courtside/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

#include "courtside/errors.hpp"
#include "courtside/ingest.hpp"

namespace courtside {

namespace fs = std::filesystem;
using namespace ingest;

namespace {

void check_frame(FrameIndex frame, FrameIndex count, const char* stream) {
    if (frame < 0 || frame >= count) {
        throw ValidationError(stream, "frame " + std::to_string(frame) + " outside [0, " + std::to_string(count) + ")");
    }
}

template <typename T, typename FrameOf>
std::vector<std::size_t> frame_offsets(const std::vector<T>& items, FrameIndex count, FrameOf frame_of) {
    std::vector<std::size_t> offsets(static_cast<std::size_t>(count) + 1, 0);
    for (const auto& item : items) ++offsets[static_cast<std::size_t>(frame_of(item)) + 1];
    for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    return offsets;
}

}  // namespace

GameBundle::GameBundle(BundleMeta meta, std::vector<track::TrackedBox> tracks, std::vector<CourtSample> tracking,
                       std::vector<game_state::GameStateFrame> states, std::map<PlayerId, ability::EpvMap> epv,
                       std::vector<DefenseRecord> defense, ability::RegionPartition partition, Roster roster,
                       std::vector<SegmentationMask> masks, std::vector<PoseKeypoints> keypoints)
    : meta_(std::move(meta)),
      tracks_(std::move(tracks)),
      tracking_(std::move(tracking)),
      states_(std::move(states)),
      epv_(std::move(epv)),
      defense_records_(std::move(defense)),
      partition_(std::move(partition)),
      roster_(std::move(roster)),
      masks_(std::move(masks)),
      keypoints_(std::move(keypoints)) {
    meta_.config.validate();
    const FrameIndex n = meta_.frame_count;
    if (n <= 0) throw ValidationError("frame_count", "must be positive");
    if (meta_.width <= 0 || meta_.height <= 0) throw ValidationError("width", "frame size must be positive");

    std::stable_sort(tracks_.begin(), tracks_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
    });
    for (const auto& tb : tracks_) {
        check_frame(tb.frame, n, "tracks");
        if (!roster_.contains(tb.identity)) throw ValidationError("identity", "'" + tb.identity + "' not in roster");
    }
    for (const auto& s : tracking_) {
        check_frame(s.frame, n, "tracking");
        if (!s.is_ball() && !roster_.contains(s.entity)) {
            throw ValidationError("entity", "'" + s.entity + "' not in roster");
        }
    }
    if (static_cast<FrameIndex>(states_.size()) != n) {
        throw ValidationError("gamestate", "expected " + std::to_string(n) + " frames, got " +
                                               std::to_string(states_.size()));
    }
    for (std::size_t i = 0; i < states_.size(); ++i) {
        if (states_[i].frame != static_cast<FrameIndex>(i)) throw ValidationError("gamestate", "frames out of order");
    }
    std::stable_sort(masks_.begin(), masks_.end(), [](const auto& a, const auto& b) { return a.frame < b.frame; });
    for (std::size_t i = 0; i < masks_.size(); ++i) {
        check_frame(masks_[i].frame, n, "masks");
        if (masks_[i].width != meta_.width || masks_[i].height != meta_.height) {
            throw ValidationError("masks", "mask size differs from the frame size");
        }
        mask_index_[masks_[i].frame] = i;
    }
    std::stable_sort(keypoints_.begin(), keypoints_.end(), [](const auto& a, const auto& b) {
        return std::tie(a.frame, a.player) < std::tie(b.frame, b.player);
    });
    for (const auto& kp : keypoints_) check_frame(kp.frame, n, "keypoints");

    store_ = game_state::TrackingStore(tracking_);
    defense_ = ability::DefenseTable(defense_records_);
    box_offsets_ = frame_offsets(tracks_, n, [](const auto& t) { return t.frame; });
    keypoint_offsets_ = frame_offsets(keypoints_, n, [](const auto& k) { return k.frame; });
}

std::span<const track::TrackedBox> GameBundle::boxes_at(FrameIndex frame) const {
    if (frame < 0 || frame >= meta_.frame_count) return {};
    const auto f = static_cast<std::size_t>(frame);
    return std::span(tracks_).subspan(box_offsets_[f], box_offsets_[f + 1] - box_offsets_[f]);
}

std::span<const PoseKeypoints> GameBundle::keypoints_at(FrameIndex frame) const {
    if (frame < 0 || frame >= meta_.frame_count) return {};
    const auto f = static_cast<std::size_t>(frame);
    return std::span(keypoints_).subspan(keypoint_offsets_[f], keypoint_offsets_[f + 1] - keypoint_offsets_[f]);
}

const SegmentationMask* GameBundle::mask_at(FrameIndex frame) const {
    const auto it = mask_index_.find(frame);
    return it == mask_index_.end() ? nullptr : &masks_[it->second];
}

FrameIndex GameBundle::frame_at_time(double t) const {
    const auto f = static_cast<FrameIndex>(std::floor(t * meta_.frame_rate() + gaze::kTimeEpsilon));
    return std::clamp<FrameIndex>(f, 0, meta_.frame_count - 1);
}

overlay::GameContext GameBundle::context() const {
    return {&roster_, &partition_, &epv_, &defense_, meta_.attacks_left};
}

overlay::FrameInput GameBundle::frame_input(FrameIndex frame, const gaze::GazeEngine::Frame* gaze) const {
    overlay::FrameInput in;
    in.frame = frame;
    in.boxes = boxes_at(frame);
    in.state = frame >= 0 && frame < meta_.frame_count ? &states_[static_cast<std::size_t>(frame)] : nullptr;
    in.samples = store_.at(frame);
    in.keypoints = keypoints_at(frame);
    in.mask = mask_at(frame);
    in.gaze = gaze;
    return in;
}

namespace {

void require_file(const fs::path& p, const char* what) {
    if (!fs::is_regular_file(p)) throw ValidationError(what, "missing file '" + p.string() + "'");
}

}  // namespace

GameBundle preprocess(const PreprocessInputs& in, const EngineConfig& cfg) {
    cfg.validate();
    require_file(in.detections, "detections");
    require_file(in.tracking, "tracking");
    require_file(in.masks, "masks");
    require_file(in.shots, "shots");
    require_file(in.defense, "defense");
    require_file(in.roster, "roster");
    if (in.keypoints) require_file(*in.keypoints, "keypoints");
    if (in.partition) require_file(*in.partition, "partition");
    if (in.video) require_file(*in.video, "video");

    Roster roster = load_roster(in.roster);
    auto detections = load_detections(in.detections, &roster);
    auto tracking = load_tracking(in.tracking, CourtBounds{cfg.court_margin});
    auto masks = load_masks(in.masks);
    auto shots = load_shots(in.shots);
    auto defense = load_defense(in.defense);
    auto keypoints = in.keypoints ? load_keypoints(*in.keypoints) : std::vector<PoseKeypoints>{};
    auto partition = in.partition ? ability::load_partition(in.partition->string()) : ability::RegionPartition::standard();

    BundleMeta meta;
    meta.game_id = in.game_id;
    meta.config = cfg;
    meta.attacks_left = in.attacks_left;
    if (in.video) meta.video = in.video->filename().string();
    if (!masks.empty()) {
        meta.width = masks.front().width;
        meta.height = masks.front().height;
    }
    FrameIndex last = -1;
    for (const auto& d : detections) last = std::max(last, d.frame);
    for (const auto& s : tracking) last = std::max(last, s.frame);
    for (const auto& m : masks) last = std::max(last, m.frame);
    meta.frame_count = in.frame_count.value_or(last + 1);

    auto tracks = track::postprocess(detections, cfg.matcher);
    const game_state::TrackingStore store(tracking);
    auto states = game_state::compute_all(store, roster, cfg.game_state, meta.frame_count);
    std::vector<PlayerId> players;
    for (const auto& e : roster.entries()) players.push_back(e.player);
    auto epv = ability::build_epv_maps(shots, partition, players);

    return GameBundle(std::move(meta), std::move(tracks), std::move(tracking), std::move(states), std::move(epv),
                      std::move(defense), std::move(partition), std::move(roster), std::move(masks),
                      std::move(keypoints));
}

nlohmann::json meta_to_json(const BundleMeta& meta) {
    nlohmann::json j;
    j["game_id"] = meta.game_id;
    j["frame_rate"] = meta.frame_rate();
    j["frame_count"] = meta.frame_count;
    j["width"] = meta.width;
    j["height"] = meta.height;
    j["attacks_left"] = nlohmann::json::object();
    for (const auto& [team, left] : meta.attacks_left) j["attacks_left"][team] = left;
    j["video"] = meta.video ? nlohmann::json(*meta.video) : nlohmann::json(nullptr);
    j["config"] = config_to_json(meta.config);
    return j;
}

namespace {

template <typename F>
void write_file(const fs::path& path, F&& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    body(out);
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::ifstream open_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("bundle", "missing file '" + path.string() + "'");
    return in;
}

BundleMeta meta_from_json(const nlohmann::json& j, const fs::path& source) {
    try {
        BundleMeta meta;
        meta.game_id = j.at("game_id").get<std::string>();
        meta.frame_count = j.at("frame_count").get<FrameIndex>();
        meta.width = j.at("width").get<int>();
        meta.height = j.at("height").get<int>();
        for (const auto& [team, left] : j.at("attacks_left").items()) meta.attacks_left[team] = left.get<bool>();
        if (j.contains("video") && !j.at("video").is_null()) meta.video = j.at("video").get<std::string>();
        meta.config = config_from_json(j.at("config"));
        if (j.at("frame_rate").get<double>() != meta.config.game_state.frame_rate) {
            throw ValidationError("frame_rate", "disagrees with config.game_state.frame_rate");
        }
        return meta;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(source.string(), 0, e.what());
    }
}

}  // namespace

void write_bundle(const GameBundle& b, const fs::path& dir, const std::optional<fs::path>& video_source) {
    fs::create_directories(dir);
    write_file(dir / "bundle.json", [&](std::ostream& o) { o << meta_to_json(b.meta()).dump(2) << '\n'; });
    write_file(dir / "tracks.csv", [&](std::ostream& o) { track::write_tracks(o, b.tracks()); });
    write_file(dir / "tracking.csv", [&](std::ostream& o) { write_tracking(o, b.tracking()); });
    write_file(dir / "gamestate.csv", [&](std::ostream& o) { game_state::write_game_states(o, b.states()); });
    write_file(dir / "epvmap.csv", [&](std::ostream& o) { ability::write_epv_maps(o, b.epv()); });
    write_file(dir / "defense.csv", [&](std::ostream& o) { write_defense(o, b.defense_records()); });
    write_file(dir / "roster.csv", [&](std::ostream& o) { write_roster(o, b.roster()); });
    write_file(dir / "partition.csv", [&](std::ostream& o) { ability::write_partition(o, b.partition()); });
    write_file(dir / "masks.rle", [&](std::ostream& o) { write_masks(o, b.masks()); });
    write_file(dir / "keypoints.csv", [&](std::ostream& o) { write_keypoints(o, b.keypoints()); });
    if (video_source && b.meta().video) {
        fs::copy_file(*video_source, dir / *b.meta().video, fs::copy_options::overwrite_existing);
    }
}

GameBundle load_bundle(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ValidationError("bundle", "not a bundle directory '" + dir.string() + "'");
    nlohmann::json j;
    {
        auto in = open_file(dir / "bundle.json");
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError((dir / "bundle.json").string(), 0, e.what());
        }
    }
    BundleMeta meta = meta_from_json(j, dir / "bundle.json");

    auto path = [&](const char* name) { return (dir / name).string(); };
    auto tracks_in = open_file(dir / "tracks.csv");
    auto tracks = track::parse_tracks(tracks_in, path("tracks.csv"));
    auto tracking = load_tracking(dir / "tracking.csv", CourtBounds{meta.config.court_margin});
    const game_state::TrackingStore store(tracking);
    auto states_in = open_file(dir / "gamestate.csv");
    auto states = game_state::parse_game_states(states_in, path("gamestate.csv"), store);
    auto epv_in = open_file(dir / "epvmap.csv");
    auto epv = ability::parse_epv_maps(epv_in, path("epvmap.csv"));
    auto defense = load_defense(dir / "defense.csv");
    auto roster = load_roster(dir / "roster.csv");
    auto partition = ability::load_partition(path("partition.csv"));
    auto masks = load_masks(dir / "masks.rle");
    auto keypoints = load_keypoints(dir / "keypoints.csv");
    return GameBundle(std::move(meta), std::move(tracks), std::move(tracking), std::move(states), std::move(epv),
                      std::move(defense), std::move(partition), std::move(roster), std::move(masks),
                      std::move(keypoints));
}

}  // namespace courtside

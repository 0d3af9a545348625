#include "courtside/game_state.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "courtside/ability.hpp"
#include "courtside/errors.hpp"
#include "courtside/text.hpp"

namespace courtside::game_state {

void GameStateConfig::validate() const {
    const std::pair<const char*, double> fields[] = {
        {"possession_window", possession_window}, {"lookahead", lookahead},
        {"open_distance", open_distance},         {"handler_distance", handler_distance},
        {"guard_distance_max", guard_distance_max}, {"frame_rate", frame_rate}};
    for (const auto& [name, value] : fields) {
        if (!(value > 0.0)) throw ValidationError(name, "must be positive");
    }
}

FrameIndex GameStateConfig::window_frames() const {
    return std::max<FrameIndex>(1, std::llround(possession_window * frame_rate));
}

FrameIndex GameStateConfig::lookahead_frames() const {
    return static_cast<FrameIndex>(std::floor(lookahead * frame_rate + 1e-9));
}

double numeric_level(Importance level) noexcept {
    switch (level) {
        case Importance::Lv3: return 3.0;
        case Importance::Lv2_5: return 2.5;
        case Importance::Lv2: return 2.0;
        case Importance::Lv1: break;
    }
    return 1.0;
}

std::string_view to_string(Importance level) {
    switch (level) {
        case Importance::Lv3: return "3";
        case Importance::Lv2_5: return "2.5";
        case Importance::Lv2: return "2";
        case Importance::Lv1: break;
    }
    return "1";
}

TrackingStore::TrackingStore(std::span<const CourtSample> samples) {
    for (const auto& s : samples) {
        auto& frame = frames_[s.frame];
        if (s.is_ball()) {
            frame.ball = s.position;
        } else {
            frame.players[s.entity] = s.position;
        }
    }
    if (!frames_.empty()) {
        first_ = frames_.begin()->first;
        last_ = frames_.rbegin()->first;
    }
}

const FrameSamples* TrackingStore::at(FrameIndex frame) const {
    const auto it = frames_.find(frame);
    return it == frames_.end() ? nullptr : &it->second;
}

std::optional<CourtPoint> TrackingStore::position(FrameIndex frame, const PlayerId& player) const {
    const auto* fs = at(frame);
    if (!fs) return std::nullopt;
    const auto it = fs->players.find(player);
    if (it == fs->players.end()) return std::nullopt;
    return it->second;
}

std::optional<PlayerId> detect_ball_handler(const FrameSamples& samples, const GameStateConfig& cfg) {
    if (!samples.ball) throw StateError("no ball sample at frame");
    std::optional<PlayerId> best;
    double best_dist = std::numeric_limits<double>::infinity();
    // players is ordered by id, so strict '<' keeps the lowest id on ties.
    for (const auto& [id, pos] : samples.players) {
        const double d = ability::dist(pos, *samples.ball);
        if (d <= cfg.handler_distance && d < best_dist) {
            best_dist = d;
            best = id;
        }
    }
    return best;
}

std::optional<PlayerId> detect_ball_handler(const TrackingStore& store, FrameIndex frame, const GameStateConfig& cfg) {
    const auto* fs = store.at(frame);
    if (!fs) throw StateError("no tracking samples at frame " + std::to_string(frame));
    return detect_ball_handler(*fs, cfg);
}

namespace {

std::optional<PlayerId> handler_if_ball(const TrackingStore& store, FrameIndex frame, const GameStateConfig& cfg) {
    const auto* fs = store.at(frame);
    if (!fs || !fs->ball) return std::nullopt;
    return detect_ball_handler(*fs, cfg);
}

/// Most recent handler within the trailing window ending at `frame`.
std::optional<PlayerId> recent_handler(const TrackingStore& store, FrameIndex frame, const GameStateConfig& cfg) {
    const FrameIndex window = cfg.window_frames();
    for (FrameIndex f = frame; f > frame - window; --f) {
        if (auto h = handler_if_ball(store, f, cfg)) return h;
    }
    return std::nullopt;
}

const TeamId* team_of(const Roster& roster, const PlayerId& id) {
    const auto* entry = roster.find(id);
    return entry ? &entry->team : nullptr;
}

}  // namespace

std::optional<TeamId> detect_offense(const TrackingStore& store, FrameIndex frame, const Roster& roster,
                                     const GameStateConfig& cfg) {
    const auto handler = recent_handler(store, frame, cfg);
    if (!handler) return std::nullopt;
    const auto* team = team_of(roster, *handler);
    if (!team) return std::nullopt;
    return *team;
}

std::optional<PlayerId> detect_next_receiver(const TrackingStore& store, FrameIndex frame, const GameStateConfig& cfg) {
    const auto reference = recent_handler(store, frame, cfg);
    const FrameIndex horizon = cfg.lookahead_frames();
    for (FrameIndex f = frame + 1; f <= frame + horizon; ++f) {
        const auto h = handler_if_ball(store, f, cfg);
        if (h && h != reference) return h;
    }
    return std::nullopt;
}

std::set<PlayerId> detect_open_players(const FrameSamples& samples, const TeamId& offense,
                                       const std::optional<PlayerId>& handler, const Roster& roster,
                                       const GameStateConfig& cfg) {
    std::set<PlayerId> open;
    for (const auto& [id, pos] : samples.players) {
        const auto* team = team_of(roster, id);
        if (!team || *team != offense || id == handler) continue;
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& [other, other_pos] : samples.players) {
            const auto* other_team = team_of(roster, other);
            if (!other_team || *other_team == offense) continue;
            nearest = std::min(nearest, ability::dist(pos, other_pos));
        }
        if (nearest >= cfg.open_distance) open.insert(id);
    }
    return open;
}

std::set<PlayerId> detect_key_defenders(const TrackingStore& store, FrameIndex frame, const PlayerId& handler,
                                        const Roster& roster, const GameStateConfig& cfg) {
    std::set<PlayerId> result;
    const auto* now = store.at(frame);
    const auto* offense = team_of(roster, handler);
    if (!now || !offense) return result;
    const auto handler_pos = now->players.find(handler);
    if (handler_pos == now->players.end()) return result;

    const FrameIndex window = cfg.window_frames();
    for (const auto& [defender, defender_pos] : now->players) {
        const auto* team = team_of(roster, defender);
        if (!team || *team == *offense) continue;
        if (ability::dist(defender_pos, handler_pos->second) > cfg.guard_distance_max) continue;

        // Mean distance to every offensive player over the window.
        std::map<PlayerId, std::pair<double, int>> totals;
        for (FrameIndex f = frame; f > frame - window; --f) {
            const auto* fs = store.at(f);
            if (!fs) continue;
            const auto d = fs->players.find(defender);
            if (d == fs->players.end()) continue;
            for (const auto& [attacker, attacker_pos] : fs->players) {
                const auto* attacker_team = team_of(roster, attacker);
                if (!attacker_team || *attacker_team != *offense) continue;
                auto& [sum, count] = totals[attacker];
                sum += ability::dist(d->second, attacker_pos);
                ++count;
            }
        }
        std::optional<PlayerId> closest;
        double closest_mean = std::numeric_limits<double>::infinity();
        for (const auto& [attacker, acc] : totals) {
            const double mean = acc.first / acc.second;
            if (mean < closest_mean) {
                closest_mean = mean;
                closest = attacker;
            }
        }
        if (closest == handler) result.insert(defender);
    }
    return result;
}

std::map<PlayerId, Importance> rank_importance(const RankingInput& input) {
    std::map<PlayerId, Importance> levels;
    for (const auto& p : input.players) levels[p] = Importance::Lv1;
    for (const auto& d : input.key_defenders) levels[d] = Importance::Lv2;
    if (input.ball_handler) levels[*input.ball_handler] = Importance::Lv3;
    if (input.next_receiver) levels[*input.next_receiver] = Importance::Lv3;
    for (const auto& p : input.open_players) levels[p] = Importance::Lv3;
    return levels;
}

std::set<Link> one_on_one_links(const std::set<PlayerId>& key_defenders, const std::optional<PlayerId>& handler) {
    std::set<Link> links;
    if (!handler) return links;
    for (const auto& d : key_defenders) links.insert({d, *handler});
    return links;
}

GameStateFrame compute_frame(const TrackingStore& store, FrameIndex frame, const Roster& roster,
                             const GameStateConfig& cfg) {
    GameStateFrame state;
    state.frame = frame;
    const auto* fs = store.at(frame);
    if (!fs) return state;

    RankingInput ranking;
    for (const auto& [id, pos] : fs->players) {
        if (roster.contains(id)) ranking.players.push_back(id);
    }

    if (fs->ball) state.ball_handler = detect_ball_handler(*fs, cfg);
    if (state.ball_handler && !roster.contains(*state.ball_handler)) state.ball_handler.reset();
    state.offense = detect_offense(store, frame, roster, cfg);
    if (state.offense) {
        // A steal makes the first new handler an opponent; only teammates are receivers.
        if (auto receiver = detect_next_receiver(store, frame, cfg)) {
            const auto* team = team_of(roster, *receiver);
            if (team && *team == *state.offense) state.next_receiver = receiver;
        }
        state.open_players = detect_open_players(*fs, *state.offense, state.ball_handler, roster, cfg);
    }
    if (state.ball_handler) {
        state.key_defenders = detect_key_defenders(store, frame, *state.ball_handler, roster, cfg);
    }
    state.links = one_on_one_links(state.key_defenders, state.ball_handler);

    ranking.ball_handler = state.ball_handler;
    ranking.next_receiver = state.next_receiver;
    ranking.open_players = state.open_players;
    ranking.key_defenders = state.key_defenders;
    state.importance = rank_importance(ranking);
    return state;
}

std::vector<GameStateFrame> compute_all(const TrackingStore& store, const Roster& roster, const GameStateConfig& cfg,
                                        FrameIndex frame_count) {
    cfg.validate();
    std::vector<GameStateFrame> frames;
    frames.reserve(static_cast<std::size_t>(std::max<FrameIndex>(0, frame_count)));
    for (FrameIndex f = 0; f < frame_count; ++f) frames.push_back(compute_frame(store, f, roster, cfg));
    return frames;
}

namespace {

std::string join_set(const std::set<PlayerId>& ids) {
    return text::join(std::vector<std::string>(ids.begin(), ids.end()), ';');
}

std::set<PlayerId> split_set(std::string_view field) {
    std::set<PlayerId> out;
    if (text::trim(field).empty()) return out;
    for (const auto part : text::split(text::trim(field), ';')) out.insert(std::string(text::trim(part)));
    return out;
}

std::optional<std::string> optional_field(std::string_view field) {
    const auto t = text::trim(field);
    if (t.empty()) return std::nullopt;
    return std::string(t);
}

}  // namespace

void write_game_states(std::ostream& out, const std::vector<GameStateFrame>& frames) {
    for (const auto& s : frames) {
        out << s.frame << ',' << s.offense.value_or("") << ',' << s.ball_handler.value_or("") << ','
            << s.next_receiver.value_or("") << ',' << join_set(s.open_players) << ',' << join_set(s.key_defenders)
            << '\n';
    }
}

std::vector<GameStateFrame> parse_game_states(std::istream& in, const std::string& source,
                                              const TrackingStore& store) {
    std::vector<GameStateFrame> frames;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto f = text::split(line, ',');
        if (f.size() != 6) throw ParseError(source, line_no, "expected 6 fields");
        GameStateFrame s;
        long long frame = 0;
        if (!text::parse_int(f[0], frame) || frame < 0) throw ParseError(source, line_no, "malformed frame");
        s.frame = frame;
        s.offense = optional_field(f[1]);
        s.ball_handler = optional_field(f[2]);
        s.next_receiver = optional_field(f[3]);
        s.open_players = split_set(f[4]);
        s.key_defenders = split_set(f[5]);
        s.links = one_on_one_links(s.key_defenders, s.ball_handler);
        RankingInput ranking{{}, s.ball_handler, s.next_receiver, s.open_players, s.key_defenders};
        if (const auto* fs = store.at(s.frame)) {
            for (const auto& [id, pos] : fs->players) ranking.players.push_back(id);
        }
        s.importance = rank_importance(ranking);
        frames.push_back(std::move(s));
    }
    std::stable_sort(frames.begin(), frames.end(),
                     [](const GameStateFrame& a, const GameStateFrame& b) { return a.frame < b.frame; });
    return frames;
}

}  // namespace courtside::game_state

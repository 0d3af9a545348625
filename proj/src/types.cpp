#include "courtside/types.hpp"

#include <algorithm>
#include <set>

#include "courtside/errors.hpp"

namespace courtside {

std::vector<std::uint8_t> SegmentationMask::decode() const {
    std::vector<std::uint8_t> pixels;
    pixels.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
    std::uint8_t value = 0;
    for (const auto run : runs) {
        pixels.insert(pixels.end(), run, value);
        value ^= 1;
    }
    return pixels;
}

std::uint64_t SegmentationMask::foreground_count() const {
    std::uint64_t total = 0;
    for (std::size_t i = 1; i < runs.size(); i += 2) total += runs[i];
    return total;
}

const Keypoint* PoseKeypoints::joint(std::string_view name) const {
    for (const auto& j : joints) {
        if (j.joint == name) return &j;
    }
    return nullptr;
}

Roster::Roster(std::vector<RosterEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(),
              [](const RosterEntry& a, const RosterEntry& b) { return a.player < b.player; });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
        if (entries_[i].player == entries_[i - 1].player) {
            throw ValidationError("player", "duplicate roster id '" + entries_[i].player + "'");
        }
    }
}

const RosterEntry* Roster::find(const PlayerId& id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const RosterEntry& e, const PlayerId& key) { return e.player < key; });
    if (it == entries_.end() || it->player != id) return nullptr;
    return &*it;
}

const TeamId& Roster::team_of(const PlayerId& id) const {
    const auto* entry = find(id);
    if (!entry) throw NotFoundError("player '" + id + "' is not on the roster");
    return entry->team;
}

std::vector<TeamId> Roster::teams() const {
    std::set<TeamId> teams;
    for (const auto& e : entries_) teams.insert(e.team);
    return {teams.begin(), teams.end()};
}

std::string_view to_string(StarRole role) {
    switch (role) {
        case StarRole::Shooter: return "shooter";
        case StarRole::Defender: return "defender";
        case StarRole::None: break;
    }
    return "none";
}

std::optional<StarRole> star_role_from_string(std::string_view text) {
    if (text == "none") return StarRole::None;
    if (text == "shooter") return StarRole::Shooter;
    if (text == "defender") return StarRole::Defender;
    return std::nullopt;
}

}  // namespace courtside

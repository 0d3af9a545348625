#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "courtside/types.hpp"

// Shooting regions, per-player expected point value (EPV) maps and defensive
// DIFF% lookups. All positions are in the attacking-half frame: basket at
// (5.25, 25), frontcourt x < 47.

namespace courtside::ability {

using RegionId = std::string;

inline constexpr CourtPoint kBasket{5.25, 25.0};
inline constexpr double kHalfCourt = kCourtLength / 2.0;

struct Polygon {
    std::vector<CourtPoint> vertices;

    /// Crossing-number test with half-open edges: a point on a shared edge belongs
    /// to the polygon on the increasing-x side, then the increasing-y side.
    bool contains(const CourtPoint& p) const;
};

struct Region {
    RegionId id;
    int point_value = 2;  // 0 marks a non-scoring region
    std::vector<Polygon> polygons;
};

/// Ordered list of regions; the first region whose polygons contain a point owns
/// it, and points matched by none fall to the last region. Lookup is total.
class RegionPartition {
public:
    RegionPartition() = default;
    /// Throws ValidationError on empty input, duplicate ids, bad point values, or degenerate polygons.
    explicit RegionPartition(std::vector<Region> regions);

    /// Built-in NBA-style partition (13 regions, arcs approximated by polygons).
    static RegionPartition standard();

    const Region& region_at(const CourtPoint& p) const;
    const Region* find(const RegionId& id) const;
    const std::vector<Region>& regions() const noexcept { return regions_; }

private:
    std::vector<Region> regions_;
};

/// partition file: one polygon per line, `region,point_value,x1 y1;x2 y2;...`.
/// Several lines may share a region id (unions); file order sets priority.
RegionPartition parse_partition(std::istream& in, const std::string& source);
RegionPartition load_partition(const std::string& path);
void write_partition(std::ostream& out, const RegionPartition& partition);

struct EpvEntry {
    int attempts = 0;
    int makes = 0;
    double epv = 0.0;
    bool is_default = false;  // no attempts; epv is the league default
};

struct EpvMap {
    PlayerId player;
    std::map<RegionId, EpvEntry> regions;  // every region of the partition
};

/// League-average EPV per region over all shots (fallback 1.0 when a region
/// has none; non-scoring regions are 0).
class LeagueAverages {
public:
    static constexpr double kFallbackEpv = 1.0;

    LeagueAverages() = default;
    LeagueAverages(std::span<const ShotRecord> all_shots, const RegionPartition& partition);

    double epv(const Region& region) const;

private:
    std::map<RegionId, std::pair<int, int>> totals_;  // attempts, makes
};

/// Aggregates one player's shots by region. Throws ValidationError when a shot
/// belongs to another player or lies outside the court.
EpvMap build_epv_map(const PlayerId& player, std::span<const ShotRecord> shots, const RegionPartition& partition,
                     const LeagueAverages& league);

/// Per-player maps for every player with shots in `all_shots` plus `extra_players`.
std::map<PlayerId, EpvMap> build_epv_maps(std::span<const ShotRecord> all_shots, const RegionPartition& partition,
                                          std::span<const PlayerId> extra_players = {});

/// EPV of the region containing `pos` (0 in non-scoring regions).
double epv_at(const EpvMap& map, const CourtPoint& pos, const RegionPartition& partition);

class DefenseTable {
public:
    DefenseTable() = default;
    explicit DefenseTable(std::span<const DefenseRecord> records);

    std::optional<double> find(const PlayerId& player, const RegionId& region) const;
    const std::map<PlayerId, std::map<RegionId, double>>& entries() const noexcept { return table_; }

private:
    std::map<PlayerId, std::map<RegionId, double>> table_;
};

struct DiffLookup {
    double diff_percent = 0.0;
    bool has_data = false;
};

/// DIFF% of `defender` in the region containing `pos`; 0 with has_data=false when missing.
DiffLookup diff_at(const DefenseTable& table, const PlayerId& defender, const CourtPoint& pos,
                   const RegionPartition& partition);

/// Planar Euclidean distance in feet.
double dist(const CourtPoint& a, const CourtPoint& b) noexcept;

/// Mirrors a full-court position into the attacking-half frame.
/// `attacks_left`: the team shoots at the x=0 basket.
CourtPoint to_attacking_frame(const CourtPoint& p, bool attacks_left) noexcept;

/// epvmap.csv: player,region,attempts,makes,epv
void write_epv_maps(std::ostream& out, const std::map<PlayerId, EpvMap>& maps);
std::map<PlayerId, EpvMap> parse_epv_maps(std::istream& in, const std::string& source);

/// Shot chart of one player's EPV map as a standalone SVG (darker = higher EPV).
void write_epv_chart_svg(std::ostream& out, const EpvMap& map, const RegionPartition& partition,
                         std::span<const ShotRecord> shots);

}  // namespace courtside::ability

#include "courtside/ability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

namespace courtside::ability {

bool Polygon::contains(const CourtPoint& p) const {
    bool inside = false;
    const std::size_t n = vertices.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto& a = vertices[j];
        const auto& b = vertices[i];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

RegionPartition::RegionPartition(std::vector<Region> regions) : regions_(std::move(regions)) {
    if (regions_.empty()) throw ValidationError("region", "partition has no regions");
    std::set<RegionId> ids;
    for (const auto& r : regions_) {
        if (!ids.insert(r.id).second) throw ValidationError("region", "duplicate region '" + r.id + "'");
        if (r.point_value != 0 && r.point_value != 2 && r.point_value != 3) {
            throw ValidationError("point_value", "region '" + r.id + "' must be worth 0, 2 or 3");
        }
        if (r.polygons.empty()) throw ValidationError("polygon", "region '" + r.id + "' has no polygon");
        for (const auto& poly : r.polygons) {
            if (poly.vertices.size() < 3) {
                throw ValidationError("polygon", "region '" + r.id + "' has a polygon with fewer than 3 vertices");
            }
        }
    }
}

const Region& RegionPartition::region_at(const CourtPoint& p) const {
    for (const auto& r : regions_) {
        for (const auto& poly : r.polygons) {
            if (poly.contains(p)) return r;
        }
    }
    return regions_.back();
}

const Region* RegionPartition::find(const RegionId& id) const {
    for (const auto& r : regions_) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kThreePointRadius = 23.75;
constexpr double kRestrictedRadius = 4.0;
constexpr double kFar = 150.0;  // wedge radius reaching past every court point
constexpr double kArcStepDeg = 1.875;

Polygon rect(double x0, double y0, double x1, double y1) {
    return Polygon{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

/// Pie slice around the basket from angle a0 to a1 (degrees, atan2(dy, dx) convention).
Polygon wedge(double a0, double a1, double radius) {
    Polygon p;
    p.vertices.push_back(kBasket);
    const int steps = std::max(1, static_cast<int>(std::ceil((a1 - a0) / kArcStepDeg)));
    for (int i = 0; i <= steps; ++i) {
        const double a = (a0 + (a1 - a0) * i / steps) * kDeg;
        p.vertices.push_back({kBasket.x + radius * std::cos(a), kBasket.y + radius * std::sin(a)});
    }
    return p;
}

Polygon circle(double radius) {
    Polygon p;
    const int steps = static_cast<int>(360.0 / kArcStepDeg);
    for (int i = 0; i < steps; ++i) {
        const double a = i * kArcStepDeg * kDeg;
        p.vertices.push_back({kBasket.x + radius * std::cos(a), kBasket.y + radius * std::sin(a)});
    }
    return p;
}

}  // namespace

RegionPartition RegionPartition::standard() {
    // "Left" is the offense's left when facing the basket, i.e. y < 25.
    std::vector<Region> regions;
    regions.push_back({"backcourt", 0, {rect(kHalfCourt, -kFar, kFar, kFar)}});
    regions.push_back({"restricted_area", 2, {circle(kRestrictedRadius)}});
    regions.push_back({"paint", 2, {rect(-kFar, 17.0, 19.0, 33.0)}});
    regions.push_back({"corner3_left", 3, {rect(-kFar, -kFar, 14.0, 3.0)}});
    regions.push_back({"corner3_right", 3, {rect(-kFar, 47.0, 14.0, kFar)}});
    regions.push_back({"mid_left", 2, {wedge(-180.0, -67.5, kThreePointRadius)}});
    regions.push_back({"mid_left_center", 2, {wedge(-67.5, -22.5, kThreePointRadius)}});
    regions.push_back({"mid_center", 2, {wedge(-22.5, 22.5, kThreePointRadius)}});
    regions.push_back({"mid_right_center", 2, {wedge(22.5, 67.5, kThreePointRadius)}});
    regions.push_back({"mid_right", 2, {wedge(67.5, 180.0, kThreePointRadius)}});
    regions.push_back({"above_break3_left", 3, {wedge(-180.0, -22.5, kFar)}});
    regions.push_back({"above_break3_center", 3, {wedge(-22.5, 22.5, kFar)}});
    regions.push_back({"above_break3_right", 3, {wedge(22.5, 180.0, kFar)}});
    return RegionPartition(std::move(regions));
}

RegionPartition parse_partition(std::istream& in, const std::string& source) {
    std::vector<Region> regions;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) continue;
        const auto fields = text::split(text::trim(line), ',');
        if (fields.size() != 3) throw ParseError(source, line_no, "expected region,point_value,vertices");
        const std::string id(text::trim(fields[0]));
        long long value = 0;
        if (id.empty() || !text::parse_int(fields[1], value)) throw ParseError(source, line_no, "malformed region header");
        Polygon poly;
        for (const auto vertex : text::split(fields[2], ';')) {
            const auto xy = text::split(text::trim(vertex), ' ');
            CourtPoint p;
            if (xy.size() != 2 || !text::parse_double(xy[0], p.x) || !text::parse_double(xy[1], p.y)) {
                throw ParseError(source, line_no, "malformed vertex '" + std::string(vertex) + "'");
            }
            poly.vertices.push_back(p);
        }
        auto it = std::find_if(regions.begin(), regions.end(), [&](const Region& r) { return r.id == id; });
        if (it == regions.end()) {
            regions.push_back({id, static_cast<int>(value), {std::move(poly)}});
        } else {
            if (it->point_value != value) throw ParseError(source, line_no, "conflicting point value for " + id);
            it->polygons.push_back(std::move(poly));
        }
    }
    return RegionPartition(std::move(regions));
}

RegionPartition load_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("path", "cannot open '" + path + "'");
    return parse_partition(in, path);
}

void write_partition(std::ostream& out, const RegionPartition& partition) {
    for (const auto& r : partition.regions()) {
        for (const auto& poly : r.polygons) {
            out << r.id << ',' << r.point_value << ',';
            for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
                if (i) out << ';';
                out << text::format_double(poly.vertices[i].x) << ' ' << text::format_double(poly.vertices[i].y);
            }
            out << '\n';
        }
    }
}

LeagueAverages::LeagueAverages(std::span<const ShotRecord> all_shots, const RegionPartition& partition) {
    for (const auto& s : all_shots) {
        auto& [attempts, makes] = totals_[partition.region_at(s.position).id];
        ++attempts;
        if (s.made) ++makes;
    }
}

double LeagueAverages::epv(const Region& region) const {
    if (region.point_value == 0) return 0.0;
    const auto it = totals_.find(region.id);
    if (it == totals_.end() || it->second.first == 0) return kFallbackEpv;
    return static_cast<double>(it->second.second * region.point_value) / it->second.first;
}

namespace {

void check_shot(const ShotRecord& s, const PlayerId& player) {
    if (s.player != player) throw ValidationError("player", "shot of '" + s.player + "' passed for '" + player + "'");
    if (s.position.x < 0.0 || s.position.x > kCourtLength || s.position.y < 0.0 || s.position.y > kCourtWidth) {
        throw ValidationError("x_ft", "shot position outside the court");
    }
}

}  // namespace

EpvMap build_epv_map(const PlayerId& player, std::span<const ShotRecord> shots, const RegionPartition& partition,
                     const LeagueAverages& league) {
    EpvMap map;
    map.player = player;
    for (const auto& r : partition.regions()) map.regions[r.id] = {};
    for (const auto& s : shots) {
        check_shot(s, player);
        auto& entry = map.regions[partition.region_at(s.position).id];
        ++entry.attempts;
        if (s.made) ++entry.makes;
    }
    for (const auto& r : partition.regions()) {
        auto& entry = map.regions[r.id];
        if (entry.attempts > 0) {
            entry.epv = static_cast<double>(entry.makes * r.point_value) / entry.attempts;
        } else {
            entry.epv = league.epv(r);
            entry.is_default = true;
        }
    }
    return map;
}

std::map<PlayerId, EpvMap> build_epv_maps(std::span<const ShotRecord> all_shots, const RegionPartition& partition,
                                          std::span<const PlayerId> extra_players) {
    const LeagueAverages league(all_shots, partition);
    std::map<PlayerId, std::vector<ShotRecord>> by_player;
    for (const auto& s : all_shots) by_player[s.player].push_back(s);
    for (const auto& p : extra_players) by_player.try_emplace(p);
    std::map<PlayerId, EpvMap> maps;
    for (const auto& [player, shots] : by_player) maps.emplace(player, build_epv_map(player, shots, partition, league));
    return maps;
}

double epv_at(const EpvMap& map, const CourtPoint& pos, const RegionPartition& partition) {
    const auto& region = partition.region_at(pos);
    if (region.point_value == 0) return 0.0;
    const auto it = map.regions.find(region.id);
    return it == map.regions.end() ? 0.0 : it->second.epv;
}

DefenseTable::DefenseTable(std::span<const DefenseRecord> records) {
    for (const auto& r : records) table_[r.player][r.region] = r.diff_percent;
}

std::optional<double> DefenseTable::find(const PlayerId& player, const RegionId& region) const {
    const auto p = table_.find(player);
    if (p == table_.end()) return std::nullopt;
    const auto r = p->second.find(region);
    if (r == p->second.end()) return std::nullopt;
    return r->second;
}

DiffLookup diff_at(const DefenseTable& table, const PlayerId& defender, const CourtPoint& pos,
                   const RegionPartition& partition) {
    if (const auto v = table.find(defender, partition.region_at(pos).id)) return {*v, true};
    return {0.0, false};
}

double dist(const CourtPoint& a, const CourtPoint& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

CourtPoint to_attacking_frame(const CourtPoint& p, bool attacks_left) noexcept {
    if (attacks_left) return p;
    return {kCourtLength - p.x, kCourtWidth - p.y};
}

void write_epv_maps(std::ostream& out, const std::map<PlayerId, EpvMap>& maps) {
    for (const auto& [player, map] : maps) {
        for (const auto& [region, e] : map.regions) {
            out << player << ',' << region << ',' << e.attempts << ',' << e.makes << ',' << text::format_double(e.epv)
                << '\n';
        }
    }
}

std::map<PlayerId, EpvMap> parse_epv_maps(std::istream& in, const std::string& source) {
    std::map<PlayerId, EpvMap> maps;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::is_skippable(line)) continue;
        const auto f = text::split(text::trim(line), ',');
        if (f.size() != 5) throw ParseError(source, line_no, "expected player,region,attempts,makes,epv");
        long long attempts = 0, makes = 0;
        double epv = 0.0;
        if (!text::parse_int(f[2], attempts) || !text::parse_int(f[3], makes) || !text::parse_double(f[4], epv)) {
            throw ParseError(source, line_no, "malformed numbers");
        }
        if (makes < 0 || makes > attempts) throw ValidationError("makes", "must satisfy 0 <= makes <= attempts");
        if (epv < 0.0 || epv > 3.0) throw ValidationError("epv", "must lie in [0,3]");
        const PlayerId player(text::trim(f[0]));
        auto& map = maps[player];
        map.player = player;
        map.regions[std::string(text::trim(f[1]))] =
            EpvEntry{static_cast<int>(attempts), static_cast<int>(makes), epv, attempts == 0};
    }
    return maps;
}

void write_epv_chart_svg(std::ostream& out, const EpvMap& map, const RegionPartition& partition,
                         std::span<const ShotRecord> shots) {
    constexpr double kScale = 10.0;  // px per foot
    const double width = kCourtWidth * kScale;
    const double height = kHalfCourt * kScale;
    // Baseline at the top, half-court line at the bottom.
    auto px = [&](const CourtPoint& p) {
        const double x = std::clamp(p.y, 0.0, kCourtWidth) * kScale;
        const double y = std::clamp(p.x, 0.0, kHalfCourt) * kScale;
        return std::pair{x, y};
    };
    auto color = [](double epv) {
        // Sequential light-to-dark blue ramp.
        const double t = std::clamp(epv / 3.0, 0.0, 1.0);
        const int r = static_cast<int>(std::lround(239 - t * (239 - 8)));
        const int g = static_cast<int>(std::lround(243 - t * (243 - 48)));
        const int b = static_cast<int>(std::lround(255 - t * (255 - 107)));
        char buf[8];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
        return std::string(buf);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height + 40
        << "\" viewBox=\"0 0 " << width << ' ' << height + 40 << "\">\n";
    out << "<defs><clipPath id=\"court\"><rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
        << "\"/></clipPath></defs>\n";
    out << "<g clip-path=\"url(#court)\">\n";
    // Later regions are drawn first so earlier (higher-priority) regions paint over them.
    const auto& regions = partition.regions();
    for (auto it = regions.rbegin(); it != regions.rend(); ++it) {
        const auto e = map.regions.find(it->id);
        const double epv = it->point_value == 0 || e == map.regions.end() ? 0.0 : e->second.epv;
        for (const auto& poly : it->polygons) {
            out << "<polygon data-region=\"" << it->id << "\" fill=\"" << color(epv)
                << "\" stroke=\"#ffffff\" stroke-width=\"1\" points=\"";
            for (const auto& v : poly.vertices) {
                const double x = v.y * kScale;
                const double y = v.x * kScale;
                out << text::format_double(x) << ',' << text::format_double(y) << ' ';
            }
            out << "\"/>\n";
        }
    }
    out << "</g>\n";
    for (const auto& s : shots) {
        const auto [x, y] = px(s.position);
        out << "<circle cx=\"" << text::format_double(x) << "\" cy=\"" << text::format_double(y) << "\" r=\"3\" "
            << (s.made ? "fill=\"#e6550d\" stroke=\"none\"" : "fill=\"none\" stroke=\"#636363\"") << "/>\n";
    }
    out << "<text x=\"8\" y=\"" << height + 26 << "\" font-family=\"sans-serif\" font-size=\"16\">EPV map: "
        << map.player << " (darker = higher)</text>\n";
    out << "</svg>\n";
}

}  // namespace courtside::ability

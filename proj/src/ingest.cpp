#include "courtside/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "courtside/errors.hpp"
#include "courtside/text.hpp"

namespace courtside::ingest {
namespace {

using text::format_double;

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("path", "cannot open '" + path.string() + "'");
    return in;
}

/// Iterates non-skippable lines, tracking the 1-based line number for errors.
class LineReader {
public:
    LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!text::is_skippable(line)) return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_no_, what); }
    [[noreturn]] void invalid(const std::string& field, const std::string& what) const {
        throw ValidationError(field, source_ + ":" + std::to_string(line_no_) + ": " + what);
    }

    std::vector<std::string_view> fields(const std::string& line, std::size_t min_count, std::size_t max_count) const {
        auto parts = text::split(line, ',');
        if (parts.size() < min_count || parts.size() > max_count) {
            fail("expected " + std::to_string(min_count) +
                 (min_count == max_count ? "" : "-" + std::to_string(max_count)) + " fields, got " +
                 std::to_string(parts.size()));
        }
        for (auto& p : parts) p = text::trim(p);
        return parts;
    }

    double number(std::string_view s, const char* field) const {
        double v = 0.0;
        if (!text::parse_double(s, v)) fail(std::string("malformed number in ") + field + ": '" + std::string(s) + "'");
        return v;
    }

    long long integer(std::string_view s, const char* field) const {
        long long v = 0;
        if (!text::parse_int(s, v)) fail(std::string("malformed integer in ") + field + ": '" + std::string(s) + "'");
        return v;
    }

    FrameIndex frame(std::string_view s) const {
        const auto f = integer(s, "frame");
        if (f < 0) invalid("frame", "negative frame index");
        return f;
    }

    std::string id(std::string_view s, const char* field) const {
        if (s.empty()) invalid(field, "empty id");
        for (char c : s) {
            if (c == ' ' || c == '\t' || c == ';') invalid(field, "id contains whitespace or ';'");
        }
        return std::string(s);
    }

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_no_ = 0;
};

bool within_court(const CourtPoint& p, double margin) {
    return p.x >= -margin && p.x <= kCourtLength + margin && p.y >= -margin && p.y <= kCourtWidth + margin;
}

}  // namespace

std::vector<Detection> parse_detections(std::istream& in, const std::string& source, const Roster* roster) {
    LineReader reader(in, source);
    std::vector<Detection> out;
    std::string line;
    while (reader.next(line)) {
        const auto f = reader.fields(line, 7, 7);
        Detection d;
        d.frame = reader.frame(f[0]);
        d.identity = reader.id(f[1], "identity");
        d.box = {reader.number(f[2], "x"), reader.number(f[3], "y"), reader.number(f[4], "w"), reader.number(f[5], "h")};
        d.confidence = reader.number(f[6], "confidence");
        if (d.identity == kBallEntity) reader.invalid("identity", "BALL is not a player id");
        if (!(d.box.w > 0.0)) reader.invalid("w", "width must be positive");
        if (!(d.box.h > 0.0)) reader.invalid("h", "height must be positive");
        if (d.confidence < 0.0 || d.confidence > 1.0) reader.invalid("confidence", "must lie in [0,1]");
        if (roster && !roster->contains(d.identity)) reader.invalid("identity", "'" + d.identity + "' not on roster");
        out.push_back(std::move(d));
    }
    std::stable_sort(out.begin(), out.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.frame, a.identity) < std::tie(b.frame, b.identity);
    });
    return out;
}

std::vector<CourtSample> parse_tracking(std::istream& in, const std::string& source, CourtBounds bounds) {
    LineReader reader(in, source);
    std::vector<CourtSample> out;
    std::set<std::pair<FrameIndex, std::string>> seen;
    std::string line;
    while (reader.next(line)) {
        const auto f = reader.fields(line, 4, 5);
        CourtSample s;
        s.frame = reader.frame(f[0]);
        s.entity = reader.id(f[1], "entity");
        s.position = {reader.number(f[2], "x_ft"), reader.number(f[3], "y_ft")};
        if (f.size() == 5) {
            if (!s.is_ball()) reader.invalid("z_ft", "height is only carried for the ball");
            s.height = reader.number(f[4], "z_ft");
        }
        if (!within_court(s.position, bounds.margin_ft)) reader.invalid("x_ft", "position outside court bounds");
        if (!seen.emplace(s.frame, s.entity).second) reader.invalid("entity", "duplicate sample for frame");
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const CourtSample& a, const CourtSample& b) {
        return std::tie(a.frame, a.entity) < std::tie(b.frame, b.entity);
    });
    return out;
}

std::vector<SegmentationMask> parse_masks(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<SegmentationMask> out;
    std::set<FrameIndex> seen;
    std::string line;
    while (reader.next(line)) {
        std::istringstream header(line);
        std::string a, b, c, extra;
        if (!(header >> a >> b >> c) || (header >> extra)) reader.fail("expected mask header 'frame width height'");
        SegmentationMask m;
        m.frame = reader.frame(a);
        const auto w = reader.integer(b, "width");
        const auto h = reader.integer(c, "height");
        if (w <= 0 || h <= 0) reader.invalid("width", "mask dimensions must be positive");
        m.width = static_cast<int>(w);
        m.height = static_cast<int>(h);
        if (!reader.next(line)) reader.fail("mask header without run-length line");
        std::istringstream runs(line);
        std::string token;
        std::uint64_t total = 0;
        while (runs >> token) {
            const auto r = reader.integer(token, "runs");
            if (r < 0) reader.invalid("runs", "negative run length");
            m.runs.push_back(static_cast<std::uint32_t>(r));
            total += static_cast<std::uint64_t>(r);
        }
        const auto expected = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
        if (total != expected) {
            reader.invalid("runs", "run lengths sum to " + std::to_string(total) + ", expected " +
                                       std::to_string(expected));
        }
        if (!seen.insert(m.frame).second) reader.invalid("frame", "duplicate mask for frame");
        out.push_back(std::move(m));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const SegmentationMask& a, const SegmentationMask& b) { return a.frame < b.frame; });
    return out;
}

std::vector<ShotRecord> parse_shots(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<ShotRecord> out;
    std::string line;
    while (reader.next(line)) {
        const auto f = reader.fields(line, 5, 5);
        ShotRecord s;
        s.player = reader.id(f[0], "player");
        s.position = {reader.number(f[1], "x_ft"), reader.number(f[2], "y_ft")};
        const auto made = reader.integer(f[3], "made");
        const auto points = reader.integer(f[4], "points");
        if (made != 0 && made != 1) reader.invalid("made", "must be 0 or 1");
        if (points != 2 && points != 3) reader.invalid("points", "point value must be 2 or 3");
        if (!within_court(s.position, 0.0)) reader.invalid("x_ft", "shot position outside court");
        s.made = made == 1;
        s.points = static_cast<int>(points);
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ShotRecord& a, const ShotRecord& b) { return a.player < b.player; });
    return out;
}

std::vector<DefenseRecord> parse_defense(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<DefenseRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    while (reader.next(line)) {
        const auto f = reader.fields(line, 3, 3);
        DefenseRecord r;
        r.player = reader.id(f[0], "player");
        r.region = reader.id(f[1], "region");
        r.diff_percent = reader.number(f[2], "diff_percent");
        if (r.diff_percent < -100.0 || r.diff_percent > 100.0) reader.invalid("diff_percent", "must lie in [-100,100]");
        if (!seen.emplace(r.player, r.region).second) reader.invalid("region", "duplicate (player, region)");
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const DefenseRecord& a, const DefenseRecord& b) {
        return std::tie(a.player, a.region) < std::tie(b.player, b.region);
    });
    return out;
}

Roster parse_roster(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::vector<RosterEntry> entries;
    std::set<std::string> seen;
    std::string line;
    while (reader.next(line)) {
        const auto f = reader.fields(line, 4, 4);
        RosterEntry e;
        e.player = reader.id(f[0], "player");
        if (e.player == kBallEntity) reader.invalid("player", "BALL is reserved");
        e.name = std::string(f[1]);
        if (e.name.empty()) reader.invalid("name", "empty name");
        e.team = reader.id(f[2], "team");
        const auto role = star_role_from_string(f[3]);
        if (!role) reader.invalid("role", "expected none|shooter|defender");
        e.role = *role;
        if (!seen.insert(e.player).second) reader.invalid("player", "duplicate roster id '" + e.player + "'");
        entries.push_back(std::move(e));
    }
    return Roster(std::move(entries));
}

std::vector<PoseKeypoints> parse_keypoints(std::istream& in, const std::string& source) {
    LineReader reader(in, source);
    std::map<std::pair<FrameIndex, PlayerId>, PoseKeypoints> grouped;
    std::string line;
    while (reader.next(line)) {
        const auto f = reader.fields(line, 6, 6);
        const auto frame = reader.frame(f[0]);
        auto player = reader.id(f[1], "player");
        Keypoint k;
        k.joint = reader.id(f[2], "joint");
        k.point = {reader.number(f[3], "x"), reader.number(f[4], "y")};
        k.confidence = reader.number(f[5], "confidence");
        if (k.confidence < 0.0 || k.confidence > 1.0) reader.invalid("confidence", "must lie in [0,1]");
        auto& entry = grouped[{frame, player}];
        entry.frame = frame;
        entry.player = std::move(player);
        if (entry.joint(k.joint)) reader.invalid("joint", "duplicate joint '" + k.joint + "'");
        entry.joints.push_back(std::move(k));
    }
    std::vector<PoseKeypoints> out;
    out.reserve(grouped.size());
    for (auto& [key, kp] : grouped) {
        std::sort(kp.joints.begin(), kp.joints.end(),
                  [](const Keypoint& a, const Keypoint& b) { return a.joint < b.joint; });
        out.push_back(std::move(kp));
    }
    return out;
}

std::vector<Detection> load_detections(const std::filesystem::path& path, const Roster* roster) {
    auto in = open_input(path);
    return parse_detections(in, path.string(), roster);
}

std::vector<CourtSample> load_tracking(const std::filesystem::path& path, CourtBounds bounds) {
    auto in = open_input(path);
    return parse_tracking(in, path.string(), bounds);
}

std::vector<SegmentationMask> load_masks(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_masks(in, path.string());
}

std::vector<ShotRecord> load_shots(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_shots(in, path.string());
}

std::vector<DefenseRecord> load_defense(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_defense(in, path.string());
}

Roster load_roster(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_roster(in, path.string());
}

std::vector<PoseKeypoints> load_keypoints(const std::filesystem::path& path) {
    auto in = open_input(path);
    return parse_keypoints(in, path.string());
}

void write_detections(std::ostream& out, const std::vector<Detection>& detections) {
    for (const auto& d : detections) {
        out << d.frame << ',' << d.identity << ',' << format_double(d.box.x) << ',' << format_double(d.box.y) << ','
            << format_double(d.box.w) << ',' << format_double(d.box.h) << ',' << format_double(d.confidence) << '\n';
    }
}

void write_tracking(std::ostream& out, const std::vector<CourtSample>& samples) {
    for (const auto& s : samples) {
        out << s.frame << ',' << s.entity << ',' << format_double(s.position.x) << ',' << format_double(s.position.y);
        if (s.height) out << ',' << format_double(*s.height);
        out << '\n';
    }
}

void write_masks(std::ostream& out, const std::vector<SegmentationMask>& masks) {
    for (const auto& m : masks) {
        out << m.frame << ' ' << m.width << ' ' << m.height << '\n';
        for (std::size_t i = 0; i < m.runs.size(); ++i) {
            if (i) out << ' ';
            out << m.runs[i];
        }
        out << '\n';
    }
}

void write_shots(std::ostream& out, const std::vector<ShotRecord>& shots) {
    for (const auto& s : shots) {
        out << s.player << ',' << format_double(s.position.x) << ',' << format_double(s.position.y) << ','
            << (s.made ? 1 : 0) << ',' << s.points << '\n';
    }
}

void write_defense(std::ostream& out, const std::vector<DefenseRecord>& records) {
    for (const auto& r : records) {
        out << r.player << ',' << r.region << ',' << format_double(r.diff_percent) << '\n';
    }
}

void write_roster(std::ostream& out, const Roster& roster) {
    for (const auto& e : roster.entries()) {
        out << e.player << ',' << e.name << ',' << e.team << ',' << to_string(e.role) << '\n';
    }
}

void write_keypoints(std::ostream& out, const std::vector<PoseKeypoints>& keypoints) {
    for (const auto& kp : keypoints) {
        for (const auto& j : kp.joints) {
            out << kp.frame << ',' << kp.player << ',' << j.joint << ',' << format_double(j.point.x) << ','
                << format_double(j.point.y) << ',' << format_double(j.confidence) << '\n';
        }
    }
}

SegmentationMask encode_mask(FrameIndex frame, int width, int height, const std::vector<std::uint8_t>& pixels) {
    SegmentationMask m{frame, width, height, {}};
    std::uint8_t current = 0;
    std::uint32_t run = 0;
    for (const auto p : pixels) {
        const std::uint8_t v = p ? 1 : 0;
        if (v != current) {
            m.runs.push_back(run);
            run = 0;
            current = v;
        }
        ++run;
    }
    m.runs.push_back(run);
    return m;
}

}  // namespace courtside::ingest

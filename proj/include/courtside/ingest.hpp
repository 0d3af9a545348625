#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "courtside/types.hpp"

// Loaders for every external input stream. Each loader either returns a fully
// validated, sorted sequence or throws (ParseError / ValidationError); nothing
// partially loaded escapes. The serializers write the canonical form: no header,
// sorted records, shortest round-trip number formatting.

namespace courtside::ingest {

/// Slack around the court rectangle accepted for tracking samples (players step out of bounds).
struct CourtBounds {
    double margin_ft = 6.0;
};

/// Sorted by (frame, identity). When `roster` is given, identities must be on it.
std::vector<Detection> load_detections(const std::filesystem::path& path, const Roster* roster = nullptr);
/// Sorted by (frame, entity).
std::vector<CourtSample> load_tracking(const std::filesystem::path& path, CourtBounds bounds = {});
/// Sorted by frame; run totals are checked against width*height.
std::vector<SegmentationMask> load_masks(const std::filesystem::path& path);
std::vector<ShotRecord> load_shots(const std::filesystem::path& path);
std::vector<DefenseRecord> load_defense(const std::filesystem::path& path);
Roster load_roster(const std::filesystem::path& path);
/// One PoseKeypoints per (frame, player), joints sorted by name.
std::vector<PoseKeypoints> load_keypoints(const std::filesystem::path& path);

// Stream parsers behind the loaders; `source` names the input in error messages.
std::vector<Detection> parse_detections(std::istream& in, const std::string& source, const Roster* roster = nullptr);
std::vector<CourtSample> parse_tracking(std::istream& in, const std::string& source, CourtBounds bounds = {});
std::vector<SegmentationMask> parse_masks(std::istream& in, const std::string& source);
std::vector<ShotRecord> parse_shots(std::istream& in, const std::string& source);
std::vector<DefenseRecord> parse_defense(std::istream& in, const std::string& source);
Roster parse_roster(std::istream& in, const std::string& source);
std::vector<PoseKeypoints> parse_keypoints(std::istream& in, const std::string& source);

void write_detections(std::ostream& out, const std::vector<Detection>& detections);
void write_tracking(std::ostream& out, const std::vector<CourtSample>& samples);
void write_masks(std::ostream& out, const std::vector<SegmentationMask>& masks);
void write_shots(std::ostream& out, const std::vector<ShotRecord>& shots);
void write_defense(std::ostream& out, const std::vector<DefenseRecord>& records);
void write_roster(std::ostream& out, const Roster& roster);
void write_keypoints(std::ostream& out, const std::vector<PoseKeypoints>& keypoints);

/// Encodes a row-major 0/1 bitmap as a mask.
SegmentationMask encode_mask(FrameIndex frame, int width, int height, const std::vector<std::uint8_t>& pixels);

}  // namespace courtside::ingest

#pragma once

#include <string>
#include <string_view>
#include <vector>

// Small helpers shared by the line-oriented readers and writers.

namespace courtside::text {

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Parses a finite double; nullopt-like failure is reported through the bool.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

/// Shortest representation that round-trips exactly ("10.5", "20", "0.1").
std::string format_double(double value);

/// True when the line is blank or a `#` comment.
bool is_skippable(std::string_view line);

std::string join(const std::vector<std::string>& parts, char sep);

}  // namespace courtside::text

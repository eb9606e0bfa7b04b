#pragma once

#include <string>
#include <string_view>

namespace ikd {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Parses a full field as a double; returns false on trailing garbage or empty input.
bool parse_double(std::string_view text, double& out);

}  // namespace ikd

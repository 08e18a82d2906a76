#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ftdf::text {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

/// Whole-field parse, surrounding blanks allowed. Accepts "nan"/"inf".
std::optional<double> parse_double(std::string_view field);
std::optional<long long> parse_int(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char delimiter);
std::string_view trim(std::string_view s);

}  // namespace ftdf::text

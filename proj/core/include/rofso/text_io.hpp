#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rofso {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Strict parse of a whole token; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);
long long parse_integer(std::string_view text);

/// Splits on commas and trims surrounding blanks from each field.
std::vector<std::string> split_list(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace rofso

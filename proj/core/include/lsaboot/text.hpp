#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lsaboot {

/// Shortest decimal that round-trips to the same IEEE-754 double.
std::string format_double(double value);

double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);
std::uint64_t parse_uint(std::string_view text);

std::string_view trim(std::string_view text);
/// Splits on `sep`, trimming each piece; empty pieces are dropped.
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace lsaboot

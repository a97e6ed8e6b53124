#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tdefumi::text {

// Shortest-exact text for a double (17 significant digits, round-trips bit-exactly).
std::string fmt(double v);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Strict numeric parsing; throws FormatError naming `what` on failure.
double to_double(std::string_view s, const std::string& what = "number", long line = -1);
long long to_int(std::string_view s, const std::string& what = "integer", long line = -1);
std::uint64_t to_uint64(std::string_view s, const std::string& what = "integer", long line = -1);

}  // namespace tdefumi::text

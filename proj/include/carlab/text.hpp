#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace carlab {

// Locale-independent double formatting via std::to_chars.
// 17 significant digits round-trip any double exactly.
std::string format_g17(double x);

// Shortest representation that still round-trips ("1", "0.1", "10").
std::string format_compact(double x);

// Fixed one-decimal formatting ("57.0", "36.7").
std::string format_fixed1(double x);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);
std::optional<unsigned long long> parse_uint(std::string_view s);

std::vector<std::string> split(std::string_view s, char delim);
std::string_view trim(std::string_view s);

}  // namespace carlab

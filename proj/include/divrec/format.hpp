#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace divrec {

/// Ten significant digits; "inf" / "nan" for non-finite values. All CSV output
/// goes through this so golden files stay stable.
std::string format_double(double x);

std::string join(std::span<const double> xs, char sep);
std::string join(std::span<const int> xs, char sep);

double parse_double(std::string_view text);
std::vector<double> parse_double_list(std::string_view text, char sep = ',');
std::vector<int> parse_int_list(std::string_view text, char sep = ',');

/// FNV-1a; stable across platforms, used for cache keys and memo keys.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace divrec

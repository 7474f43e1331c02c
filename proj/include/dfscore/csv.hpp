#pragma once

#include <string>

namespace dfscore {

/// Shortest decimal string that round-trips to the same double. Always uses
/// '.' as the decimal point regardless of the global locale.
std::string format_double(double value);

/// Locale-independent inverse of format_double. Throws std::invalid_argument
/// if the whole string is not a number.
double parse_double(const std::string& text);

}  // namespace dfscore

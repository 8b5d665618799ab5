#pragma once

#include <string>
#include <string_view>

namespace syncstab {

/// 12 significant digits, '.' separator regardless of locale.
std::string fmt12(double value);

/// Shortest text that parses back to the same double.
std::string fmt_roundtrip(double value);

/// Value rounded to 12 significant digits (for structured output).
double round12(double value);

/// Locale-independent parse of the whole string; false on any trailing junk.
bool parse_double(std::string_view text, double& out);

}  // namespace syncstab

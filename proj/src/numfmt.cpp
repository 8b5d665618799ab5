#include "syncstab/numfmt.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace syncstab {

std::string fmt12(double value) {
    if (value == 0.0) return "0";  // also folds -0
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                   std::chars_format::general, 12);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

std::string fmt_roundtrip(double value) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf.data(), end);
}

double round12(double value) {
    if (!std::isfinite(value)) return value;
    double out = 0.0;
    parse_double(fmt12(value), out);
    return out;
}

bool parse_double(std::string_view text, double& out) {
    if (text.empty()) return false;
    if (text.front() == '+') text.remove_prefix(1);
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace syncstab

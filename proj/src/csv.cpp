#include "netrepair/csv.hpp"

#include <charconv>
#include <cmath>

namespace netrepair {

namespace {

std::string special(double value) {
    if (std::isnan(value)) return "nan";
    return value > 0 ? "inf" : "-inf";
}

}  // namespace

std::string format_number(double value) {
    if (!std::isfinite(value)) return special(value);
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int digits) {
    if (!std::isfinite(value)) return special(value);
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, digits);
    return std::string(buf, res.ptr);
}

}  // namespace netrepair

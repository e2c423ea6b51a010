#pragma once

#include <string>

namespace netrepair {

/// Shortest round-trip decimal for finite values, "nan"/"inf"/"-inf"
/// otherwise. Output does not depend on the locale.
std::string format_number(double value);

/// Fixed-point with `digits` decimals (for human-readable tables).
std::string format_fixed(double value, int digits);

}  // namespace netrepair

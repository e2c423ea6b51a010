#pragma once

#include <array>
#include <string>
#include <vector>

#include "netrepair/instance.hpp"

namespace netrepair {

/// Optimal actions for Example 1 (1-based machine labels), indexed
/// [repairer at machine][x_1][x_2].
using Table2 = std::array<std::array<std::array<int, 3>, 3>, 2>;
const Table2& table2_expected();

struct AppendixDCase {
    std::string label;
    double g_index;
    double g_star;
};
/// The five published (g_IND, g*) pairs in appendix_d_instances() order.
const std::vector<AppendixDCase>& appendix_d_expected();

struct GoldenResult {
    std::string name;
    bool passed = false;
    std::string report;  // side-by-side expected and computed values
    double seconds = 0.0;
};

/// Policy iteration on Example 1 must reproduce all 18 table entries.
GoldenResult verify_table2();
/// Index-policy and optimal average costs of the five cases within `tol`.
GoldenResult verify_appendix_d(double tol = 0.01);
std::vector<GoldenResult> verify_all();

}  // namespace netrepair

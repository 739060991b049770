#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace jitchrono {

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Sizes of every group of tied values (groups of size 1 included).
std::vector<std::size_t> tie_group_sizes(std::span<const double> values);

/// Sum over tie groups of t^3 - t.
double tie_correction_sum(std::span<const double> values);

}  // namespace jitchrono

#include "jitchrono/ranks.hpp"

#include <algorithm>
#include <numeric>

namespace jitchrono {

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        // positions i..j-1 hold ranks i+1..j
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
        i = j;
    }
    return ranks;
}

std::vector<std::size_t> tie_group_sizes(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i + 1;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        sizes.push_back(j - i);
        i = j;
    }
    return sizes;
}

double tie_correction_sum(std::span<const double> values) {
    double total = 0.0;
    for (std::size_t t : tie_group_sizes(values)) {
        const double tt = static_cast<double>(t);
        total += tt * tt * tt - tt;
    }
    return total;
}

}  // namespace jitchrono

#include "jitchrono/metrics.hpp"

#include "jitchrono/error.hpp"
#include "jitchrono/ranks.hpp"

#include <algorithm>
#include <cmath>

namespace jitchrono {

namespace {

void check_inputs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
    if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "empty prediction set");
    for (double s : scores)
        if (!std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "non-finite score");
}

}  // namespace

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_inputs(scores, labels);
    const auto n_pos = static_cast<double>(std::count_if(labels.begin(), labels.end(), [](auto l) { return l != 0; }));
    const double n_neg = static_cast<double>(labels.size()) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) throw Error(ErrorCode::SingleClass, "auc needs both positive and negative labels");
    const auto ranks = average_ranks(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i)
        if (labels[i]) rank_sum += ranks[i];
    // Mann-Whitney U of the positives over the negatives.
    const double u = rank_sum - n_pos * (n_pos + 1.0) / 2.0;
    return u / (n_pos * n_neg);
}

double brier(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    check_inputs(scores, labels);
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double d = (labels[i] ? 1.0 : 0.0) - scores[i];
        total += d * d;
    }
    return total / static_cast<double>(scores.size());
}

}  // namespace jitchrono

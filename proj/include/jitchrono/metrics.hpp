#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace jitchrono {

/// Predicted probabilities paired with observed 0/1 outcomes.
struct PredictionSet {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
};

/// Probability that a random positive outranks a random negative, ties counted
/// one half. Throws SingleClass unless both labels occur.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);
inline double auc(const PredictionSet& p) { return auc(p.scores, p.labels); }

/// Mean squared difference between score and outcome.
double brier(std::span<const double> scores, std::span<const std::uint8_t> labels);
inline double brier(const PredictionSet& p) { return brier(p.scores, p.labels); }

}  // namespace jitchrono

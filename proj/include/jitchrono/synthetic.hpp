#pragma once

#include "jitchrono/ingest.hpp"

#include <array>
#include <cstdint>
#include <string>

namespace jitchrono {

enum class DriftKind { Stationary, CoefficientDrift };

/// Desk-scale change dataset with a known logistic defect process.
struct SyntheticSpec {
    int n_periods = 8;
    int rows_per_period = 1000;
    DriftKind drift = DriftKind::Stationary;
    /// Features the coefficient peak moves per period (CoefficientDrift only).
    double drift_rate = 0.0;
    double base_defect_rate = 0.2;
    /// Number of the fourteen metrics (taken from the end of the canonical
    /// order) that never carry signal.
    int noise_features = 4;
    /// Total logit scale of the informative coefficients.
    double signal = 1.6;
    int window_months = 6;
    Timestamp start = 988675200;  // 2001-05-01T00:00:00Z
    std::string name = "synthetic";

    /// Throws InvalidArgument on out-of-range fields.
    void validate() const;
};

/// Ground-truth logit coefficients, over the canonical metric order, for
/// period index t (0-based).
std::array<double, kMetricCount> synthetic_coefficients(const SyntheticSpec& spec, int t);

/// Record timestamps are laid out so that stratify(dataset, spec.window_months)
/// yields exactly spec.n_periods periods of rows_per_period rows each.
Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace jitchrono

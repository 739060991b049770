#pragma once

#include "jitchrono/ingest.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jitchrono {

/// Dense row-major design matrix with binary labels. `origin` tracks, for every
/// row, the index of the record it came from, so row provenance survives
/// subsetting and resampling.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::vector<std::string> feature_names, std::vector<double> values, std::vector<std::uint8_t> labels,
                  std::vector<std::size_t> origin = {});

    /// All fourteen metrics; origin[k] = first_origin + k.
    static FeatureMatrix from_records(std::span<const ChangeRecord> records, std::size_t first_origin = 0);

    std::size_t rows() const noexcept { return labels_.size(); }
    std::size_t cols() const noexcept { return names_.size(); }
    const std::vector<std::string>& feature_names() const noexcept { return names_; }

    double at(std::size_t row, std::size_t col) const { return values_[row * names_.size() + col]; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * names_.size(), names_.size()}; }
    std::vector<double> column(std::size_t col) const;
    bool label(std::size_t row) const { return labels_[row] != 0; }
    std::span<const std::uint8_t> labels() const noexcept { return labels_; }
    std::span<const std::size_t> origin() const noexcept { return origin_; }
    std::span<const double> values() const noexcept { return values_; }

    std::size_t positives() const noexcept;
    std::size_t negatives() const noexcept { return rows() - positives(); }

    /// Column subset in the given order; throws InvalidArgument for unknown names.
    FeatureMatrix select_features(std::span<const std::string> names) const;
    FeatureMatrix select_rows(std::span<const std::size_t> rows) const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

private:
    std::vector<std::string> names_;
    std::vector<double> values_;
    std::vector<std::uint8_t> labels_;
    std::vector<std::size_t> origin_;
};

/// Spearman rank correlation (Pearson correlation of average ranks).
/// Throws DegenerateInput if either sequence is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct DroppedFeature {
    std::string name;
    std::string kept;
    double rho = 0.0;
};

struct FilterReport {
    double threshold = 0.7;
    std::uint64_t seed = 0;
    std::vector<std::string> retained;  // original column order
    std::vector<DroppedFeature> dropped;
    std::vector<std::string> constant;  // removed before the pairwise pass
    std::vector<std::string> warnings;
};

/// Visits feature pairs in lexicographic name order and, whenever both members
/// of a pair with |rho| >= threshold are still retained, drops one chosen by a
/// seeded coin.
FilterReport correlation_filter(const FeatureMatrix& m, double threshold, std::uint64_t seed);

/// Keeps the minority class whole and samples the majority down to the same
/// count without replacement; rows are shuffled by `seed`.
FeatureMatrix undersample(const FeatureMatrix& m, std::uint64_t seed);

}  // namespace jitchrono

#include "jitchrono/preprocess.hpp"

#include "jitchrono/error.hpp"
#include "jitchrono/random.hpp"
#include "jitchrono/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jitchrono {

FeatureMatrix::FeatureMatrix(std::vector<std::string> feature_names, std::vector<double> values,
                             std::vector<std::uint8_t> labels, std::vector<std::size_t> origin)
    : names_(std::move(feature_names)), values_(std::move(values)), labels_(std::move(labels)),
      origin_(std::move(origin)) {
    if (values_.size() != names_.size() * labels_.size())
        throw Error(ErrorCode::DimensionMismatch, "value count does not match rows x cols");
    if (origin_.empty()) {
        origin_.resize(labels_.size());
        std::iota(origin_.begin(), origin_.end(), std::size_t{0});
    } else if (origin_.size() != labels_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "origin length does not match row count");
    }
}

FeatureMatrix FeatureMatrix::from_records(std::span<const ChangeRecord> records, std::size_t first_origin) {
    const auto& names = metric_names();
    std::vector<double> values;
    values.reserve(records.size() * kMetricCount);
    std::vector<std::uint8_t> labels;
    labels.reserve(records.size());
    std::vector<std::size_t> origin(records.size());
    for (std::size_t k = 0; k < records.size(); ++k) {
        values.insert(values.end(), records[k].metrics.begin(), records[k].metrics.end());
        labels.push_back(records[k].defective ? 1 : 0);
        origin[k] = first_origin + k;
    }
    return FeatureMatrix({names.begin(), names.end()}, std::move(values), std::move(labels), std::move(origin));
}

std::vector<double> FeatureMatrix::column(std::size_t col) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, col);
    return out;
}

std::size_t FeatureMatrix::positives() const noexcept {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), std::uint8_t{1}));
}

FeatureMatrix FeatureMatrix::select_features(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) {
        const auto it = std::find(names_.begin(), names_.end(), n);
        if (it == names_.end()) throw Error(ErrorCode::InvalidArgument, "unknown feature '" + n + "'");
        idx.push_back(static_cast<std::size_t>(it - names_.begin()));
    }
    std::vector<double> values;
    values.reserve(rows() * idx.size());
    for (std::size_t r = 0; r < rows(); ++r)
        for (std::size_t c : idx) values.push_back(at(r, c));
    return FeatureMatrix({names.begin(), names.end()}, std::move(values), labels_, origin_);
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows_wanted) const {
    std::vector<double> values;
    values.reserve(rows_wanted.size() * cols());
    std::vector<std::uint8_t> labels;
    labels.reserve(rows_wanted.size());
    std::vector<std::size_t> origin;
    origin.reserve(rows_wanted.size());
    for (std::size_t r : rows_wanted) {
        if (r >= rows()) throw Error(ErrorCode::InvalidArgument, "row index out of range");
        const auto src = row(r);
        values.insert(values.end(), src.begin(), src.end());
        labels.push_back(labels_[r]);
        origin.push_back(origin_[r]);
    }
    return FeatureMatrix(names_, std::move(values), std::move(labels), std::move(origin));
}

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "spearman: sequences differ in length");
    if (x.size() < 2) throw Error(ErrorCode::InvalidArgument, "spearman: need at least two observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mean = (n + 1.0) / 2.0;  // average ranks always sum to n(n+1)/2
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::DegenerateInput, "spearman: constant sequence");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

FilterReport correlation_filter(const FeatureMatrix& m, double threshold, std::uint64_t seed) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "correlation threshold must lie in (0, 1]");
    FilterReport report;
    report.threshold = threshold;
    report.seed = seed;

    const auto& names = m.feature_names();
    const std::size_t p = names.size();
    std::vector<std::vector<double>> columns(p);
    std::vector<bool> retained(p, true);
    for (std::size_t c = 0; c < p; ++c) {
        columns[c] = m.column(c);
        const bool constant = std::all_of(columns[c].begin(), columns[c].end(),
                                          [&](double v) { return v == columns[c].front(); });
        if (constant) {
            retained[c] = false;
            report.constant.push_back(names[c]);
            report.warnings.push_back("constant feature '" + names[c] + "' dropped");
        }
    }

    // Pairs in lexicographic order of (smaller name, larger name).
    std::vector<std::size_t> by_name(p);
    std::iota(by_name.begin(), by_name.end(), std::size_t{0});
    std::sort(by_name.begin(), by_name.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });

    Rng coin(derive_seed(seed, "correlation-filter"));
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) {
            const std::size_t first = by_name[a];
            const std::size_t second = by_name[b];
            if (!retained[first] || !retained[second]) continue;
            double rho = 0.0;
            try {
                rho = spearman(columns[first], columns[second]);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::DegenerateInput) throw;
                report.warnings.push_back("rho undefined for (" + names[first] + ", " + names[second] + "), treated as 0");
                continue;
            }
            if (std::abs(rho) < threshold) continue;
            const bool drop_first = coin.coin();
            const std::size_t drop = drop_first ? first : second;
            const std::size_t keep = drop_first ? second : first;
            retained[drop] = false;
            report.dropped.push_back({names[drop], names[keep], rho});
        }
    }
    for (std::size_t c = 0; c < p; ++c)
        if (retained[c]) report.retained.push_back(names[c]);
    return report;
}

FeatureMatrix undersample(const FeatureMatrix& m, std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < m.rows(); ++r) (m.label(r) ? pos : neg).push_back(r);
    if (pos.empty() || neg.empty()) throw Error(ErrorCode::SingleClass, "undersample: only one class present");

    auto& minority = pos.size() <= neg.size() ? pos : neg;
    auto& majority = pos.size() <= neg.size() ? neg : pos;
    Rng rng(derive_seed(seed, "undersample"));
    const auto picked = rng.sample_indices(majority.size(), minority.size());

    std::vector<std::size_t> rows(minority);
    for (std::size_t k : picked) rows.push_back(majority[k]);
    rng.shuffle(rows);
    return m.select_rows(rows);
}

}  // namespace jitchrono

#include "jitchrono/synthetic.hpp"

#include "jitchrono/error.hpp"
#include "jitchrono/random.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

namespace jitchrono {

namespace {

constexpr double kFixRate = 0.3;

// Maps a standard-normal latent value to a plausible metric value. Every map is
// strictly increasing, so the latent ordering (which drives the labels) survives.
double metric_from_latent(Metric m, double z) {
    switch (m) {
    case Metric::la: return std::exp(2.5 + 1.3 * z);
    case Metric::ld: return std::exp(1.8 + 1.4 * z);
    case Metric::lt: return std::exp(5.0 + 1.2 * z);
    case Metric::ns: return std::exp(0.4 * z);
    case Metric::nd: return std::exp(0.6 + 0.5 * z);
    case Metric::nf: return std::exp(1.0 + 0.7 * z);
    case Metric::entropy: return 4.0 / (1.0 + std::exp(-z));
    case Metric::nuc: return std::exp(1.5 + 0.9 * z);
    case Metric::ndev: return std::exp(1.2 + 0.8 * z);
    case Metric::age: return std::exp(3.0 + 1.5 * z);
    case Metric::exp: return std::exp(5.0 + 1.5 * z);
    case Metric::rexp: return std::exp(3.0 + 1.5 * z);
    case Metric::sexp: return std::exp(4.0 + 1.5 * z);
    case Metric::fix: break;
    }
    return 0.0;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Intercept that makes the mean predicted probability over `logits` equal `rate`.
double calibrate_intercept(const std::vector<double>& logits, double rate) {
    double lo = -30.0, hi = 30.0;
    for (int iter = 0; iter < 100; ++iter) {
        const double mid = 0.5 * (lo + hi);
        double mean = 0.0;
        for (double eta : logits) mean += sigmoid(mid + eta);
        mean /= static_cast<double>(logits.size());
        (mean < rate ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void SyntheticSpec::validate() const {
    if (n_periods < 1) throw Error(ErrorCode::InvalidArgument, "n_periods must be >= 1");
    if (rows_per_period < 50) throw Error(ErrorCode::InvalidArgument, "rows_per_period must be >= 50");
    if (!(drift_rate >= 0.0)) throw Error(ErrorCode::InvalidArgument, "drift rate must be >= 0");
    if (!(base_defect_rate > 0.0 && base_defect_rate < 1.0))
        throw Error(ErrorCode::InvalidArgument, "base_defect_rate must lie in (0, 1)");
    if (noise_features < 0 || noise_features >= static_cast<int>(kMetricCount))
        throw Error(ErrorCode::InvalidArgument, "noise_features must lie in [0, 13]");
    if (!(signal >= 0.0)) throw Error(ErrorCode::InvalidArgument, "signal must be >= 0");
    if (window_months < 1) throw Error(ErrorCode::InvalidArgument, "window_months must be >= 1");
    if (start <= 0) throw Error(ErrorCode::InvalidArgument, "start must be a positive timestamp");
}

std::array<double, kMetricCount> synthetic_coefficients(const SyntheticSpec& spec, int t) {
    const int informative = static_cast<int>(kMetricCount) - spec.noise_features;
    const double center = spec.drift == DriftKind::CoefficientDrift ? spec.drift_rate * t : 0.0;
    std::array<double, kMetricCount> beta{};
    double norm = 0.0;
    for (int f = 0; f < informative; ++f) {
        // circular distance between feature slot f and the moving peak
        double d = std::fmod(std::abs(f - center), static_cast<double>(informative));
        d = std::min(d, informative - d);
        beta[static_cast<std::size_t>(f)] = std::exp(-0.5 * d * d);
        norm += beta[static_cast<std::size_t>(f)] * beta[static_cast<std::size_t>(f)];
    }
    norm = std::sqrt(norm);
    for (double& b : beta) b = norm > 0.0 ? spec.signal * b / norm : 0.0;
    return beta;
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    const auto rows = static_cast<std::size_t>(spec.rows_per_period);
    std::vector<ChangeRecord> records;
    records.reserve(rows * static_cast<std::size_t>(spec.n_periods));

    for (int t = 0; t < spec.n_periods; ++t) {
        Rng rng(derive_seed(seed, "synthetic-period", {static_cast<std::uint64_t>(t)}));
        const auto beta = synthetic_coefficients(spec, t);
        const Timestamp begin = add_months(spec.start, t * spec.window_months);
        const Timestamp end = add_months(spec.start, (t + 1) * spec.window_months);

        std::vector<std::array<double, kMetricCount>> latent(rows);
        std::vector<double> logits(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t f = 0; f < kMetricCount; ++f) {
                if (static_cast<Metric>(f) == Metric::fix) {
                    const double fix = rng.bernoulli(kFixRate) ? 1.0 : 0.0;
                    latent[r][f] = (fix - kFixRate) / std::sqrt(kFixRate * (1.0 - kFixRate));
                } else {
                    latent[r][f] = rng.normal();
                }
                logits[r] += beta[f] * latent[r][f];
            }
        }
        const double intercept = calibrate_intercept(logits, spec.base_defect_rate);

        for (std::size_t r = 0; r < rows; ++r) {
            ChangeRecord rec;
            char id[48];
            std::snprintf(id, sizeof id, "syn-%03d-%06zu", t + 1, r);
            rec.id = id;
            rec.timestamp = begin + static_cast<Timestamp>(r) * (end - begin) / static_cast<Timestamp>(rows);
            for (std::size_t f = 0; f < kMetricCount; ++f) {
                const auto m = static_cast<Metric>(f);
                rec.metrics[f] = m == Metric::fix ? (latent[r][f] > 0.0 ? 1.0 : 0.0)
                                                  : metric_from_latent(m, latent[r][f]);
            }
            rec.defective = rng.bernoulli(sigmoid(intercept + logits[r]));
            records.push_back(std::move(rec));
        }
    }
    return Dataset::from_records(std::move(records), spec.name);
}

}  // namespace jitchrono

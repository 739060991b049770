#include "jitchrono/stats.hpp"

#include "jitchrono/error.hpp"
#include "jitchrono/ranks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace jitchrono {

std::string_view to_string(TestMethod m) noexcept {
    switch (m) {
    case TestMethod::ExactEnumeration: return "exact";
    case TestMethod::NormalApprox: return "normal";
    case TestMethod::ChiSquare: return "chisq";
    }
    return "?";
}

std::string_view to_string(Alternative a) noexcept {
    switch (a) {
    case Alternative::AGreater: return "a_greater";
    case Alternative::BGreater: return "b_greater";
    case Alternative::None: return "none";
    }
    return "?";
}

std::string_view to_string(TestWarning w) noexcept {
    switch (w) {
    case TestWarning::None: return "none";
    case TestWarning::AllZeroDifferences: return "AllZeroDifferences";
    case TestWarning::DegenerateGroups: return "DegenerateGroups";
    }
    return "?";
}

namespace {

// Null distribution of twice the positive-rank sum. Doubling makes average
// ranks integral, so the distribution is a count over integer sums.
double exact_signed_rank_tail(std::span<const double> ranks, double statistic, Alternative alternative) {
    std::vector<long> doubled(ranks.size());
    long total = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        doubled[i] = std::lround(2.0 * ranks[i]);
        total += doubled[i];
    }
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    long reach = 0;
    for (long r : doubled) {
        for (long s = reach; s >= 0; --s)
            if (counts[static_cast<std::size_t>(s)] != 0.0)
                counts[static_cast<std::size_t>(s + r)] += counts[static_cast<std::size_t>(s)];
        reach += r;
    }
    const long observed = std::lround(2.0 * statistic);
    double tail = 0.0;
    if (alternative == Alternative::AGreater) {
        for (long s = observed; s <= total; ++s) tail += counts[static_cast<std::size_t>(s)];
    } else {
        for (long s = 0; s <= observed; ++s) tail += counts[static_cast<std::size_t>(s)];
    }
    return tail / std::ldexp(1.0, static_cast<int>(ranks.size()));
}

}  // namespace

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, Alternative alternative,
                                std::size_t exact_limit) {
    if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "wilcoxon: samples must be paired");
    if (a.empty()) throw Error(ErrorCode::InvalidArgument, "wilcoxon: empty samples");
    if (alternative == Alternative::None)
        throw Error(ErrorCode::InvalidArgument, "wilcoxon: a one-sided alternative is required");

    std::vector<double> magnitude;
    std::vector<bool> positive;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) throw Error(ErrorCode::InvalidArgument, "wilcoxon: non-finite difference");
        if (d == 0.0) continue;
        magnitude.push_back(std::abs(d));
        positive.push_back(d > 0.0);
    }

    TestResult result;
    result.alternative = alternative;
    result.n_effective = magnitude.size();
    if (magnitude.empty()) {
        result.warning = TestWarning::AllZeroDifferences;
        return result;
    }

    const auto ranks = average_ranks(magnitude);
    double w = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i)
        if (positive[i]) w += ranks[i];
    result.statistic = w;

    if (magnitude.size() <= exact_limit) {
        result.method = TestMethod::ExactEnumeration;
        result.p_value = std::clamp(exact_signed_rank_tail(ranks, w, alternative), 0.0, 1.0);
        return result;
    }

    const double n = static_cast<double>(magnitude.size());
    const double mean = n * (n + 1.0) / 4.0;
    const double variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_correction_sum(magnitude) / 48.0;
    const double sd = std::sqrt(variance);
    result.method = TestMethod::NormalApprox;
    if (alternative == Alternative::AGreater) {
        result.p_value = normal_cdf(-(w - mean - 0.5) / sd);
    } else {
        result.p_value = normal_cdf((w - mean + 0.5) / sd);
    }
    result.p_value = std::clamp(result.p_value, 0.0, 1.0);
    return result;
}

TestResult kruskal_wallis(std::span<const std::vector<double>> groups) {
    if (groups.size() < 2) throw Error(ErrorCode::InvalidArgument, "kruskal_wallis: need at least two groups");
    std::vector<double> pooled;
    for (const auto& g : groups) {
        if (g.empty()) throw Error(ErrorCode::InvalidArgument, "kruskal_wallis: empty group");
        for (double v : g)
            if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "kruskal_wallis: non-finite value");
        pooled.insert(pooled.end(), g.begin(), g.end());
    }
    const double n = static_cast<double>(pooled.size());
    if (pooled.size() < 3) throw Error(ErrorCode::InvalidArgument, "kruskal_wallis: need at least three observations");

    TestResult result;
    result.method = TestMethod::ChiSquare;
    result.alternative = Alternative::None;
    result.n_effective = pooled.size();

    const double correction = 1.0 - tie_correction_sum(pooled) / (n * n * n - n);
    if (correction <= 0.0) {
        result.warning = TestWarning::DegenerateGroups;
        return result;
    }

    const auto ranks = average_ranks(pooled);
    double sum_sq = 0.0;
    std::size_t offset = 0;
    for (const auto& g : groups) {
        double r = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) r += ranks[offset + i];
        offset += g.size();
        sum_sq += r * r / static_cast<double>(g.size());
    }
    const double h = 12.0 / (n * (n + 1.0)) * sum_sq - 3.0 * (n + 1.0);
    result.statistic = std::max(0.0, h / correction);
    result.p_value = chisq_upper_tail(result.statistic, static_cast<int>(groups.size()) - 1);
    return result;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) throw Error(ErrorCode::DomainError, "gamma_q requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    const double log_prefactor = a * std::log(x) - x - std::lgamma(a);

    if (x < a + 1.0) {
        // Series for the lower function P, then Q = 1 - P.
        double term = 1.0 / a;
        double sum = term;
        for (int k = 1; k < kMaxIterations; ++k) {
            term *= x / (a + k);
            sum += term;
            if (std::abs(term) < std::abs(sum) * kEps) break;
        }
        return std::clamp(1.0 - sum * std::exp(log_prefactor), 0.0, 1.0);
    }

    // Continued fraction for Q, modified Lentz.
    constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / kTiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < kTiny) d = kTiny;
        c = b + an / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) break;
    }
    return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

double chisq_upper_tail(double x, int df) {
    if (df < 1) throw Error(ErrorCode::DomainError, "chi-square degrees of freedom must be >= 1");
    if (!(x >= 0.0)) throw Error(ErrorCode::DomainError, "chi-square statistic must be >= 0");
    return gamma_q(0.5 * df, 0.5 * x);
}

}  // namespace jitchrono

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace jitchrono {

enum class TestMethod { ExactEnumeration, NormalApprox, ChiSquare };

/// For paired tests: which side the alternative hypothesis favours.
enum class Alternative { AGreater, BGreater, None };

enum class TestWarning { None, AllZeroDifferences, DegenerateGroups };

std::string_view to_string(TestMethod m) noexcept;
std::string_view to_string(Alternative a) noexcept;
std::string_view to_string(TestWarning w) noexcept;

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n_effective = 0;
    TestMethod method = TestMethod::ExactEnumeration;
    Alternative alternative = Alternative::None;
    TestWarning warning = TestWarning::None;
};

/// Samples at or below this many nonzero differences get an exact p-value.
inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// One-sided Wilcoxon signed-rank test on d = a - b. Zero differences are
/// dropped; the statistic is the rank sum of positive differences (average
/// ranks for tied |d|). Exact null distribution up to `exact_limit` nonzero
/// differences, otherwise normal approximation with tie-corrected variance and
/// a 0.5 continuity correction. When every difference is zero the result carries
/// TestWarning::AllZeroDifferences and p = 1.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b, Alternative alternative,
                                std::size_t exact_limit = kWilcoxonExactLimit);

/// Kruskal-Wallis H with tie correction; p from the chi-square limit with k-1
/// degrees of freedom. All-identical input yields H = 0, p = 1 and
/// TestWarning::DegenerateGroups.
TestResult kruskal_wallis(std::span<const std::vector<double>> groups);

double normal_cdf(double z);

/// Regularized upper incomplete gamma function Q(a, x).
double gamma_q(double a, double x);

/// P(X > x) for X ~ chi-square(df).
double chisq_upper_tail(double x, int df);

}  // namespace jitchrono

#include "jitchrono/error.hpp"
#include "jitchrono/stats.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>

using namespace jitchrono;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n, bool ties) {
    std::vector<double> v(n);
    for (auto& x : v) x = ties ? static_cast<double>(rng.below(6)) : rng.normal();
    return v;
}

}  // namespace

TEST(Wilcoxon, AllSixPositiveIsOneOverSixtyFour) {
    const std::vector<double> a{1.1, 2.2, 3.3, 4.4, 5.5, 6.6};
    const std::vector<double> b{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    const auto r = wilcoxon_signed_rank(a, b, Alternative::AGreater);
    EXPECT_NEAR(r.p_value, 1.0 / 64.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.statistic, 21.0);
    EXPECT_EQ(r.n_effective, 6u);
    EXPECT_EQ(r.method, TestMethod::ExactEnumeration);
    EXPECT_NEAR(oracle::wilcoxon_enumerate(a, b).p_upper, 1.0 / 64.0, 1e-12);
    EXPECT_NEAR(wilcoxon_signed_rank(b, a, Alternative::BGreater).p_value, 1.0 / 64.0, 1e-12);
}

TEST(Wilcoxon, IdenticalSamplesWarn) {
    const std::vector<double> a{0.7, 0.8, 0.9};
    const auto r = wilcoxon_signed_rank(a, a, Alternative::AGreater);
    EXPECT_EQ(r.warning, TestWarning::AllZeroDifferences);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.n_effective, 0u);
}

TEST(Wilcoxon, Errors) {
    const std::vector<double> a{1, 2, 3};
    const std::vector<double> b{1, 2};
    EXPECT_THROW(wilcoxon_signed_rank(a, b, Alternative::AGreater), Error);
    EXPECT_THROW(wilcoxon_signed_rank(a, a, Alternative::None), Error);
    const std::vector<double> empty;
    EXPECT_THROW(wilcoxon_signed_rank(empty, empty, Alternative::AGreater), Error);
}

TEST(Wilcoxon, ExactMatchesEnumeration) {
    Rng rng(55);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(12);
        const bool ties = trial % 2 == 0;
        const auto a = random_values(rng, n, ties);
        const auto b = random_values(rng, n, ties);
        const auto o = oracle::wilcoxon_enumerate(a, b);
        if (o.n == 0) continue;
        const auto up = wilcoxon_signed_rank(a, b, Alternative::AGreater);
        const auto down = wilcoxon_signed_rank(a, b, Alternative::BGreater);
        EXPECT_EQ(up.n_effective, o.n);
        EXPECT_DOUBLE_EQ(up.statistic, o.w);
        EXPECT_NEAR(up.p_value, o.p_upper, 1e-12);
        EXPECT_NEAR(down.p_value, o.p_lower, 1e-12);
        EXPECT_GE(up.p_value + down.p_value, 1.0 - 1e-12);
    }
}

TEST(Wilcoxon, NormalApproximationCloseAtTwenty) {
    Rng rng(66);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = random_values(rng, 20, false);
        const auto b = random_values(rng, 20, false);
        const auto exact = wilcoxon_signed_rank(a, b, Alternative::AGreater, 20);
        const auto approx = wilcoxon_signed_rank(a, b, Alternative::AGreater, 0);
        EXPECT_EQ(exact.method, TestMethod::ExactEnumeration);
        EXPECT_EQ(approx.method, TestMethod::NormalApprox);
        EXPECT_LE(std::abs(exact.p_value - approx.p_value), 0.01);
    }
}

TEST(Wilcoxon, LargeSampleUsesNormalApproximation) {
    Rng rng(3);
    const auto a = random_values(rng, 60, true);
    const auto b = random_values(rng, 60, true);
    const auto r = wilcoxon_signed_rank(a, b, Alternative::AGreater);
    EXPECT_EQ(r.method, TestMethod::NormalApprox);
    EXPECT_GE(r.p_value, 0.0);
    EXPECT_LE(r.p_value, 1.0);
    EXPECT_LE(r.n_effective, 60u);
}

TEST(KruskalWallis, HandExample) {
    const std::vector<std::vector<double>> g{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    const auto r = kruskal_wallis(g);
    EXPECT_NEAR(r.statistic, 7.2, 1e-12);
    EXPECT_NEAR(r.p_value, std::exp(-3.6), 1e-6);
    EXPECT_NEAR(r.p_value, 0.0273, 1e-4);
    EXPECT_EQ(r.method, TestMethod::ChiSquare);
    const auto o = oracle::kruskal_wallis(g);
    EXPECT_NEAR(o.h, 7.2, 1e-12);
}

TEST(KruskalWallis, IdenticalGroups) {
    const std::vector<std::vector<double>> g{{0.7, 0.7}, {0.7, 0.7}, {0.7, 0.7}};
    const auto r = kruskal_wallis(g);
    EXPECT_DOUBLE_EQ(r.statistic, 0.0);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.warning, TestWarning::DegenerateGroups);
    const std::vector<std::vector<double>> same_ranks{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    EXPECT_NEAR(kruskal_wallis(same_ranks).statistic, 0.0, 1e-12);
}

TEST(KruskalWallis, Errors) {
    const std::vector<std::vector<double>> one{{1, 2, 3}};
    const std::vector<std::vector<double>> empty_group{{1, 2}, {}};
    const std::vector<std::vector<double>> tiny{{1}, {2}};
    EXPECT_THROW(kruskal_wallis(one), Error);
    EXPECT_THROW(kruskal_wallis(empty_group), Error);
    EXPECT_THROW(kruskal_wallis(tiny), Error);
}

TEST(KruskalWallis, MatchesOracleAndIsRankInvariant) {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng.below(4);
        std::vector<std::vector<double>> g(k);
        for (auto& grp : g) grp = random_values(rng, 1 + rng.below(8), trial % 2 == 0);
        g[0].push_back(100.0);  // keeps the pool non-constant
        const auto r = kruskal_wallis(g);
        const auto o = oracle::kruskal_wallis(g);
        EXPECT_NEAR(r.statistic, o.h, 1e-9);
        EXPECT_NEAR(r.p_value, o.p, 1e-9);
        EXPECT_GE(r.statistic, 0.0);
        auto t = g;
        for (auto& grp : t)
            for (auto& v : grp) v = std::atan(v) * 3.0 + 1.0;
        const auto rt = kruskal_wallis(t);
        EXPECT_NEAR(rt.statistic, r.statistic, 1e-9);
        EXPECT_NEAR(rt.p_value, r.p_value, 1e-9);
    }
}

TEST(Distributions, Anchors) {
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
    EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-12);
    EXPECT_DOUBLE_EQ(chisq_upper_tail(0.0, 3), 1.0);
    EXPECT_NEAR(chisq_upper_tail(7.2, 2), std::exp(-3.6), 1e-12);
    EXPECT_THROW(gamma_q(-1.0, 1.0), Error);
    EXPECT_THROW(gamma_q(1.0, -1.0), Error);
}

TEST(Distributions, GammaQAgreesWithBoost) {
    for (double a : {0.5, 1.0, 1.5, 2.0, 3.5, 10.0, 40.0})
        for (double x : {0.01, 0.3, 1.0, 2.5, 5.0, 12.0, 30.0, 80.0})
            EXPECT_NEAR(gamma_q(a, x), boost::math::gamma_q(a, x), 1e-12) << a << " " << x;
}

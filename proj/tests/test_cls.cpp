#include "inar/cls.hpp"
#include "inar/errors.hpp"
#include "inar/random.hpp"
#include "inar/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace inar;

namespace {

// Independent dense solver used as the least-squares oracle.
Eigen::VectorXd svd_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    return a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
}

Eigen::VectorXd column(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

}  // namespace

TEST(ClsDesign, LagAndInterceptColumns) {
    const auto d = build_cls_design(CountSeries({1, 2, 1, 2}), 1, {});
    EXPECT_TRUE(d.response.isApprox(column({2, 1, 2})));
    EXPECT_TRUE(d.design.col(0).isApprox(column({1, 1, 1})));
    EXPECT_TRUE(d.design.col(1).isApprox(column({1, 2, 1})));
    EXPECT_EQ(d.column_names, (std::vector<std::string>{"intercept", "lag1"}));
}

TEST(ClsDesign, StepIndicatorColumn) {
    const auto d = build_cls_design(CountSeries({1, 3, 2, 5}), 1, {{3, 1.0}});
    ASSERT_EQ(d.design.cols(), 3);
    EXPECT_TRUE(d.design.col(2).isApprox(column({0, 1, 1})));
}

TEST(ClsDesign, GeometricDecayColumn) {
    const auto d = build_cls_design(CountSeries({1, 3, 2, 5, 4}), 1, {{3, 0.5}});
    EXPECT_TRUE(d.design.col(2).isApprox(column({0, 1, 0.5, 0.25})));
}

TEST(ClsDesign, DuplicateProfilesAreRankDeficient) {
    const CountSeries s({3, 1, 4, 1, 5, 9, 2, 6, 5, 3});
    try {
        (void)build_cls_design(s, 1, {{5, 0.8}, {5, 0.8}});
        FAIL() << "expected RankError";
    } catch (const RankError& e) {
        ASSERT_EQ(e.columns().size(), 1U);
        EXPECT_NE(e.columns()[0].find("tau=5"), std::string::npos);
    }
}

TEST(ClsDesign, ConstantSeriesMakesLagCollinear) {
    try {
        (void)build_cls_design(CountSeries({4, 4, 4, 4, 4, 4}), 1, {});
        FAIL() << "expected RankError";
    } catch (const RankError& e) {
        EXPECT_EQ(e.columns(), (std::vector<std::string>{"lag1"}));
    }
}

TEST(ClsDesign, TooShortOrBadTau) {
    EXPECT_THROW((void)build_cls_design(CountSeries({1, 2, 3}), 1, {{2, 0.0}}), ConfigError);
    EXPECT_THROW((void)build_cls_design(CountSeries({1, 2, 3, 5, 2, 1}), 1, {{1, 0.0}}), DomainError);
    EXPECT_THROW((void)build_cls_design(CountSeries({1, 2, 3, 5, 2, 1}), 1, {{7, 0.0}}), DomainError);
}

TEST(FitCls, ExactFitOnAlternatingSeries) {
    const auto fit = fit_cls(CountSeries({1, 2, 1, 2}), 1);
    ASSERT_EQ(fit.alphas.size(), 1U);
    EXPECT_NEAR(fit.alphas[0], -1.0, 1e-12);
    EXPECT_NEAR(fit.lambda, 3.0, 1e-12);
    EXPECT_NEAR(fit.rss, 0.0, 1e-20);
    EXPECT_EQ(fit.n_effective, 3);
    EXPECT_TRUE(fit.outside_stationary_region);
}

TEST(FitCls, ConsistentOnIidPoisson) {
    const double lambda = 3.0;
    const auto s = simulate(InarModel({0.0}, MeanSpec::constant(lambda)), 10000, RandomStream(21));
    const auto fit = fit_cls(s, 1);
    EXPECT_NEAR(fit.alphas[0], 0.0, 0.03);
    // lambda-hat standard error under alpha = 0: sqrt(lambda (1 + lambda / lambda) / n) approx
    const double se = std::sqrt(lambda * 2.0 / 10000.0);
    EXPECT_NEAR(fit.lambda, lambda, 3.0 * se + 0.03 * lambda);
}

TEST(FitCls, MatchesSvdOracleOnRandomInstances) {
    RandomStream master(1234);
    for (int inst = 0; inst < 100; ++inst) {
        auto rng = master.substream(static_cast<std::uint64_t>(inst));
        const int p = 1 + static_cast<int>(rng.uniform() * 2.0);
        const int n = 40 + static_cast<int>(rng.uniform() * 160.0);
        std::vector<double> alphas(static_cast<std::size_t>(p), 0.6 * rng.uniform() / p);
        const auto s = simulate(InarModel(alphas, MeanSpec::constant(0.5 + 5.0 * rng.uniform())), n, rng);
        std::vector<InterventionProfile> profiles;
        const int j = static_cast<int>(rng.uniform() * 3.0);
        for (int k = 0; k < j; ++k) {
            const int tau = p + 1 + static_cast<int>(rng.uniform() * (n - p));
            profiles.push_back({tau, std::floor(rng.uniform() * 5.0) / 4.0});
        }
        ClsDesign d;
        try {
            d = build_cls_design(s, p, profiles);
        } catch (const RankError&) {
            continue;
        }
        const auto fit = fit_cls(s, p, profiles);
        const Eigen::VectorXd oracle = svd_solve(d.design, d.response);
        const double oracle_rss = (d.response - d.design * oracle).squaredNorm();
        EXPECT_NEAR(fit.rss, oracle_rss, 1e-10 * std::max(1.0, oracle_rss)) << "instance " << inst;
        EXPECT_NEAR(fit.lambda, oracle(0), 1e-8 * std::max(1.0, std::abs(oracle(0))));
        for (int i = 0; i < p; ++i) EXPECT_NEAR(fit.alphas[static_cast<std::size_t>(i)], oracle(1 + i), 1e-8);
    }
}

TEST(FitCls, RefitIsIdentical) {
    const auto s = simulate(InarModel({0.4}, MeanSpec::constant(2.0)), 150, RandomStream(3));
    const auto a = fit_cls(s, 1, {{70, 0.9}});
    const auto b = fit_cls(s, 1, {{70, 0.9}});
    EXPECT_EQ(a.alphas, b.alphas);
    EXPECT_EQ(a.lambda, b.lambda);
    EXPECT_EQ(a.kappas, b.kappas);
    EXPECT_EQ(a.rss, b.rss);
}

TEST(FitCls, ScalingCountsScalesRss) {
    const auto s = simulate(InarModel({0.4}, MeanSpec::constant(2.0)), 120, RandomStream(4));
    std::vector<Count> scaled(s.values().begin(), s.values().end());
    for (auto& v : scaled) v *= 3;
    const double base = fit_cls(s, 1, {{40, 0.6}}).rss;
    EXPECT_NEAR(fit_cls(CountSeries(scaled), 1, {{40, 0.6}}).rss, 9.0 * base, 1e-9 * base);
}

TEST(FStatistic, Substitution) {
    EXPECT_NEAR(f_from_rss(100.0, 80.0, 102, 1), 24.75, 1e-12);
    EXPECT_TRUE(std::isinf(f_from_rss(100.0, 0.0, 102, 1)));
    EXPECT_THROW((void)f_from_rss(1.0, 1.0, 3, 1), ConfigError);
}

TEST(FStatistic, MatchesTwoSeparateFits) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(2.0)), 200, RandomStream(9));
    for (double delta : {0.0, 0.6, 0.8, 0.9, 1.0}) {
        for (int tau : {3, 50, 100, 199, 200}) {
            const double rss0 = fit_cls(s, 1).rss;
            const double rss1 = fit_cls(s, 1, {{tau, delta}}).rss;
            const double expected = (rss0 - rss1) / (rss1 / (200 - 1 - 2));
            EXPECT_NEAR(f_statistic(s, 1, tau, delta), expected, 1e-8 * std::max(1.0, expected))
                << "tau " << tau << " delta " << delta;
        }
    }
}

TEST(FStatistic, NestingGivesNonnegativeStatistic) {
    const auto s = simulate(InarModel({0.5, 0.3}, MeanSpec::constant(2.0)), 120, RandomStream(10));
    const FStatisticScanner scan(s, 2);
    for (double delta : {0.0, 0.6, 0.8, 0.9, 1.0}) {
        for (int tau = 3; tau <= 120; ++tau) {
            if (delta == 1.0 && tau == 3) continue;
            const auto cell = scan.evaluate({tau, delta});
            EXPECT_GE(cell.statistic, 0.0);
            EXPECT_LE(cell.rss_alt, scan.null_fit().rss * (1 + 1e-12));
        }
    }
}

TEST(FStatistic, NoReductionGivesZero) {
    EXPECT_EQ(f_from_rss(50.0, 50.0, 100, 1), 0.0);
}

TEST(FStatistic, LevelShiftAtFirstRowIsCollinearWithIntercept) {
    const CountSeries s({2, 0, 3, 1, 4, 1, 5, 9, 2, 6, 5, 3, 5});
    const FStatisticScanner scan(s, 1);
    EXPECT_THROW((void)scan.evaluate({2, 1.0}), RankError);
}

TEST(FStatistic, ProfileColumnOrderDoesNotMatter) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(3.0)), 150, RandomStream(12));
    const double a = fit_cls(s, 1, {{40, 0.8}, {90, 0.0}}).rss;
    const double b = fit_cls(s, 1, {{90, 0.0}, {40, 0.8}}).rss;
    EXPECT_NEAR(a, b, 1e-10 * a);
}

TEST(FStatistic, OutOfRangeTau) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(3.0)), 50, RandomStream(13));
    const FStatisticScanner scan(s, 1);
    EXPECT_THROW((void)scan.evaluate({1, 0.0}), DomainError);
    EXPECT_THROW((void)scan.evaluate({51, 0.0}), DomainError);
}

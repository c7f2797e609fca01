#include "inar/bootstrap.hpp"
#include "inar/errors.hpp"
#include "inar/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>

using namespace inar;

namespace {

const ConditionalModel kInar1{1, nullptr, {}};

BootstrapOptions small_options(int replicates) {
    BootstrapOptions opts;
    opts.replicates = replicates;
    return opts;
}

}  // namespace

TEST(BootstrapPValue, ObservedAboveEveryReplicate) {
    const std::vector<double> maxima(500, 5.0);
    EXPECT_DOUBLE_EQ(bootstrap_p_value(10.0, maxima), 1.0 / 501.0);
}

TEST(BootstrapPValue, ZeroObservedGivesOne) {
    const std::vector<double> maxima{0.0, 3.0, 1.5, 0.2};
    EXPECT_EQ(bootstrap_p_value(0.0, maxima), 1.0);
}

TEST(BootstrapPValue, TiesCountAsExceedances) {
    const std::vector<double> maxima{1.0, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(bootstrap_p_value(2.0, maxima), 3.0 / 4.0);
}

TEST(BootstrapPValue, BoundedAndNonincreasingInObserved) {
    RandomStream rng(1);
    std::vector<double> maxima(200);
    for (auto& m : maxima) m = 30.0 * rng.uniform();
    double previous = 1.0;
    for (double obs = -1.0; obs <= 31.0; obs += 0.1) {
        const double p = bootstrap_p_value(obs, maxima);
        EXPECT_GE(p, 1.0 / 201.0);
        EXPECT_LE(p, 1.0);
        EXPECT_LE(p, previous);
        previous = p;
    }
}

TEST(NullEstimate, FPathClipsIntoStationaryRegion) {
    std::vector<Count> alternating;
    for (int t = 0; t < 40; ++t) alternating.push_back(t % 2 == 0 ? 1 : 3);
    alternating[17] = 2;
    const StatisticScanner scan(CountSeries(alternating), kInar1, TestMethod::kF);
    ASSERT_LT(scan.f()->null_fit().alphas[0], 0.0);
    const auto est = null_estimate(scan);
    EXPECT_TRUE(est.clipped);
    EXPECT_EQ(est.alphas[0], 0.0);
}

TEST(NullEstimate, ScorePathUsesTheCmlFit) {
    const auto s = simulate(InarModel({0.4}, MeanSpec::constant(2.0)), 150, RandomStream(2));
    const StatisticScanner scan(s, kInar1, TestMethod::kScore);
    const auto est = null_estimate(scan);
    EXPECT_FALSE(est.clipped);
    EXPECT_EQ(est.alphas[0], scan.score()->null_fit().theta.alpha(0));
    EXPECT_EQ(est.mean_params(0), scan.score()->null_fit().theta.mean_params()(0));
}

TEST(NullReplicate, LogLinearReplicateKeepsInitialValues) {
    const int n = 60;
    auto x = std::make_shared<Eigen::MatrixXd>(n, 2);
    for (int t = 1; t <= n; ++t) {
        (*x)(t - 1, 0) = 1.0;
        (*x)(t - 1, 1) = std::cos(2.0 * M_PI * t / 12.0);
    }
    const ConditionalModel model{1, x, {}};
    std::vector<Count> obs(n, 2);
    obs[0] = 9;
    NullEstimate est{{0.3}, Eigen::Vector2d(0.7, 0.4), false};
    const auto a = simulate_null_replicate(est, model, CountSeries(obs), RandomStream(3));
    const auto b = simulate_null_replicate(est, model, CountSeries(obs), RandomStream(3));
    ASSERT_EQ(a.length(), n);
    EXPECT_EQ(a.at(1), 9);
    EXPECT_EQ(a, b);
}

TEST(BootstrapTest, PValuesAndChoiceFollowTheRules) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(2.0)), 120, RandomStream(4));
    const auto res = bootstrap_test(s, kInar1, TestMethod::kF, small_options(60), RandomStream(5));
    ASSERT_TRUE(res.chosen.has_value());
    EXPECT_EQ(res.replicates, 60);
    double best_p = 2.0;
    for (const auto& db : res.per_delta) {
        ASSERT_TRUE(db.available);
        EXPECT_EQ(db.effective + res.failed_replicates, 60);
        EXPECT_DOUBLE_EQ(db.p_value, (db.exceedances + 1.0) / (db.effective + 1.0));
        EXPECT_GE(db.p_value, 1.0 / 61.0);
        EXPECT_LE(db.p_value, 1.0);
        best_p = std::min(best_p, db.p_value);
    }
    EXPECT_EQ(res.chosen->p_value, best_p);
    for (const auto& db : res.per_delta) {
        if (db.p_value == best_p) EXPECT_LE(db.delta, res.chosen->delta);
    }
    EXPECT_EQ(res.significant, res.chosen->p_value < 0.05);
}

TEST(BootstrapTest, DeterministicAcrossThreadCounts) {
    const auto s = simulate(InarModel({0.5}, MeanSpec::constant(1.0)), 100, RandomStream(6));
    for (const TestMethod method : {TestMethod::kF, TestMethod::kScore}) {
        auto one = small_options(40);
        auto many = one;
        many.threads = 3;
        const auto a = bootstrap_test(s, kInar1, method, one, RandomStream(7));
        const auto b = bootstrap_test(s, kInar1, method, many, RandomStream(7));
        ASSERT_EQ(a.per_delta.size(), b.per_delta.size());
        for (std::size_t k = 0; k < a.per_delta.size(); ++k) {
            EXPECT_EQ(a.per_delta[k].exceedances, b.per_delta[k].exceedances);
            EXPECT_EQ(a.per_delta[k].p_value, b.per_delta[k].p_value);
        }
        EXPECT_EQ(a.failed_replicates, b.failed_replicates);
    }
}

TEST(BootstrapTest, StrongOutlierHasTheSmallestPValue) {
    const double lambda = 2.0;
    const auto s = simulate_contaminated(InarModel({0.3}, MeanSpec::constant(lambda)),
                                         {{60, 0.0, 15.0 * std::sqrt(lambda)}}, 120, {}, RandomStream(8));
    const auto res = bootstrap_test(s, kInar1, TestMethod::kScore, small_options(99), RandomStream(9));
    ASSERT_TRUE(res.chosen.has_value());
    EXPECT_TRUE(res.significant);
    EXPECT_DOUBLE_EQ(res.chosen->p_value, 1.0 / 100.0);
    EXPECT_EQ(res.chosen->tau, 60);
}

TEST(BootstrapTest, UnconvergedNullFitFailsBeforeSimulation) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(2.0)), 100, RandomStream(10));
    auto opts = small_options(10);
    opts.cml.max_iterations = 0;
    EXPECT_THROW((void)bootstrap_test(s, kInar1, TestMethod::kScore, opts, RandomStream(11)), ConvergenceError);
    EXPECT_THROW((void)bootstrap_test(s, kInar1, TestMethod::kF, small_options(0), RandomStream(11)), ConfigError);
}

TEST(BootstrapTest, TwoShiftScenarioFirstPicksTheLongShift) {
    // (0.5, 3) with transient shifts of size 10 at (50, 0.6) and (150, 0.9)
    const InarModel model({0.5}, MeanSpec::constant(3.0));
    const std::vector<Intervention> ivs{{50, 0.6, 10.0}, {150, 0.9, 10.0}};
    int hits = 0;
    constexpr int kSeeds = 100;
    for (int seed = 0; seed < kSeeds; ++seed) {
        const auto s = simulate_contaminated(model, ivs, 200, {}, RandomStream(static_cast<std::uint64_t>(seed)));
        const auto res = bootstrap_test(s, kInar1, TestMethod::kF, small_options(200),
                                        RandomStream(static_cast<std::uint64_t>(seed)).substream(99));
        if (res.chosen && res.chosen->delta == 0.9 && res.chosen->tau == 150 && res.chosen->p_value < 0.01) ++hits;
    }
    EXPECT_GE(hits, 80) << hits << " of " << kSeeds;
}

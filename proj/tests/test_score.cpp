#include "inar/errors.hpp"
#include "inar/random.hpp"
#include "inar/score.hpp"
#include "inar/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

using namespace inar;

namespace {

const ConditionalModel kInar1{1, nullptr, {}};

double rel_gap(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

std::shared_ptr<const Eigen::MatrixXd> seasonal_design(int n) {
    auto x = std::make_shared<Eigen::MatrixXd>(n, 3);
    for (int t = 1; t <= n; ++t) {
        (*x)(t - 1, 0) = 1.0;
        (*x)(t - 1, 1) = std::sin(2.0 * std::numbers::pi * t / 12.0);
        (*x)(t - 1, 2) = std::cos(2.0 * std::numbers::pi * t / 12.0);
    }
    return x;
}

}  // namespace

TEST(ScoreQuadraticForm, ZeroScoreGivesZero) {
    const Eigen::MatrixXd info = Eigen::Matrix3d{{4, 1, 0.5}, {1, 3, 0.2}, {0.5, 0.2, 2}};
    const auto cell = score_quadratic_form(Eigen::Vector3d::Zero(), info);
    EXPECT_EQ(cell.statistic, 0.0);
    EXPECT_EQ(cell.kappa_hat, 0.0);
}

TEST(ScoreQuadraticForm, MatchesExplicitInverse) {
    const Eigen::Matrix3d info{{4, 1, 0.5}, {1, 3, 0.2}, {0.5, 0.2, 2}};
    const Eigen::Vector3d v{0.3, -0.2, 1.5};
    const auto cell = score_quadratic_form(v, info);
    EXPECT_NEAR(cell.statistic, v.dot(info.inverse() * v), 1e-13);
    EXPECT_NEAR(cell.kappa_hat, (info.inverse() * v)(2), 1e-13);
}

TEST(ScoreQuadraticForm, SingularInformationThrows) {
    const Eigen::Matrix2d info{{1, 1}, {1, 1}};
    EXPECT_THROW((void)score_quadratic_form(Eigen::Vector2d(1, 0), info), SingularityError);
}

TEST(ScoreScanner, ScoreMatchesFullScoreVector) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(2.0)), 200, RandomStream(1));
    const ScoreScanner scan(s, kInar1);
    for (const InterventionProfile prof : {InterventionProfile{100, 0.8}, {2, 0.0}, {150, 1.0}, {200, 0.6}}) {
        const auto extended = scan.null_fit().theta.with_zero_kappas(1);
        const Eigen::VectorXd oracle = score_vector(extended, s, kInar1.with_profiles({prof}));
        const Eigen::VectorXd v = scan.score(prof);
        ASSERT_EQ(v.size(), 3);
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(v(k), oracle(k), 1e-10 * std::max(1.0, std::abs(oracle(k))));
        // null components vanish at the fit, up to the optimizer tolerance in log coordinates
        EXPECT_LT(std::abs(v(0)) * extended.alpha(0), 1e-5);
        EXPECT_LT(std::abs(v(1)) * extended.mean_params()(0), 1e-5);
    }
}

TEST(ScoreScanner, ConstantMeanUsesExpectedInformation) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(2.0)), 200, RandomStream(2));
    const ScoreScanner scan(s, kInar1);
    const InterventionProfile prof{100, 0.8};
    const auto oracle = expected_information(scan.null_fit().theta.with_zero_kappas(1), 200, {prof});
    const auto info = scan.information(prof);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) EXPECT_LT(rel_gap(info(i, j), oracle(i, j)), 1e-12) << i << "," << j;
    }
}

TEST(ScoreScanner, LogLinearMeanUsesConditionalInformation) {
    const int n = 120;
    const auto x = seasonal_design(n);
    Eigen::VectorXd beta(3);
    beta << 1.0, 0.4, -0.3;
    SimulationOptions opts;
    opts.burn_in = 0;
    const auto s = simulate_contaminated(InarModel({0.3}, MeanSpec::log_linear(beta, x)), {}, n, opts, RandomStream(3));
    const ConditionalModel model{1, x, {}};
    const ScoreScanner scan(s, model);
    const InterventionProfile prof{60, 0.9};
    const auto theta = scan.null_fit().theta.with_zero_kappas(1);

    // Sum over t of E(-H_t | y_{t-1}) by enumerating y on a two-point series per transition.
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(5, 5);
    for (int t = 2; t <= n; ++t) {
        auto rows = std::make_shared<Eigen::MatrixXd>(x->middleRows(t - 2, 2));
        const ConditionalModel one{1, rows, {{2, 0.0}}};
        const double w = decay_weight(prof, t);
        Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
        double mass = 0.0;
        for (Count y = 0; y <= s.at(t - 1) + 80; ++y) {
            const CountSeries pair({s.at(t - 1), y});
            const double prob = std::exp(conditional_loglik(theta, pair, one));
            mass += prob;
            expected -= prob * hessian_matrix(theta, pair, one);
        }
        ASSERT_NEAR(mass, 1.0, 1e-12);
        expected.row(4) *= w;
        expected.col(4) *= w;
        oracle += expected;
    }
    const auto info = scan.information(prof);
    ASSERT_EQ(info.rows(), 5);
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) EXPECT_LT(rel_gap(info(i, j), oracle(i, j)), 1e-9) << i << "," << j;
    }
    EXPECT_GE(scan.evaluate(prof).statistic, 0.0);
}

TEST(ScoreScanner, LogLinearSingleTimeCellHasPositiveInformation) {
    // an observed zero makes the observed kappa information vanish for delta = 0
    const int n = 60;
    const auto x = seasonal_design(n);
    Eigen::VectorXd beta(3);
    beta << 1.0, 0.4, -0.3;
    SimulationOptions opts;
    opts.burn_in = 0;
    const InarModel model({0.3}, MeanSpec::log_linear(beta, x));
    const auto sim = simulate_contaminated(model, {}, n, opts, RandomStream(4));
    std::vector<Count> values(sim.values().begin(), sim.values().end());
    values[29] = 0;
    const CountSeries s(std::move(values));
    const ScoreScanner scan(s, {1, x, {}});
    const auto info = scan.information({30, 0.0});
    EXPECT_GT(info(4, 4), 0.1);
    EXPECT_LT(scan.evaluate({30, 0.0}).statistic, 20.0);
}

TEST(ScoreScanner, LevelShiftAtSecondObservationIsSingular) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(2.0)), 100, RandomStream(4));
    const ScoreScanner scan(s, kInar1);
    EXPECT_THROW((void)scan.evaluate({2, 1.0}), SingularityError);
    EXPECT_NO_THROW((void)scan.evaluate({2, 0.8}));
}

TEST(ScoreScanner, RejectsUnsupportedModelsAndTimes) {
    const auto s = simulate(InarModel({0.3, 0.2}, MeanSpec::constant(2.0)), 100, RandomStream(5));
    EXPECT_THROW(ScoreScanner(s, ConditionalModel{2, nullptr, {}}), UnsupportedError);
    EXPECT_THROW(ScoreScanner(s, ConditionalModel{1, nullptr, {{50, 0.0}}}), ConfigError);
    const ScoreScanner scan(s, kInar1);
    EXPECT_THROW((void)scan.evaluate({1, 0.0}), DomainError);
    EXPECT_THROW((void)scan.evaluate({101, 0.0}), DomainError);
}

TEST(ScoreScanner, StatisticIsNonnegative) {
    const auto s = simulate(InarModel({0.6}, MeanSpec::constant(1.5)), 120, RandomStream(6));
    const ScoreScanner scan(s, kInar1);
    for (double delta : {0.0, 0.6, 0.8, 0.9, 1.0}) {
        for (int tau = 3; tau <= 120; ++tau) EXPECT_GE(scan.evaluate({tau, delta}).statistic, 0.0);
    }
}

TEST(ScoreScanner, PlantedOutlierStandsOut) {
    const double lambda = 2.0;
    const InarModel model({0.3}, MeanSpec::constant(lambda));
    int hits = 0;
    double kappa_sum = 0.0;
    constexpr int kReps = 100;
    for (int rep = 0; rep < kReps; ++rep) {
        const auto s = simulate_contaminated(model, {{100, 0.0, 8.0 * std::sqrt(lambda)}}, 200, {},
                                             RandomStream(static_cast<std::uint64_t>(rep)));
        const ScoreScanner scan(s, kInar1);
        const auto cell = scan.evaluate({100, 0.0});
        hits += cell.statistic > 3.841 ? 1 : 0;
        kappa_sum += cell.kappa_hat;
    }
    EXPECT_GE(hits, 95);
    EXPECT_GT(kappa_sum / kReps, 0.5 * 8.0 * std::sqrt(lambda));
}

TEST(ScoreStatistic, WrapperMatchesScanner) {
    const auto s = simulate(InarModel({0.3}, MeanSpec::constant(2.0)), 150, RandomStream(7));
    EXPECT_EQ(score_statistic(s, kInar1, 75, 0.6), ScoreScanner(s, kInar1).evaluate({75, 0.6}).statistic);
}

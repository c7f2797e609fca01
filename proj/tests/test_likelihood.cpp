#include "inar/errors.hpp"
#include "inar/likelihood.hpp"
#include "inar/random.hpp"
#include "inar/simulate.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace inar;
using namespace inar::oracle;

TEST(TransitionLogProb, NoSurvivorsPossible) {
    const std::vector<Count> lags{0};
    const std::vector<double> alphas{0.3};
    EXPECT_NEAR(transition_log_prob(0, lags, alphas, 2.0), -2.0, 1e-14);
}

TEST(TransitionLogProb, ZeroAlphaIsPoisson) {
    const std::vector<double> alphas{0.0};
    for (Count lag : {0, 3, 17}) {
        const std::vector<Count> lags{lag};
        for (Count y : {0, 1, 5, 12}) {
            EXPECT_NEAR(transition_log_prob(y, lags, alphas, 2.5), poisson_log_pmf(y, 2.5), 1e-13);
        }
    }
}

TEST(TransitionLogProb, SingleLagConvolution) {
    const std::vector<Count> lags{1};
    const std::vector<double> alphas{0.3};
    EXPECT_NEAR(transition_log_prob(1, lags, alphas, 2.0), std::log(1.7 * std::exp(-2.0)), 1e-13);
    EXPECT_NEAR(transition_log_prob(1, lags, alphas, 2.0), -1.46935, 5e-5);
}

TEST(TransitionLogProb, NonPositiveMeanIsDomainError) {
    const std::vector<Count> lags{1};
    const std::vector<double> alphas{0.3};
    EXPECT_THROW((void)transition_log_prob(1, lags, alphas, 0.0), DomainError);
    EXPECT_THROW((void)transition_log_prob(1, lags, alphas, -1.0), DomainError);
}

TEST(TransitionLogProb, NormalizesOverTruncatedSupport) {
    struct Case {
        std::vector<Count> lags;
        std::vector<double> alphas;
        double mean;
    };
    const std::vector<Case> cases{{{4}, {0.3}, 2.0}, {{25}, {0.9}, 2.0}, {{7, 3}, {0.5, 0.3}, 2.0}, {{0}, {0.5}, 40.0}};
    for (const auto& c : cases) {
        // upper bound of the support holding all but 1e-15 of the mass
        Count m = 0;
        for (std::size_t i = 0; i < c.lags.size(); ++i) m += c.lags[i];
        m += static_cast<Count>(c.mean + 12.0 * std::sqrt(c.mean) + 40.0);
        double total = 0.0;
        for (Count y = 0; y <= m; ++y) total += std::exp(transition_log_prob(y, c.lags, c.alphas, c.mean));
        EXPECT_GE(total, 1.0 - 1e-12);
        EXPECT_LE(total, 1.0 + 1e-12);
    }
}

TEST(TransitionLogProb, LargeCountsStayFinite) {
    const std::vector<Count> lags{900};
    const std::vector<double> alphas{0.9};
    const double lp = transition_log_prob(850, lags, alphas, 3.0);
    EXPECT_TRUE(std::isfinite(lp));
    EXPECT_NEAR(lp, static_cast<double>(log(wide_transition(850, {900}, {0.9}, 3.0))), 1e-9 * std::abs(lp));
}

TEST(ConditionalLoglik, IidPoissonWhenAlphaZero) {
    const CountSeries s({3, 1, 4, 1, 5, 9, 2, 6});
    const ConditionalModel m{1, nullptr, {}};
    double expected = 0.0;
    for (int t = 2; t <= s.length(); ++t) expected += poisson_log_pmf(s.at(t), 2.7);
    EXPECT_NEAR(conditional_loglik(ThetaVector::constant({0.0}, 2.7), s, m), expected, 1e-12);
}

TEST(ConditionalLoglik, AllZeroSeries) {
    const CountSeries s({0, 0, 0, 0, 0});
    EXPECT_NEAR(conditional_loglik(ThetaVector::constant({0.3}, 2.0), s, {1, nullptr, {}}), -8.0, 1e-12);
}

TEST(ConditionalLoglik, InfeasibleThetaNamesTime) {
    const CountSeries s({1, 2, 3, 4, 5, 6});
    const ConditionalModel m{1, nullptr, {{4, 0.0}}};
    try {
        (void)conditional_loglik(ThetaVector::constant({0.3}, 1.0, {-2.0}), s, m);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("t = 4"), std::string::npos) << e.what();
    }
    EXPECT_THROW((void)conditional_loglik(ThetaVector::constant({1.0}, 1.0, {0.0}), s, m), DomainError);
    EXPECT_THROW((void)conditional_loglik(ThetaVector::constant({0.3}, 1.0), s, m), ConfigError);
}

TEST(ConditionalLoglik, DivergesAsMeanVanishes) {
    const CountSeries s({0, 3, 0, 2});
    const ConditionalModel m{1, nullptr, {}};
    double prev = 0.0;
    for (double lambda : {1e-1, 1e-3, 1e-6, 1e-9}) {
        const double ll = conditional_loglik(ThetaVector::constant({0.3}, lambda), s, m);
        EXPECT_LT(ll, prev);
        prev = ll;
    }
    EXPECT_LT(prev, -50.0);
}

TEST(ConditionalLoglik, MatchesExtendedPrecisionOracle) {
    RandomStream master(555);
    for (int inst = 0; inst < 60; ++inst) {
        const auto c = random_instance(master.substream(static_cast<std::uint64_t>(inst)));
        const double ll = conditional_loglik(c.theta, c.series, c.model);
        const double oracle = oracle_loglik(c.theta, c.series, c.model);
        EXPECT_NEAR(ll, oracle, 1e-10 * std::abs(oracle)) << "instance " << inst;
    }
}

TEST(ScoreVector, PoissonScoreWhenAlphaZero) {
    const CountSeries s({3, 1, 4, 1, 5, 9, 2, 6});
    const double lambda = 2.7;
    const auto g = score_vector(ThetaVector::constant({0.0}, lambda), s, {1, nullptr, {}});
    double expected = 0.0;
    for (int t = 2; t <= s.length(); ++t) expected += s.at(t) / lambda - 1.0;
    EXPECT_NEAR(g(1), expected, 1e-12);
}

TEST(ScoreVector, KappaComponentZeroWhenProfileNeverActive) {
    const CountSeries s({3, 1, 4, 1, 5, 9, 2, 6});
    const ConditionalModel m{1, nullptr, {{9, 0.5}}};
    const auto g = score_vector(ThetaVector::constant({0.3}, 2.0, {1.5}), s, m);
    EXPECT_EQ(g(2), 0.0);
}

TEST(ScoreVector, MatchesCentralDifferences) {
    RandomStream master(777);
    for (int inst = 0; inst < 100; ++inst) {
        const auto c = random_instance(master.substream(static_cast<std::uint64_t>(inst)));
        const Eigen::VectorXd g = score_vector(c.theta, c.series, c.model);
        for (int k = 0; k < g.size(); ++k) {
            const double h = 1e-6 * (1.0 + std::abs(c.theta.values()(k)));
            const double fd = (conditional_loglik(perturbed(c.theta, k, h), c.series, c.model) -
                               conditional_loglik(perturbed(c.theta, k, -h), c.series, c.model)) /
                              (2.0 * h);
            EXPECT_NEAR(g(k), fd, 1e-6 * std::max(1.0, std::abs(fd))) << "instance " << inst << " k " << k;
        }
    }
}

TEST(HessianMatrix, PoissonInformationWhenAlphaZero) {
    const CountSeries s({3, 1, 4, 1, 5, 9, 2, 6});
    const double lambda = 2.7;
    const auto h = hessian_matrix(ThetaVector::constant({0.0}, lambda), s, {1, nullptr, {}});
    double expected = 0.0;
    for (int t = 2; t <= s.length(); ++t) expected -= s.at(t) / (lambda * lambda);
    EXPECT_NEAR(h(1, 1), expected, 1e-12);
}

TEST(HessianMatrix, AllZeroSeriesMatchesDifferencedScore) {
    const CountSeries s({0, 0, 0, 0, 0, 0});
    const ConditionalModel m{1, nullptr, {}};
    const auto theta = ThetaVector::constant({0.3}, 2.0);
    const auto h = hessian_matrix(theta, s, m);
    for (int k = 0; k < 2; ++k) {
        const double step = 1e-5;
        const Eigen::VectorXd fd = (score_vector(perturbed(theta, k, step), s, m) -
                                    score_vector(perturbed(theta, k, -step), s, m)) /
                                   (2.0 * step);
        for (int l = 0; l < 2; ++l) EXPECT_NEAR(h(l, k), fd(l), 1e-4 * std::max(1.0, std::abs(fd(l))));
    }
    EXPECT_EQ(h(1, 1), 0.0);
}

TEST(HessianMatrix, SymmetricAndMatchesDifferencedScore) {
    RandomStream master(888);
    for (int inst = 0; inst < 100; ++inst) {
        const auto c = random_instance(master.substream(static_cast<std::uint64_t>(inst)));
        const Eigen::MatrixXd h = hessian_matrix(c.theta, c.series, c.model);
        EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-12) << "instance " << inst;
        for (int k = 0; k < h.cols(); ++k) {
            const double step = 1e-5 * (1.0 + std::abs(c.theta.values()(k)));
            const Eigen::VectorXd fd = (score_vector(perturbed(c.theta, k, step), c.series, c.model) -
                                        score_vector(perturbed(c.theta, k, -step), c.series, c.model)) /
                                       (2.0 * step);
            for (int l = 0; l < h.rows(); ++l) {
                EXPECT_NEAR(h(l, k), fd(l), 1e-4 * std::max(1.0, std::abs(fd(l))))
                    << "instance " << inst << " entry " << l << "," << k;
            }
        }
    }
}

TEST(ThetaVector, LayoutAndAccessors) {
    const auto theta = ThetaVector::constant({0.5, 0.2}, 3.0, {4.0});
    EXPECT_EQ(theta.layout().size(), 4);
    EXPECT_EQ(theta.alphas(), (std::vector<double>{0.5, 0.2}));
    EXPECT_EQ(theta.mean_params()(0), 3.0);
    EXPECT_EQ(theta.kappa(0), 4.0);
    const auto wider = theta.with_zero_kappas(1);
    EXPECT_EQ(wider.layout().interventions, 2);
    EXPECT_EQ(wider.kappa(1), 0.0);
    EXPECT_THROW(ThetaVector(ParameterLayout{1, 1, 0}, Eigen::VectorXd::Zero(3)), ConfigError);
}

#include "inar/errors.hpp"
#include "inar/io.hpp"
#include "inar/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace inar;

namespace {

CountSeries parse(const std::string& text) {
    std::istringstream in(text);
    return read_counts_csv(in);
}

std::size_t error_row(const std::string& text) {
    try {
        (void)parse(text);
    } catch (const ParseError& e) {
        return e.row();
    }
    ADD_FAILURE() << "no ParseError for " << text;
    return 0;
}

}  // namespace

TEST(ReadCountsCsv, SingleColumn) {
    const auto s = parse("3\n5\n2\n");
    EXPECT_EQ(s, CountSeries({3, 5, 2}));
    EXPECT_FALSE(s.has_labels());
}

TEST(ReadCountsCsv, LabelledRows) {
    const auto s = parse("2007-01,18\n2007-02,25\n");
    EXPECT_EQ(s.length(), 2);
    EXPECT_EQ(s.at(1), 18);
    EXPECT_EQ(s.at(2), 25);
    EXPECT_EQ(s.labels(), (std::vector<std::string>{"2007-01", "2007-02"}));
}

TEST(ReadCountsCsv, HeaderBlankLinesAndCrlf) {
    const auto s = parse("month,cases\r\n2007-01, 18\r\n\r\n2007-02,25\r\n");
    EXPECT_EQ(s.values()[0], 18);
    EXPECT_EQ(s.values()[1], 25);
    EXPECT_EQ(parse("count\n4\n"), CountSeries({4}));
}

TEST(ReadCountsCsv, ErrorsCarryTheRow) {
    EXPECT_EQ(error_row("3.5\n"), 1U);
    EXPECT_EQ(error_row("1\n2\n-3\n"), 3U);
    EXPECT_EQ(error_row("count\n1\nabc\n"), 3U);
    EXPECT_EQ(error_row("a,1\nb,\n"), 2U);
    EXPECT_EQ(error_row("1\na,2\n"), 2U);
    EXPECT_EQ(error_row("1,2,3\n"), 1U);
    EXPECT_EQ(error_row("1e3\n"), 1U);
    EXPECT_THROW((void)parse(""), ParseError);
    EXPECT_THROW((void)read_counts_csv(std::filesystem::path("/nonexistent/file.csv")), ParseError);
}

TEST(WriteCountsCsv, RoundTrip) {
    const auto s = simulate(InarModel({0.6}, MeanSpec::constant(4.0)), 300, RandomStream(1));
    std::ostringstream out;
    write_counts_csv(out, s);
    EXPECT_EQ(parse(out.str()), s);

    const CountSeries labelled({1, 0, 7}, {"a", "b", "c"});
    std::ostringstream out2;
    write_counts_csv(out2, labelled);
    EXPECT_EQ(out2.str(), "label,count\na,1\nb,0\nc,7\n");
    EXPECT_EQ(parse(out2.str()), labelled);

    std::ostringstream out3;
    EXPECT_THROW(write_counts_csv(out3, CountSeries({1}, {"x,y"})), ConfigError);
}

TEST(SeasonalCovariates, Examples) {
    const auto x = build_seasonal_covariates(168, 12, true);
    ASSERT_EQ(x.rows(), 168);
    ASSERT_EQ(x.cols(), 4);
    EXPECT_NEAR(x(5, 1), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(x(5, 2), -1.0);
    EXPECT_NEAR(x(11, 1), 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(x(11, 2), 1.0);
    EXPECT_DOUBLE_EQ(x(167, 3), 1.0);
    EXPECT_DOUBLE_EQ(x(0, 0), 1.0);
    EXPECT_EQ(build_seasonal_covariates(10, 4, false).cols(), 3);
    EXPECT_THROW((void)build_seasonal_covariates(10, 1, false), ConfigError);
}

TEST(ReadCovariatesCsv, HeaderAndErrors) {
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = dir / "inar_covariates_good.csv";
    std::ofstream(good) << "one,season\n1,0.5\n1,-0.25\n";
    const auto x = read_covariates_csv(good);
    ASSERT_EQ(x.rows(), 2);
    ASSERT_EQ(x.cols(), 2);
    EXPECT_EQ(x(1, 1), -0.25);
    const auto bad = dir / "inar_covariates_bad.csv";
    std::ofstream(bad) << "1,0.5\n1\n";
    try {
        (void)read_covariates_csv(bad);
        ADD_FAILURE();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2U);
    }
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
}

TEST(SeasonalCovariates, LeadInRowsPrecedeTimeOne) {
    const auto plain = build_seasonal_covariates(24, 12, true);
    const auto led = build_seasonal_covariates(24, 12, true, 30);
    ASSERT_EQ(led.rows(), 54);
    EXPECT_TRUE(led.bottomRows(24).isApprox(plain, 1e-14));
    EXPECT_NEAR(led(29, 2), 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(led(29, 3), 0.0);
    EXPECT_DOUBLE_EQ(led(0, 3), -29.0 / 24.0);
}

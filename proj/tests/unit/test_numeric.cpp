#include "fairbias/numeric.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace fairbias;

TEST(Numeric, OrderedSumIgnoresInputOrder)
{
    std::vector<double> v = { 1e16, 1.0, -1e16, 3.5, 1e-3, 2.25 };
    double forward = ordered_sum(v);
    std::reverse(v.begin(), v.end());
    EXPECT_EQ(forward, ordered_sum(v));
    EXPECT_DOUBLE_EQ(forward, 6.751);
}

TEST(Numeric, CompensatedSumRecoversCancelledTerms)
{
    std::vector<double> v = { 1.0, 1e100, 1.0, -1e100 };
    EXPECT_EQ(compensated_sum(v), 2.0);
}

TEST(Numeric, SummarizeTwoReplicates)
{
    std::vector<MaybeValue> v = { 0.1, 0.3 };
    auto d = summarize(v);
    ASSERT_TRUE(d.mean && d.std_error);
    EXPECT_NEAR(*d.mean, 0.2, 1e-15);
    EXPECT_NEAR(*d.std_error, 0.1, 1e-15);
    EXPECT_EQ(d.defined, 2u);
}

TEST(Numeric, SummarizeSkipsUndefined)
{
    std::vector<MaybeValue> one = { std::nullopt, 0.4, std::nullopt };
    auto d = summarize(one);
    EXPECT_EQ(d.defined, 1u);
    EXPECT_EQ(d.total, 3u);
    EXPECT_EQ(d.mean, 0.4);
    EXPECT_FALSE(d.std_error);

    std::vector<MaybeValue> none = { std::nullopt, std::nullopt };
    EXPECT_FALSE(summarize(none).mean);
}

TEST(Numeric, AverageRanksShareTies)
{
    std::vector<double> v = { 3.0, 1.0, 3.0, 2.0 };
    EXPECT_EQ(average_ranks(v), (std::vector<double>{ 3.5, 1.0, 3.5, 2.0 }));
}

TEST(Numeric, Spearman)
{
    std::vector<double> x = { 1, 2, 3, 4, 5 };
    std::vector<double> down = { 9, 7, 5, 3, 1 };
    std::vector<double> flat = { 2, 2, 2, 2, 2 };
    EXPECT_NEAR(*spearman(x, down), -1.0, 1e-15);
    EXPECT_NEAR(*spearman(x, x), 1.0, 1e-15);
    EXPECT_FALSE(spearman(x, flat));
}

TEST(Numeric, RatioDifferenceIsExact)
{
    Ratio third{ 1, 3 };
    Ratio two_thirds{ 2, 3 };
    Ratio one{ 3, 3 };
    // 1 - 2/3 as doubles is not 1/3; the rational path is.
    EXPECT_EQ(*ratio_difference(one, two_thirds), *third.value());
    EXPECT_EQ(*ratio_difference(third, two_thirds), -*third.value());
    EXPECT_FALSE(ratio_difference(Ratio{ 1, 0 }, third));
}

TEST(Numeric, StreamsDependOnEveryTag)
{
    auto a = make_stream(7, { 1, 2 });
    auto b = make_stream(7, { 1, 2 });
    auto c = make_stream(7, { 2, 1 });
    auto d = make_stream(8, { 1, 2 });
    auto first = a();
    EXPECT_EQ(first, b());
    EXPECT_NE(first, c());
    EXPECT_NE(first, d());
    std::vector<std::uint64_t> tags = { 1, 2 };
    EXPECT_EQ(first, make_stream(7, std::span<const std::uint64_t>(tags))());
}

TEST(Numeric, GridTagDistinguishesValues)
{
    EXPECT_NE(grid_tag(0.1), grid_tag(0.2));
    EXPECT_EQ(grid_tag(100.0), grid_tag(100.0));
}

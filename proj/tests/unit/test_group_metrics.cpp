#include "fairbias/group_metrics.hpp"

#include "../oracles/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace fairbias;

namespace {

struct Fixture {
    std::vector<double> y, labels, scores;
    std::vector<int> a;

    [[nodiscard]] Observations obs() const { return { y, labels, scores, a }; }
};

// a1 pairs (y, yhat) = (0,1),(0,0),(1,1); a0 = (0,0),(0,1),(1,0).
Fixture hand_fixture()
{
    Fixture f;
    f.y = { 0, 0, 1, 0, 0, 1 };
    f.labels = { 1, 0, 1, 0, 1, 0 };
    f.scores = { 0.9, 0.2, 0.8, 0.1, 0.7, 0.3 };
    f.a = { 1, 1, 1, 0, 0, 0 };
    return f;
}

Fixture random_fixture(std::mt19937_64& rng, std::size_t n)
{
    std::uniform_int_distribution<int> bit(0, 1);
    std::uniform_int_distribution<int> level(0, 4);
    Fixture f;
    for (std::size_t i = 0; i < n; ++i) {
        f.y.push_back(bit(rng));
        f.labels.push_back(bit(rng));
        f.scores.push_back(level(rng) / 4.0);
        f.a.push_back(bit(rng));
    }
    return f;
}

} // namespace

TEST(GroupMetrics, HandComputedFprAndEo)
{
    auto f = hand_fixture();
    auto fpr = group_cost(MetricKind::FPR, f.obs());
    EXPECT_EQ(fpr.value_a1, 0.5);
    EXPECT_EQ(fpr.value_a0, 0.5);
    EXPECT_EQ(fpr.disc, 0.0);
    auto eo = group_cost(MetricKind::EO, f.obs());
    EXPECT_EQ(eo.value_a1, 1.0);
    EXPECT_EQ(eo.value_a0, 0.0);
    EXPECT_EQ(eo.disc, 1.0);
}

TEST(GroupMetrics, AucCountsTiesAsHalf)
{
    Fixture f;
    f.y = { 1, 1, 0, 0, 1, 0 };
    f.scores = { 0.9, 0.7, 0.8, 0.1, 0.5, 0.5 };
    f.labels = { 1, 1, 1, 0, 1, 1 };
    f.a = { 1, 1, 1, 1, 0, 0 };
    auto auc = group_cost(MetricKind::AUC, f.obs());
    EXPECT_EQ(auc.value_a1, 0.75);
    EXPECT_EQ(auc.value_a0, 0.5);
}

TEST(GroupMetrics, SymmetricGroupsHaveNoDisc)
{
    Fixture f;
    f.y = { 0, 1, 1, 0, 1, 1 };
    f.labels = { 1, 1, 0, 1, 1, 0 };
    f.scores = { 0.6, 0.8, 0.2, 0.6, 0.8, 0.2 };
    f.a = { 0, 0, 0, 1, 1, 1 };
    for (auto m : { MetricKind::FPR, MetricKind::FNR, MetricKind::EO, MetricKind::ZOL, MetricKind::AUC,
             MetricKind::SD, MetricKind::MSE }) {
        auto r = group_cost(m, f.obs());
        if (r.disc) {
            EXPECT_EQ(*r.disc, 0.0) << to_string(m);
        }
    }
}

TEST(GroupMetrics, EmptyConditioningSetIsUndefined)
{
    Fixture f;
    f.y = { 1, 1, 0, 1 };
    f.labels = { 1, 0, 0, 1 };
    f.a = { 1, 1, 0, 0 };
    auto r = group_cost(MetricKind::FPR, f.obs());
    EXPECT_FALSE(r.value_a1);
    EXPECT_EQ(r.value_a0, 0.0);
    EXPECT_FALSE(r.disc);
}

TEST(GroupMetrics, DiscVectorMatchesSingleCalls)
{
    auto f = hand_fixture();
    std::vector<MetricKind> ms = { MetricKind::EO, MetricKind::FNR };
    auto v = disc_vector(f.obs(), ms);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0], group_cost(MetricKind::EO, f.obs()));
    EXPECT_EQ(*v[0].disc, -*v[1].disc);
    EXPECT_TRUE(disc_vector(f.obs(), {}).empty());
}

TEST(GroupMetrics, ScoresRequiredForAucAndMse)
{
    auto f = hand_fixture();
    f.scores.clear();
    EXPECT_THROW(group_cost(MetricKind::AUC, f.obs()), ConfigError);
    EXPECT_THROW(group_cost(MetricKind::MSE, f.obs()), ConfigError);
    EXPECT_NO_THROW(group_cost(MetricKind::SD, f.obs()));
}

TEST(GroupMetrics, PermutationInvariant)
{
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 50; ++rep) {
        auto f = random_fixture(rng, 60);
        std::vector<std::size_t> order(f.y.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Fixture g;
        for (auto i : order) {
            g.y.push_back(f.y[i]);
            g.labels.push_back(f.labels[i]);
            g.scores.push_back(f.scores[i]);
            g.a.push_back(f.a[i]);
        }
        for (auto m : { MetricKind::FPR, MetricKind::FNR, MetricKind::EO, MetricKind::ZOL, MetricKind::AUC,
                 MetricKind::SD, MetricKind::MSE }) {
            EXPECT_EQ(group_cost(m, f.obs()), group_cost(m, g.obs())) << to_string(m);
        }
    }
}

TEST(GroupMetrics, MatchesOracleOnSmallFixtures)
{
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        auto f = random_fixture(rng, 1 + rep % 40);
        for (auto m : { MetricKind::FPR, MetricKind::FNR, MetricKind::EO, MetricKind::ZOL, MetricKind::AUC,
                 MetricKind::SD }) {
            EXPECT_EQ(group_cost(m, f.obs()), oracle::metric(m, f.y, f.labels, f.scores, f.a)) << to_string(m);
        }
    }
}

TEST(GroupMetrics, ParseNames)
{
    EXPECT_EQ(parse_metric("EO"), MetricKind::EO);
    EXPECT_THROW(parse_metric("eo"), ConfigError);
    EXPECT_THROW(parse_metrics(nlohmann::json::parse(R"(["FPR","FPR"])")), ConfigError);
    EXPECT_FALSE(valid_for(MetricKind::MSE, Task::classification));
    EXPECT_FALSE(valid_for(MetricKind::AUC, Task::regression));
}

#include "fairbias/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

using namespace fairbias;

namespace {

Schema small_schema()
{
    return Schema::from_json(nlohmann::json::parse(R"({
        "target": "y", "positive_label": "yes", "sensitive": "sex", "privileged_value": "m",
        "features": [{"name": "age", "kind": "numeric"}, {"name": "colour", "kind": "categorical"}]
    })"));
}

std::vector<std::vector<std::string>> small_rows()
{
    return {
        { "age", "colour", "sex", "y" },
        { "1", "x", "m", "yes" },
        { "2", "y", "f", "no" },
        { "3", "z", "m", "no" },
        { "4", "x", "f", "yes" },
    };
}

// 40 rows: group a1 every fourth row, label 1 on every third row.
Dataset fixture(std::size_t n = 40)
{
    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
        ds.X(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
        ds.y.push_back(i % 3 == 0 ? 1.0 : 0.0);
        ds.a.push_back(i % 4 == 0 ? 1 : 0);
        ds.row_ids.push_back(i);
    }
    ds.feature_names = { "x" };
    return ds;
}

DataErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const DataError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no DataError thrown";
    return DataErrorCode::empty_dataset;
}

} // namespace

TEST(Dataset, StandardizesWithPopulationSd)
{
    auto ds = encode_rows(small_rows(), small_schema());
    ASSERT_EQ(ds.size(), 4u);
    // (x - 2.5) / sqrt(5/4): divide by n, not n - 1.
    EXPECT_NEAR(ds.X(0, 0), -1.3416, 1e-4);
    EXPECT_NEAR(ds.X(1, 0), -0.4472, 1e-4);
    EXPECT_NEAR(ds.X(2, 0), 0.4472, 1e-4);
    EXPECT_NEAR(ds.X(3, 0), 1.3416, 1e-4);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < 4; ++i) {
        sq += ds.X(i, 0) * ds.X(i, 0);
    }
    EXPECT_NEAR(sq / 4.0, 1.0, 1e-12);
}

TEST(Dataset, OneIndicatorPerLevel)
{
    auto ds = encode_rows(small_rows(), small_schema());
    EXPECT_EQ(ds.dimension(), 4u);
    EXPECT_EQ(ds.feature_names, (std::vector<std::string>{ "age", "colour=x", "colour=y", "colour=z" }));
    EXPECT_EQ(ds.X(0, 1), 1.0);
    EXPECT_EQ(ds.X(2, 3), 1.0);
    EXPECT_EQ(ds.y, (std::vector<double>{ 1, 0, 0, 1 }));
    EXPECT_EQ(ds.a, (std::vector<int>{ 0, 1, 0, 1 }));
}

TEST(Dataset, EncodingIsIdempotent)
{
    auto first = encode_rows(small_rows(), small_schema());
    auto second = encode_rows(small_rows(), small_schema());
    EXPECT_EQ(first.X, second.X);
}

TEST(Dataset, NamedErrors)
{
    auto rows = small_rows();
    rows[3][2] = "x";
    EXPECT_EQ(code_of([&] { encode_rows(rows, small_schema()); }), DataErrorCode::sensitive_not_binary);

    rows = small_rows();
    rows[2][0] = "two";
    EXPECT_EQ(code_of([&] { encode_rows(rows, small_schema()); }), DataErrorCode::unparsable_numeric);

    rows = small_rows();
    rows[0][1] = "color";
    EXPECT_EQ(code_of([&] { encode_rows(rows, small_schema()); }), DataErrorCode::missing_column);

    rows = small_rows();
    rows[1][0] = "";
    EXPECT_EQ(code_of([&] { encode_rows(rows, small_schema()); }), DataErrorCode::missing_value);

    // Both rows belong to the same group, so the privileged level is absent.
    rows = small_rows();
    for (auto& r : rows) {
        if (r[2] == "m") {
            r[2] = "u";
        }
    }
    EXPECT_EQ(code_of([&] { encode_rows(rows, small_schema()); }), DataErrorCode::empty_group);
}

TEST(Dataset, SchemaRejectsUnknownKeys)
{
    EXPECT_THROW(Schema::from_json(nlohmann::json::parse(R"({"target":"y","positive_label":"1","sensitive":"s",
        "privileged_value":"a","features":[{"name":"x"}],"colour":1})")),
        ConfigError);
}

TEST(Dataset, PopulationRatio)
{
    auto ds = fixture(10);
    ds.a = { 1, 1, 1, 0, 0, 0, 0, 0, 0, 0 };
    EXPECT_DOUBLE_EQ(population_ratio(ds), 0.3);
    ds.a = { 1, 0, 1, 0, 1, 0, 1, 0, 1, 0 };
    EXPECT_DOUBLE_EQ(population_ratio(ds), 0.5);
}

TEST(Dataset, DrawHasExactGroupCounts)
{
    auto ds = fixture(200);
    SamplingPlan plan{ 30, 12, 5, 99, false };
    for (std::size_t k = 0; k < plan.replicates; ++k) {
        auto s = draw_sample(ds, plan, k);
        EXPECT_EQ(s.group_size(0), 30u);
        EXPECT_EQ(s.group_size(1), 12u);
        std::set<std::size_t> ids(s.row_ids.begin(), s.row_ids.end());
        EXPECT_EQ(ids.size(), s.size());
    }
}

TEST(Dataset, DrawIsDeterministicAndOrderIndependent)
{
    auto ds = fixture(200);
    SamplingPlan plan{ 20, 10, 3, 5, false };
    auto late = draw_sample(ds, plan, 2);
    auto early = draw_sample(ds, plan, 0);
    EXPECT_EQ(draw_sample(ds, plan, 2).row_ids, late.row_ids);
    EXPECT_EQ(draw_sample(ds, plan, 0).row_ids, early.row_ids);
    EXPECT_NE(early.row_ids, late.row_ids);
}

TEST(Dataset, ExhaustiveDrawIsPermutation)
{
    auto ds = fixture(40);
    SamplingPlan plan{ ds.group_size(0), ds.group_size(1), 1, 3, false };
    auto s = draw_sample(ds, plan, 0);
    auto ids = s.row_ids;
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(ids, ds.row_ids);
}

TEST(Dataset, DrawBeyondPoolFails)
{
    auto ds = fixture(40);
    SamplingPlan plan{ 1, ds.group_size(1) + 1, 1, 3, false };
    EXPECT_EQ(code_of([&] { draw_sample(ds, plan, 0); }), DataErrorCode::pool_exhausted);
    plan.with_replacement = true;
    EXPECT_EQ(draw_sample(ds, plan, 0).group_size(1), ds.group_size(1) + 1);
}

TEST(Dataset, PlanAtRatioRounds)
{
    auto plan = SamplingPlan::at_ratio(1000, 0.31, 30, 1);
    EXPECT_EQ(plan.m1, 310u);
    EXPECT_EQ(plan.m0, 690u);
}

TEST(Dataset, HoldoutIsStratifiedAndDisjoint)
{
    auto ds = fixture(40);
    auto split = holdout_split(ds, 0.3, 11);
    std::set<std::size_t> train(split.train_pool.row_ids.begin(), split.train_pool.row_ids.end());
    for (auto id : split.test.row_ids) {
        EXPECT_FALSE(train.contains(id));
    }
    EXPECT_EQ(train.size() + split.test.size(), ds.size());

    auto strata = [](const Dataset& d) {
        std::map<std::pair<int, double>, std::size_t> m;
        for (std::size_t i = 0; i < d.size(); ++i) {
            ++m[{ d.a[i], d.y[i] }];
        }
        return m;
    };
    auto whole = strata(ds);
    auto test = strata(split.test);
    for (const auto& [key, count] : whole) {
        double expected = 0.3 * static_cast<double>(count);
        EXPECT_LE(std::abs(static_cast<double>(test[key]) - expected), 1.0);
        EXPECT_GE(test[key], 1u);
    }
    EXPECT_NEAR(static_cast<double>(split.test.size()), 12.0, 2.0);

    auto again = holdout_split(ds, 0.3, 11);
    EXPECT_EQ(again.test.row_ids, split.test.row_ids);
}

TEST(Dataset, HoldoutNamesTinyStratum)
{
    auto ds = fixture(40);
    // Leave a single positive in group a1.
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.a[i] == 1 && ds.y[i] == 1.0 && i > 0) {
            ds.y[i] = 0.0;
        }
    }
    EXPECT_EQ(code_of([&] { holdout_split(ds, 0.3, 1); }), DataErrorCode::stratum_too_small);
}

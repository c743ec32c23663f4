#include "fairbias/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace fairbias;

TEST(Synth, ExactGroupShare)
{
    SynthSpec s;
    s.n = 1000;
    s.seed = 3;
    auto ds = generate(s);
    EXPECT_EQ(ds.group_size(1), 310u);
    EXPECT_NEAR(population_ratio(ds), 0.31, 0.01);
}

TEST(Synth, Deterministic)
{
    SynthSpec s;
    s.n = 300;
    s.seed = 11;
    EXPECT_EQ(synth_table(s), synth_table(s));
    s.seed = 12;
    auto other = synth_table(s);
    s.seed = 11;
    EXPECT_NE(synth_table(s), other);
}

TEST(Synth, TableLoadsBack)
{
    SynthSpec s;
    s.n = 200;
    s.d = 3;
    auto table = synth_table(s);
    EXPECT_EQ(table[0], (csv::Row{ "x0", "x1", "x2", "group", "y" }));
    auto ds = synth_dataset(s);
    EXPECT_EQ(ds.size(), 200u);
    EXPECT_EQ(ds.dimension(), 3u);
    EXPECT_EQ(ds.X, encode_rows(table, synth_schema(s)).X);
}

TEST(Synth, OffsetsMoveBaseRates)
{
    SynthSpec s;
    s.n = 20000;
    s.offset_a1 = 2.0;
    auto ds = generate(s);
    double pos[2] = { 0, 0 };
    for (std::size_t i = 0; i < ds.size(); ++i) {
        pos[ds.a[i]] += ds.y[i];
    }
    double rate0 = pos[0] / static_cast<double>(ds.group_size(0));
    double rate1 = pos[1] / static_cast<double>(ds.group_size(1));
    EXPECT_GT(rate1, rate0 + 0.2);
}

TEST(Synth, RegressionTask)
{
    SynthSpec s;
    s.n = 100;
    s.task = Task::regression;
    s.noise_sd = 0.1;
    auto ds = synth_dataset(s);
    EXPECT_EQ(ds.task, Task::regression);
}

TEST(Synth, RejectsBadSpecs)
{
    EXPECT_THROW(SynthSpec::from_json(nlohmann::json::parse(R"({"rows": 10})")), ConfigError);
    SynthSpec s;
    s.group1_share = 1.0;
    EXPECT_THROW(s.validate(), ConfigError);
    s = SynthSpec{};
    s.shift = { 1.0 };
    EXPECT_THROW(s.validate(), ConfigError);
    auto round_trip = SynthSpec::from_json(SynthSpec{}.to_json());
    EXPECT_EQ(round_trip.n, SynthSpec{}.n);
}

#include "fairbias/kernels.hpp"
#include "fairbias/synth.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <stdexcept>

using namespace fairbias;

namespace {

Dataset population()
{
    SynthSpec s;
    s.n = 600;
    s.seed = 12;
    return synth_dataset(s);
}

} // namespace

TEST(Kernels, ForEachVisitsEveryIndexOnce)
{
    std::vector<std::atomic<int>> hits(257);
    kernels::for_each_parallel(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) {
        EXPECT_EQ(h.load(), 1);
    }
}

TEST(Kernels, LowestFailingIndexWins)
{
    auto body = [](std::size_t i) {
        if (i == 7 || i == 40) {
            throw std::runtime_error("task " + std::to_string(i));
        }
    };
    for (int threads : { 1, 4 }) {
        try {
            kernels::for_each(64, threads, body);
            FAIL();
        } catch (const std::runtime_error& e) {
            EXPECT_STREQ(e.what(), "task 7");
        }
    }
}

TEST(Kernels, TrainReplicatesSerialEqualsParallel)
{
    auto ds = population();
    SamplingPlan plan{ 60, 30, 6, 77, false };
    LearnerSpec lr;
    for (auto kind : { LearnerKind::logistic_regression, LearnerKind::decision_tree, LearnerKind::knn }) {
        lr.kind = kind;
        auto serial = kernels::train_replicates_serial(ds, plan, lr, ds.X);
        for (int threads : { 2, 4, 8 }) {
            auto parallel = kernels::train_replicates_parallel(ds, plan, lr, ds.X, threads);
            ASSERT_EQ(serial.size(), parallel.size());
            for (std::size_t k = 0; k < serial.size(); ++k) {
                EXPECT_EQ(serial[k].scores, parallel[k].scores);
                EXPECT_EQ(serial[k].labels, parallel[k].labels);
            }
        }
    }
}

TEST(Kernels, PointTermsSerialEqualsParallel)
{
    auto ds = population();
    SamplingPlan plan{ 60, 30, 5, 3, false };
    auto preds = kernels::train_replicates_serial(ds, plan, LearnerSpec{}, ds.X);
    auto ens = make_ensemble(preds, ds, LossKind::zero_one);
    auto serial = kernels::point_terms_serial(ens);
    auto parallel = kernels::point_terms_parallel(ens, 4);
    ASSERT_EQ(serial.size(), parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].main, parallel[i].main);
        EXPECT_EQ(serial[i].bias, parallel[i].bias);
        EXPECT_EQ(serial[i].variance, parallel[i].variance);
        EXPECT_EQ(serial[i].disagree_count, parallel[i].disagree_count);
    }
}

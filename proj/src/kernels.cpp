#include "fairbias/kernels.hpp"

#include <omp.h>

#include <exception>

namespace fairbias::kernels {

namespace {

void rethrow_first(const std::vector<std::exception_ptr>& errors)
{
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

Predictions train_one(const Dataset& pool, const SamplingPlan& plan, const LearnerSpec& learner, const Matrix& eval_X,
    std::size_t k)
{
    Dataset sample = draw_sample(pool, plan, k);
    FittedModel model = fit(learner, sample);
    model.fingerprint = { plan.m0, plan.m1, plan.seed, k };
    return model.predict(eval_X);
}

} // namespace

int resolve_threads(int threads)
{
    return threads > 0 ? threads : omp_get_max_threads();
}

void for_each_serial(std::size_t count, const std::function<void(std::size_t)>& body)
{
    std::vector<std::exception_ptr> errors(count);
    for (std::size_t i = 0; i < count; ++i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    rethrow_first(errors);
}

void for_each_parallel(std::size_t count, int threads, const std::function<void(std::size_t)>& body)
{
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<std::int64_t>(count);
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(threads))
    for (std::int64_t i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    rethrow_first(errors);
}

void for_each(std::size_t count, int threads, const std::function<void(std::size_t)>& body)
{
    if (resolve_threads(threads) == 1 || count < 2) {
        for_each_serial(count, body);
    } else {
        for_each_parallel(count, threads, body);
    }
}

std::vector<Predictions> train_replicates_serial(
    const Dataset& pool, const SamplingPlan& plan, const LearnerSpec& learner, const Matrix& eval_X)
{
    std::vector<Predictions> out(plan.replicates);
    for (std::size_t k = 0; k < plan.replicates; ++k) {
        out[k] = train_one(pool, plan, learner, eval_X, k);
    }
    return out;
}

std::vector<Predictions> train_replicates_parallel(
    const Dataset& pool, const SamplingPlan& plan, const LearnerSpec& learner, const Matrix& eval_X, int threads)
{
    std::vector<Predictions> out(plan.replicates);
    for_each_parallel(plan.replicates, threads,
        [&](std::size_t k) { out[k] = train_one(pool, plan, learner, eval_X, k); });
    return out;
}

std::vector<PointDecomposition> point_terms_serial(const PredictionEnsemble& ens)
{
    std::vector<PointDecomposition> out(ens.points());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = decompose_point(ens, i);
    }
    return out;
}

std::vector<PointDecomposition> point_terms_parallel(const PredictionEnsemble& ens, int threads)
{
    std::vector<PointDecomposition> out(ens.points());
    const auto n = static_cast<std::int64_t>(out.size());
#pragma omp parallel for schedule(static) num_threads(resolve_threads(threads))
    for (std::int64_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = decompose_point(ens, static_cast<std::size_t>(i));
    }
    return out;
}

} // namespace fairbias::kernels

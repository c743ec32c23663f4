#pragma once

#include "fairbias/dataset.hpp"
#include "fairbias/decomposition.hpp"
#include "fairbias/learners.hpp"

#include <cstddef>
#include <functional>
#include <vector>

// Data-parallel kernels. Each has a serial reference with identical results;
// outputs are written by task index, so the schedule never affects them.
namespace fairbias::kernels {

// Hardware default when threads <= 0.
int resolve_threads(int threads);

// Runs body(i) for i in [0, count). An exception from any task is rethrown
// after the loop; when several fail, the one with the lowest index wins.
void for_each_serial(std::size_t count, const std::function<void(std::size_t)>& body);
void for_each_parallel(std::size_t count, int threads, const std::function<void(std::size_t)>& body);
void for_each(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

// Draw replicate k of plan, fit, predict on eval_X. One entry per replicate.
std::vector<Predictions> train_replicates_serial(
    const Dataset& pool, const SamplingPlan& plan, const LearnerSpec& learner, const Matrix& eval_X);
std::vector<Predictions> train_replicates_parallel(
    const Dataset& pool, const SamplingPlan& plan, const LearnerSpec& learner, const Matrix& eval_X, int threads);

std::vector<PointDecomposition> point_terms_serial(const PredictionEnsemble& ens);
std::vector<PointDecomposition> point_terms_parallel(const PredictionEnsemble& ens, int threads);

} // namespace fairbias::kernels

#pragma once

#include "fairbias/common.hpp"
#include "fairbias/dataset.hpp"
#include "fairbias/group_metrics.hpp"
#include "fairbias/learners.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fairbias {

enum class LossKind { squared, zero_one, absolute };

std::string_view to_string(LossKind loss);

// squared for MSE, zero-one for the confusion-matrix metrics.
LossKind loss_for(MetricKind metric);

// K models evaluated on one evaluation set. Row k of scores/labels holds
// model k; for regression labels equal scores.
struct PredictionEnsemble {
    Matrix scores;
    Matrix labels;
    std::vector<double> eval_y;
    std::vector<int> eval_a;
    LossKind loss = LossKind::zero_one;
    Task task = Task::classification;

    [[nodiscard]] std::size_t models() const noexcept { return static_cast<std::size_t>(scores.rows()); }
    [[nodiscard]] std::size_t points() const noexcept { return eval_y.size(); }

    // Per-model view for group_metrics.
    [[nodiscard]] Observations model(std::size_t k) const;

    [[nodiscard]] bool same_evaluation_set(const PredictionEnsemble& other) const noexcept;

    // Throws DataError(dimension_mismatch) on misaligned members or K == 0.
    void validate() const;
};

PredictionEnsemble make_ensemble(std::span<const Predictions> predictions, const Dataset& eval, LossKind loss);

struct MainPrediction {
    std::vector<double> scores; // per-point mean score
    std::vector<double> labels; // majority vote (classification) or mean score (regression)
};

// Majority ties go to label 1 when the mean score is at least 0.5.
MainPrediction main_prediction(const PredictionEnsemble& ens);

// Zero noise throughout: the optimal prediction is taken to be y itself.
struct PointDecomposition {
    double main = 0.0;
    double noise = 0.0;
    double bias = 0.0;
    double variance = 0.0;
    double factor = 1.0; // +1, or -1 for zero-one points with bias 1
    double mean_loss = 0.0;
    // Zero-one only: models in error, models disagreeing with the main label.
    std::int64_t error_count = 0;
    std::int64_t disagree_count = 0;
};

// Single evaluation point; the ensemble's loss must be squared or zero-one.
PointDecomposition decompose_point(const PredictionEnsemble& ens, std::size_t i);

// Throws ConfigError for absolute loss.
std::vector<PointDecomposition> decompose_points(const PredictionEnsemble& ens, int threads = 1);

struct GroupTerms {
    MaybeValue cost;
    MaybeValue noise;
    MaybeValue bias;
    MaybeValue net_variance;
    std::size_t points = 0;
};

// Per group: cost = offset + sign * (noise + bias + net_variance), where the
// terms are means of the point terms over the conditioning subset. sign is -1
// only for EO, whose cost is 1 - (mean zero-one loss on positives).
// `difference` holds a1 - a0 for cost and the signed contributions
// sign * (term_a1 - term_a0) for the terms, so the terms add up to the cost
// difference, which is the mean over models of the model discriminations.
struct DecompositionReport {
    MetricKind metric = MetricKind::ZOL;
    LossKind loss = LossKind::zero_one;
    std::string conditioning; // "all", "y=0" or "y=1"
    double offset = 0.0;
    double sign = 1.0;
    std::size_t models = 0;
    GroupTerms a0;
    GroupTerms a1;
    GroupTerms difference;

    [[nodiscard]] nlohmann::json to_json() const;
};

// Metric must be one of MSE, ZOL, FPR, FNR, EO and match the ensemble's loss.
DecompositionReport decompose_cost(const PredictionEnsemble& ens, MetricKind metric, int threads = 1);
DecompositionReport aggregate_terms(const PredictionEnsemble& ens, std::span<const PointDecomposition> points,
    MetricKind metric);

struct TermDelta {
    MaybeValue a0;
    MaybeValue a1;
    MaybeValue between; // signed contribution to the discrimination gap
};

struct BiasGapReport {
    DecompositionReport target;
    DecompositionReport reference;
    TermDelta bias_delta;
    TermDelta netvar_delta;
    // target.difference.cost - reference.difference.cost; equals
    // bias_delta.between + netvar_delta.between up to rounding.
    MaybeValue total;
    // Disc(main(target)) - Disc(main(reference)).
    MaybeValue main_prediction_gap;
    // Disc(model_k of target) - Disc(main(reference)), one per target model.
    std::vector<MaybeValue> single_model_gaps;

    [[nodiscard]] nlohmann::json to_json() const;
};

// Throws DataError(dimension_mismatch) when the evaluation sets differ.
BiasGapReport decompose_bias_gap(
    const PredictionEnsemble& target, const PredictionEnsemble& reference, MetricKind metric, int threads = 1);

// Statistical-disparity estimation error under absolute loss on binary labels.
struct SdBoundsRecord {
    GroupTerms a0;
    GroupTerms a1;
    MaybeValue delta_noise;
    MaybeValue delta_bias;
    MaybeValue delta_variance;
    MaybeValue upper;
    MaybeValue lower;
    MaybeValue observed; // |mean_k Disc^SD(model_k) - Disc^SD(y)|
    std::optional<bool> within;

    [[nodiscard]] nlohmann::json to_json() const;
};

SdBoundsRecord sd_bounds(const PredictionEnsemble& ens);

// Disc of the main prediction for any metric (AUC and MSE use mean scores).
GroupCostReport main_prediction_cost(const PredictionEnsemble& ens, MetricKind metric);

} // namespace fairbias

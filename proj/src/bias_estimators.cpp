#include "fairbias/bias_estimators.hpp"

#include "fairbias/numeric.hpp"

#include <algorithm>
#include <charconv>

namespace fairbias {

namespace {

std::string format_value(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

BiasEstimate difference(BiasKind kind, MetricKind metric, Estimator estimator, MaybeValue target, MaybeValue reference,
    std::string target_cause, std::string reference_cause, const Descriptor& descriptor, std::size_t models)
{
    BiasEstimate out;
    out.kind = kind;
    out.metric = metric;
    out.estimator = estimator;
    out.target = descriptor.target;
    out.reference = descriptor.reference;
    out.models = models;
    if (target && reference) {
        out.value = *target - *reference;
    } else if (!target) {
        out.cause = "target: " + target_cause;
    } else {
        out.cause = "reference: " + reference_cause;
    }
    return out;
}

void check_aligned(const Observations& model, const PredictionEnsemble& reference)
{
    if (!std::equal(model.y.begin(), model.y.end(), reference.eval_y.begin(), reference.eval_y.end())
        || !std::equal(model.a.begin(), model.a.end(), reference.eval_a.begin(), reference.eval_a.end())) {
        throw DataError(DataErrorCode::dimension_mismatch, "model and reference use different evaluation sets");
    }
}

BiasEstimate ensemble_estimate(BiasKind kind, const PredictionEnsemble& target, const PredictionEnsemble& reference,
    MetricKind metric, Estimator estimator, const Descriptor& descriptor)
{
    if (!target.same_evaluation_set(reference)) {
        throw DataError(DataErrorCode::dimension_mismatch, "target and reference use different evaluation sets");
    }
    std::string tc;
    std::string rc;
    auto t = ensemble_disc(target, metric, estimator, &tc);
    auto r = ensemble_disc(reference, metric, estimator, &rc);
    return difference(kind, metric, estimator, t, r, tc, rc, descriptor, target.models());
}

BiasEstimate single_estimate(BiasKind kind, const Observations& model, const PredictionEnsemble& reference,
    MetricKind metric, const Descriptor& descriptor)
{
    check_aligned(model, reference);
    std::string rc;
    auto t = group_cost(metric, model).disc;
    auto r = ensemble_disc(reference, metric, Estimator::main_prediction, &rc);
    return difference(kind, metric, Estimator::main_prediction, t, r, "empty conditioning set", rc, descriptor, 1);
}

} // namespace

std::string_view to_string(BiasKind kind)
{
    switch (kind) {
    case BiasKind::ssb_ensemble: return "SSB_M_ensemble";
    case BiasKind::ssb_single_set: return "SSB_single_set";
    case BiasKind::urb_ensemble: return "URB_ensemble";
    case BiasKind::urb_single_set: return "URB_single_set";
    }
    return "?";
}

std::string_view to_string(Estimator estimator)
{
    return estimator == Estimator::main_prediction ? "main_prediction" : "mean_over_models";
}

Estimator parse_estimator(std::string_view name)
{
    if (name == "main_prediction") {
        return Estimator::main_prediction;
    }
    if (name == "mean_over_models") {
        return Estimator::mean_over_models;
    }
    throw ConfigError("unknown estimator '" + std::string(name) + "' (expected main_prediction or mean_over_models)");
}

std::vector<std::string> BiasEstimate::csv_header()
{
    return { "kind", "metric", "estimator", "target", "reference", "value", "K" };
}

std::vector<std::string> BiasEstimate::csv_row() const
{
    return { std::string(to_string(kind)), std::string(to_string(metric)), std::string(to_string(estimator)), target,
        reference, value ? format_value(*value) : std::string(), std::to_string(models) };
}

MaybeValue ensemble_disc(const PredictionEnsemble& ens, MetricKind metric, Estimator estimator, std::string* cause)
{
    ens.validate();
    if (estimator == Estimator::main_prediction) {
        auto d = main_prediction_cost(ens, metric).disc;
        if (!d && cause) {
            *cause = "main prediction has an empty conditioning set";
        }
        return d;
    }
    std::vector<double> discs;
    for (std::size_t k = 0; k < ens.models(); ++k) {
        if (auto d = group_cost(metric, ens.model(k)).disc) {
            discs.push_back(*d);
        }
    }
    if (discs.empty()) {
        if (cause) {
            *cause = "no model has a defined discrimination";
        }
        return std::nullopt;
    }
    return ordered_mean(discs);
}

BiasEstimate ssb(const PredictionEnsemble& target, const PredictionEnsemble& reference, MetricKind metric,
    Estimator estimator, const Descriptor& descriptor)
{
    return ensemble_estimate(BiasKind::ssb_ensemble, target, reference, metric, estimator, descriptor);
}

BiasEstimate ssb_single(
    const Observations& model, const PredictionEnsemble& reference, MetricKind metric, const Descriptor& descriptor)
{
    return single_estimate(BiasKind::ssb_single_set, model, reference, metric, descriptor);
}

BiasEstimate urb(const PredictionEnsemble& target, const PredictionEnsemble& reference, MetricKind metric,
    Estimator estimator, const Descriptor& descriptor)
{
    return ensemble_estimate(BiasKind::urb_ensemble, target, reference, metric, estimator, descriptor);
}

BiasEstimate urb_single(
    const Observations& model, const PredictionEnsemble& reference, MetricKind metric, const Descriptor& descriptor)
{
    return single_estimate(BiasKind::urb_single_set, model, reference, metric, descriptor);
}

} // namespace fairbias

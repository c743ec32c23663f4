#pragma once

#include "fairbias/decomposition.hpp"
#include "fairbias/group_metrics.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace fairbias {

enum class BiasKind { ssb_ensemble, ssb_single_set, urb_ensemble, urb_single_set };
enum class Estimator { main_prediction, mean_over_models };

std::string_view to_string(BiasKind kind);
std::string_view to_string(Estimator estimator);
Estimator parse_estimator(std::string_view name);

struct BiasEstimate {
    BiasKind kind = BiasKind::ssb_ensemble;
    MetricKind metric = MetricKind::ZOL;
    Estimator estimator = Estimator::mean_over_models;
    MaybeValue value;
    std::string target;    // e.g. "m=100" or "m0=690,m1=310"
    std::string reference; // e.g. "M=2000"
    std::size_t models = 0;
    std::string cause; // why value is undefined, empty otherwise

    [[nodiscard]] std::vector<std::string> csv_row() const;
    static std::vector<std::string> csv_header();
};

// Disc of the ensemble under the estimator: Disc(main) or the mean of the
// defined per-model discriminations. `cause` receives the reason when undefined.
MaybeValue ensemble_disc(const PredictionEnsemble& ens, MetricKind metric, Estimator estimator, std::string* cause = nullptr);

struct Descriptor {
    std::string target;
    std::string reference;
};

BiasEstimate ssb(const PredictionEnsemble& target, const PredictionEnsemble& reference, MetricKind metric,
    Estimator estimator, const Descriptor& descriptor = {});

// One model's predictions against the reference main prediction.
BiasEstimate ssb_single(const Observations& model, const PredictionEnsemble& reference, MetricKind metric,
    const Descriptor& descriptor = {});

BiasEstimate urb(const PredictionEnsemble& target, const PredictionEnsemble& reference, MetricKind metric,
    Estimator estimator, const Descriptor& descriptor = {});

BiasEstimate urb_single(const Observations& model, const PredictionEnsemble& reference, MetricKind metric,
    const Descriptor& descriptor = {});

} // namespace fairbias

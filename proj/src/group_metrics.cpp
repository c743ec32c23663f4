#include "fairbias/group_metrics.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace fairbias {

namespace {

constexpr std::array kAllMetrics = { MetricKind::FPR, MetricKind::FNR, MetricKind::EO, MetricKind::ZOL,
    MetricKind::MSE, MetricKind::AUC, MetricKind::SD };

void check_shape(MetricKind metric, const Observations& obs)
{
    const auto n = obs.y.size();
    if (obs.a.size() != n || obs.labels.size() != n) {
        throw DataError(DataErrorCode::dimension_mismatch, "y, labels and a must have equal length");
    }
    if (metric == MetricKind::AUC || metric == MetricKind::MSE) {
        if (obs.scores.empty() && n > 0) {
            throw ConfigError(std::string(to_string(metric)) + " requires scores");
        }
        if (obs.scores.size() != n) {
            throw DataError(DataErrorCode::dimension_mismatch, "scores must align with y");
        }
    }
}

Ratio count_ratio(MetricKind metric, const Observations& obs, int group)
{
    Ratio r;
    for (std::size_t i = 0; i < obs.y.size(); ++i) {
        if (obs.a[i] != group) {
            continue;
        }
        const bool positive = obs.y[i] != 0.0;
        const bool predicted = obs.labels[i] != 0.0;
        switch (metric) {
        case MetricKind::FPR:
            if (!positive) {
                ++r.den;
                r.num += predicted ? 1 : 0;
            }
            break;
        case MetricKind::FNR:
            if (positive) {
                ++r.den;
                r.num += predicted ? 0 : 1;
            }
            break;
        case MetricKind::EO:
            if (positive) {
                ++r.den;
                r.num += predicted ? 1 : 0;
            }
            break;
        case MetricKind::ZOL:
            ++r.den;
            r.num += predicted != positive ? 1 : 0;
            break;
        case MetricKind::SD:
            ++r.den;
            r.num += predicted ? 1 : 0;
            break;
        default: break;
        }
    }
    return r;
}

// Mann-Whitney with doubled mid-ranks so every quantity stays integral:
// AUC = (sum of doubled positive ranks - P(P+1)) / (2 P N).
Ratio auc_ratio(const Observations& obs, int group)
{
    std::vector<std::pair<double, bool>> rows;
    for (std::size_t i = 0; i < obs.y.size(); ++i) {
        if (obs.a[i] == group) {
            rows.emplace_back(obs.scores[i], obs.y[i] != 0.0);
        }
    }
    std::sort(rows.begin(), rows.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
    std::int64_t positives = 0;
    std::int64_t rank2 = 0;
    std::size_t i = 0;
    while (i < rows.size()) {
        std::size_t j = i + 1;
        while (j < rows.size() && rows[j].first == rows[i].first) {
            ++j;
        }
        auto block_rank2 = static_cast<std::int64_t>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (rows[k].second) {
                ++positives;
                rank2 += block_rank2;
            }
        }
        i = j;
    }
    const auto negatives = static_cast<std::int64_t>(rows.size()) - positives;
    if (positives == 0 || negatives == 0) {
        return {};
    }
    return { rank2 - positives * (positives + 1), 2 * positives * negatives };
}

MaybeValue mse_value(const Observations& obs, int group)
{
    std::vector<double> terms;
    for (std::size_t i = 0; i < obs.y.size(); ++i) {
        if (obs.a[i] == group) {
            double e = obs.scores[i] - obs.y[i];
            terms.push_back(e * e);
        }
    }
    if (terms.empty()) {
        return std::nullopt;
    }
    return ordered_mean(terms);
}

} // namespace

std::string_view to_string(MetricKind metric)
{
    switch (metric) {
    case MetricKind::FPR: return "FPR";
    case MetricKind::FNR: return "FNR";
    case MetricKind::EO: return "EO";
    case MetricKind::ZOL: return "ZOL";
    case MetricKind::MSE: return "MSE";
    case MetricKind::AUC: return "AUC";
    case MetricKind::SD: return "SD";
    }
    return "?";
}

MetricKind parse_metric(std::string_view name)
{
    for (auto m : kAllMetrics) {
        if (name == to_string(m)) {
            return m;
        }
    }
    throw ConfigError("unknown metric '" + std::string(name) + "' (expected FPR, FNR, EO, ZOL, MSE, AUC or SD)");
}

std::vector<MetricKind> parse_metrics(const nlohmann::json& doc)
{
    if (!doc.is_array()) {
        throw ConfigError("metrics: expected an array of metric names");
    }
    std::vector<MetricKind> out;
    for (const auto& item : doc) {
        if (!item.is_string()) {
            throw ConfigError("metrics: expected an array of metric names");
        }
        auto m = parse_metric(item.get<std::string>());
        if (std::find(out.begin(), out.end(), m) != out.end()) {
            throw ConfigError("metrics: duplicate '" + item.get<std::string>() + "'");
        }
        out.push_back(m);
    }
    return out;
}

bool valid_for(MetricKind metric, Task task) noexcept
{
    return (metric == MetricKind::MSE) == (task == Task::regression);
}

Ratio group_ratio(MetricKind metric, const Observations& obs, int group)
{
    check_shape(metric, obs);
    if (metric == MetricKind::MSE) {
        throw ConfigError("MSE is not a count metric");
    }
    return metric == MetricKind::AUC ? auc_ratio(obs, group) : count_ratio(metric, obs, group);
}

GroupCostReport group_cost(MetricKind metric, const Observations& obs)
{
    check_shape(metric, obs);
    GroupCostReport report;
    report.metric = metric;
    if (metric == MetricKind::MSE) {
        report.value_a0 = mse_value(obs, 0);
        report.value_a1 = mse_value(obs, 1);
        if (report.value_a0 && report.value_a1) {
            report.disc = *report.value_a1 - *report.value_a0;
        }
        return report;
    }
    Ratio r0 = group_ratio(metric, obs, 0);
    Ratio r1 = group_ratio(metric, obs, 1);
    report.value_a0 = r0.value();
    report.value_a1 = r1.value();
    report.disc = ratio_difference(r1, r0);
    return report;
}

std::vector<GroupCostReport> disc_vector(const Observations& obs, std::span<const MetricKind> metrics)
{
    std::vector<GroupCostReport> out;
    out.reserve(metrics.size());
    for (auto m : metrics) {
        out.push_back(group_cost(m, obs));
    }
    return out;
}

} // namespace fairbias

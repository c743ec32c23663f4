#pragma once

#include "fairbias/common.hpp"
#include "fairbias/numeric.hpp"

#include "json.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace fairbias {

// EO is reported as the true positive rate.
enum class MetricKind { FPR, FNR, EO, ZOL, MSE, AUC, SD };

std::string_view to_string(MetricKind metric);
MetricKind parse_metric(std::string_view name);
std::vector<MetricKind> parse_metrics(const nlohmann::json& doc);

[[nodiscard]] bool valid_for(MetricKind metric, Task task) noexcept;

struct GroupCostReport {
    MetricKind metric = MetricKind::ZOL;
    MaybeValue value_a0;
    MaybeValue value_a1;
    MaybeValue disc; // value_a1 - value_a0

    friend bool operator==(const GroupCostReport&, const GroupCostReport&) = default;
};

// Aligned per-row inputs. scores may be empty unless AUC or MSE is requested.
struct Observations {
    std::span<const double> y;
    std::span<const double> labels;
    std::span<const double> scores;
    std::span<const int> a;
};

// Per-group cost as an exact rational for the count metrics and AUC
// (num/den, den == 0 when the conditioning set is empty).
Ratio group_ratio(MetricKind metric, const Observations& obs, int group);

GroupCostReport group_cost(MetricKind metric, const Observations& obs);

std::vector<GroupCostReport> disc_vector(const Observations& obs, std::span<const MetricKind> metrics);

} // namespace fairbias

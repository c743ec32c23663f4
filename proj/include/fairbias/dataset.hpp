#pragma once

#include "fairbias/common.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairbias {

enum class FeatureKind { numeric, categorical };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
};

// Column roles of a tabular file. The privileged value maps to group 0 (a0),
// every other sensitive value to the protected group 1 (a1).
struct Schema {
    std::string target_column;
    std::string positive_label; // classification only
    std::string sensitive_column;
    std::string privileged_value;
    std::vector<FeatureSpec> features;
    Task task = Task::classification;

    static Schema from_json(const nlohmann::json& doc);
    [[nodiscard]] nlohmann::json to_json() const;

    // Throws ConfigError.
    void validate() const;
};

Schema load_schema(const std::string& path);

// Encoded data set. Immutable after construction; copies are cheap enough for
// the sizes involved and every operation returns a new value.
struct Dataset {
    Matrix X;
    std::vector<double> y;
    std::vector<int> a;
    std::vector<std::size_t> row_ids;
    std::vector<std::string> feature_names;
    Task task = Task::classification;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
    [[nodiscard]] std::size_t dimension() const noexcept { return static_cast<std::size_t>(X.cols()); }
    [[nodiscard]] std::size_t group_size(int group) const;
    [[nodiscard]] std::vector<std::size_t> group_rows(int group) const;

    // Rows in the given order (positions into this data set, not row_ids).
    [[nodiscard]] Dataset subset(std::span<const std::size_t> positions) const;

    // Throws DataError on a violated invariant.
    void validate(bool require_both_groups = true) const;
};

Dataset load_csv(const std::string& path, const Schema& schema);
Dataset encode_rows(const std::vector<std::vector<std::string>>& rows, const Schema& schema);

// |G1| / n.
double population_ratio(const Dataset& ds);

struct SamplingPlan {
    std::size_t m0 = 0;
    std::size_t m1 = 0;
    std::size_t replicates = 1;
    std::uint64_t seed = 0;
    bool with_replacement = false;

    [[nodiscard]] std::size_t m() const noexcept { return m0 + m1; }

    // Split of total size m with round(ratio * m) protected rows.
    static SamplingPlan at_ratio(std::size_t m, double ratio, std::size_t replicates, std::uint64_t seed);

    void validate() const;
};

// Exactly plan.m0 rows of group 0 followed by plan.m1 rows of group 1, drawn
// uniformly within group. A pure function of (ds, plan, replicate_index).
Dataset draw_sample(const Dataset& ds, const SamplingPlan& plan, std::size_t replicate_index);

struct HoldoutSplit {
    Dataset train_pool;
    Dataset test;
};

// Stratified on (group, label) for classification and on group for
// regression; every stratum contributes at least one row to each side.
HoldoutSplit holdout_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

} // namespace fairbias

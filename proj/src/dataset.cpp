#include "fairbias/dataset.hpp"

#include "fairbias/csv.hpp"
#include "fairbias/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

namespace fairbias {

namespace {

std::string_view to_string(FeatureKind kind)
{
    return kind == FeatureKind::numeric ? "numeric" : "categorical";
}

FeatureKind parse_feature_kind(const std::string& name)
{
    if (name == "numeric") {
        return FeatureKind::numeric;
    }
    if (name == "categorical") {
        return FeatureKind::categorical;
    }
    throw ConfigError("unknown feature kind '" + name + "' (expected numeric or categorical)");
}

std::optional<double> parse_double(std::string_view text)
{
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

template <typename T>
T required(const nlohmann::json& doc, const char* key)
{
    if (!doc.contains(key)) {
        throw ConfigError(std::string("schema: missing key '") + key + "'");
    }
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("schema: bad value for '") + key + "': " + e.what());
    }
}

} // namespace

Schema Schema::from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) {
        throw ConfigError("schema: expected a JSON object");
    }
    static const std::set<std::string> known = {
        "target", "positive_label", "sensitive", "privileged_value", "features", "task", "description"
    };
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) {
            throw ConfigError("schema: unknown key '" + key + "'");
        }
    }

    Schema s;
    s.task = parse_task(doc.value("task", std::string("classification")));
    s.target_column = required<std::string>(doc, "target");
    s.sensitive_column = required<std::string>(doc, "sensitive");
    s.privileged_value = required<std::string>(doc, "privileged_value");
    if (s.task == Task::classification) {
        s.positive_label = required<std::string>(doc, "positive_label");
    } else if (doc.contains("positive_label")) {
        s.positive_label = required<std::string>(doc, "positive_label");
    }
    const auto& features = doc.contains("features") ? doc.at("features") : throw ConfigError("schema: missing key 'features'");
    if (!features.is_array()) {
        throw ConfigError("schema: 'features' must be an array");
    }
    for (const auto& f : features) {
        if (!f.is_object() || !f.contains("name")) {
            throw ConfigError("schema: each feature needs a 'name'");
        }
        for (const auto& [key, value] : f.items()) {
            if (key != "name" && key != "kind") {
                throw ConfigError("schema: unknown feature key '" + key + "'");
            }
        }
        FeatureSpec spec;
        spec.name = f.at("name").get<std::string>();
        spec.kind = parse_feature_kind(f.value("kind", std::string("numeric")));
        s.features.push_back(std::move(spec));
    }
    s.validate();
    return s;
}

nlohmann::json Schema::to_json() const
{
    nlohmann::json doc;
    doc["target"] = target_column;
    if (task == Task::classification) {
        doc["positive_label"] = positive_label;
    }
    doc["sensitive"] = sensitive_column;
    doc["privileged_value"] = privileged_value;
    doc["task"] = std::string(fairbias::to_string(task));
    auto features = nlohmann::json::array();
    for (const auto& f : this->features) {
        features.push_back({ { "name", f.name }, { "kind", std::string(to_string(f.kind)) } });
    }
    doc["features"] = features;
    return doc;
}

void Schema::validate() const
{
    if (target_column.empty() || sensitive_column.empty()) {
        throw ConfigError("schema: target and sensitive columns must be named");
    }
    if (target_column == sensitive_column) {
        throw ConfigError("schema: target and sensitive column are the same");
    }
    if (features.empty()) {
        throw ConfigError("schema: no feature columns");
    }
    std::set<std::string> seen;
    for (const auto& f : features) {
        if (f.name == target_column || f.name == sensitive_column) {
            throw ConfigError("schema: feature '" + f.name + "' is the target or sensitive column");
        }
        if (!seen.insert(f.name).second) {
            throw ConfigError("schema: duplicate feature '" + f.name + "'");
        }
    }
}

Schema load_schema(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open schema '" + path + "'");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("schema '" + path + "': " + e.what());
    }
    return Schema::from_json(doc);
}

std::size_t Dataset::group_size(int group) const
{
    return static_cast<std::size_t>(std::count(a.begin(), a.end(), group));
}

std::vector<std::size_t> Dataset::group_rows(int group) const
{
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == group) {
            rows.push_back(i);
        }
    }
    return rows;
}

Dataset Dataset::subset(std::span<const std::size_t> positions) const
{
    Dataset out;
    out.task = task;
    out.feature_names = feature_names;
    out.X.resize(static_cast<Eigen::Index>(positions.size()), X.cols());
    out.y.reserve(positions.size());
    out.a.reserve(positions.size());
    out.row_ids.reserve(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        auto p = positions[i];
        out.X.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(p));
        out.y.push_back(y[p]);
        out.a.push_back(a[p]);
        out.row_ids.push_back(row_ids[p]);
    }
    return out;
}

void Dataset::validate(bool require_both_groups) const
{
    auto n = y.size();
    if (static_cast<std::size_t>(X.rows()) != n || a.size() != n || row_ids.size() != n) {
        throw DataError(DataErrorCode::dimension_mismatch, "X, y, a and row_ids must have the same length");
    }
    if (static_cast<std::size_t>(X.cols()) != feature_names.size()) {
        throw DataError(DataErrorCode::dimension_mismatch, "feature name count does not match X");
    }
    if (!X.allFinite()) {
        throw DataError(DataErrorCode::unparsable_numeric, "non-finite encoded feature");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] != 0 && a[i] != 1) {
            throw DataError(DataErrorCode::sensitive_not_binary, "group value outside {0,1}");
        }
        if (task == Task::classification && y[i] != 0.0 && y[i] != 1.0) {
            throw DataError(DataErrorCode::target_not_binary, "label outside {0,1}");
        }
        if (!std::isfinite(y[i])) {
            throw DataError(DataErrorCode::unparsable_numeric, "non-finite outcome");
        }
    }
    if (require_both_groups && (group_size(0) == 0 || group_size(1) == 0)) {
        throw DataError(DataErrorCode::empty_group, "both sensitive groups must be non-empty");
    }
}

Dataset encode_rows(const std::vector<std::vector<std::string>>& rows, const Schema& schema)
{
    schema.validate();
    if (rows.empty()) {
        throw DataError(DataErrorCode::malformed_csv, "no header row");
    }
    const auto& header = rows.front();
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) {
        column.emplace(header[i], i);
    }
    auto index_of = [&](const std::string& name) {
        auto it = column.find(name);
        if (it == column.end()) {
            throw DataError(DataErrorCode::missing_column, "'" + name + "'");
        }
        return it->second;
    };
    const auto target_col = index_of(schema.target_column);
    const auto sensitive_col = index_of(schema.sensitive_column);
    std::vector<std::size_t> feature_cols;
    for (const auto& f : schema.features) {
        feature_cols.push_back(index_of(f.name));
    }

    const std::size_t n = rows.size() - 1;
    if (n == 0) {
        throw DataError(DataErrorCode::empty_dataset, "file has a header but no rows");
    }
    auto cell = [&](std::size_t r, std::size_t c, const std::string& name) -> const std::string& {
        const auto& row = rows[r + 1];
        if (row.size() != header.size()) {
            throw DataError(DataErrorCode::malformed_csv,
                "row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) + " fields, header has "
                    + std::to_string(header.size()));
        }
        if (row[c].empty()) {
            throw DataError(DataErrorCode::missing_value, "column '" + name + "', row " + std::to_string(r + 1));
        }
        return row[c];
    };

    Dataset ds;
    ds.task = schema.task;
    ds.y.resize(n);
    ds.a.resize(n);
    ds.row_ids.resize(n);

    std::set<std::string> sensitive_levels;
    for (std::size_t r = 0; r < n; ++r) {
        const auto& v = cell(r, sensitive_col, schema.sensitive_column);
        sensitive_levels.insert(v);
        ds.a[r] = v == schema.privileged_value ? 0 : 1;
        ds.row_ids[r] = r;
    }
    if (sensitive_levels.size() != 2) {
        throw DataError(DataErrorCode::sensitive_not_binary,
            "column '" + schema.sensitive_column + "' has " + std::to_string(sensitive_levels.size()) + " distinct values");
    }

    if (schema.task == Task::classification) {
        std::set<std::string> levels;
        for (std::size_t r = 0; r < n; ++r) {
            const auto& v = cell(r, target_col, schema.target_column);
            levels.insert(v);
            ds.y[r] = v == schema.positive_label ? 1.0 : 0.0;
        }
        if (levels.size() != 2) {
            throw DataError(DataErrorCode::target_not_binary,
                "column '" + schema.target_column + "' has " + std::to_string(levels.size()) + " distinct values");
        }
        if (!levels.contains(schema.positive_label)) {
            throw DataError(DataErrorCode::target_not_binary, "positive label '" + schema.positive_label + "' not present");
        }
    } else {
        for (std::size_t r = 0; r < n; ++r) {
            const auto& v = cell(r, target_col, schema.target_column);
            auto parsed = parse_double(v);
            if (!parsed) {
                throw DataError(DataErrorCode::unparsable_numeric,
                    "column '" + schema.target_column + "', row " + std::to_string(r + 1) + ": '" + v + "'");
            }
            ds.y[r] = *parsed;
        }
    }

    // Encode feature columns into a list of dense columns first.
    std::vector<std::vector<double>> columns;
    for (std::size_t f = 0; f < schema.features.size(); ++f) {
        const auto& spec = schema.features[f];
        const auto c = feature_cols[f];
        if (spec.kind == FeatureKind::numeric) {
            std::vector<double> values(n);
            for (std::size_t r = 0; r < n; ++r) {
                const auto& v = cell(r, c, spec.name);
                auto parsed = parse_double(v);
                if (!parsed) {
                    throw DataError(DataErrorCode::unparsable_numeric,
                        "column '" + spec.name + "', row " + std::to_string(r + 1) + ": '" + v + "'");
                }
                values[r] = *parsed;
            }
            // Population statistics over the whole file.
            double mean = compensated_sum(values) / static_cast<double>(n);
            std::vector<double> sq(n);
            for (std::size_t r = 0; r < n; ++r) {
                sq[r] = (values[r] - mean) * (values[r] - mean);
            }
            double sd = std::sqrt(compensated_sum(sq) / static_cast<double>(n));
            for (auto& v : values) {
                v = sd > 0.0 ? (v - mean) / sd : 0.0;
            }
            columns.push_back(std::move(values));
            ds.feature_names.push_back(spec.name);
        } else {
            std::set<std::string> levels;
            for (std::size_t r = 0; r < n; ++r) {
                levels.insert(cell(r, c, spec.name));
            }
            for (const auto& level : levels) {
                std::vector<double> indicator(n);
                for (std::size_t r = 0; r < n; ++r) {
                    indicator[r] = rows[r + 1][c] == level ? 1.0 : 0.0;
                }
                columns.push_back(std::move(indicator));
                ds.feature_names.push_back(spec.name + "=" + level);
            }
        }
    }

    ds.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (std::size_t r = 0; r < n; ++r) {
            ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = columns[j][r];
        }
    }

    if (ds.group_size(0) == 0 || ds.group_size(1) == 0) {
        throw DataError(DataErrorCode::empty_group,
            "privileged value '" + schema.privileged_value + "' leaves a sensitive group empty");
    }
    ds.validate();
    return ds;
}

Dataset load_csv(const std::string& path, const Schema& schema)
{
    return encode_rows(csv::read_file(path), schema);
}

double population_ratio(const Dataset& ds)
{
    if (ds.size() == 0) {
        throw DataError(DataErrorCode::empty_dataset, "population ratio of an empty data set");
    }
    return static_cast<double>(ds.group_size(1)) / static_cast<double>(ds.size());
}

SamplingPlan SamplingPlan::at_ratio(std::size_t m, double ratio, std::size_t replicates, std::uint64_t seed)
{
    SamplingPlan plan;
    auto m1 = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(m)));
    plan.m1 = std::min(m1, m);
    plan.m0 = m - plan.m1;
    plan.replicates = replicates;
    plan.seed = seed;
    return plan;
}

void SamplingPlan::validate() const
{
    if (replicates < 1) {
        throw ConfigError("sampling plan needs at least one replicate");
    }
    if (m() == 0) {
        throw ConfigError("sampling plan draws no rows");
    }
}

Dataset draw_sample(const Dataset& ds, const SamplingPlan& plan, std::size_t replicate_index)
{
    plan.validate();
    if (replicate_index >= plan.replicates) {
        throw ConfigError("replicate index " + std::to_string(replicate_index) + " outside plan of "
            + std::to_string(plan.replicates) + " replicates");
    }
    auto rng = make_stream(plan.seed, { static_cast<std::uint64_t>(replicate_index) });
    std::vector<std::size_t> picked;
    picked.reserve(plan.m());
    for (int group : { 0, 1 }) {
        const std::size_t count = group == 0 ? plan.m0 : plan.m1;
        if (count == 0) {
            continue;
        }
        auto pool = ds.group_rows(group);
        if (plan.with_replacement) {
            if (pool.empty()) {
                throw DataError(DataErrorCode::pool_exhausted, "group a" + std::to_string(group) + " is empty");
            }
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            for (std::size_t i = 0; i < count; ++i) {
                picked.push_back(pool[pick(rng)]);
            }
        } else {
            if (count > pool.size()) {
                throw DataError(DataErrorCode::pool_exhausted,
                    "group a" + std::to_string(group) + " needs " + std::to_string(count) + " rows, pool has "
                        + std::to_string(pool.size()));
            }
            std::sample(pool.begin(), pool.end(), std::back_inserter(picked), count, rng);
        }
    }
    return ds.subset(picked);
}

HoldoutSplit holdout_split(const Dataset& ds, double test_fraction, std::uint64_t seed)
{
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0, 1)");
    }
    const bool by_label = ds.task == Task::classification;
    std::vector<std::size_t> test_rows;
    std::vector<std::size_t> train_rows;
    std::uint64_t stratum_index = 0;
    for (int group : { 0, 1 }) {
        for (int label : { 0, 1 }) {
            if (!by_label && label == 1) {
                continue;
            }
            std::vector<std::size_t> stratum;
            for (std::size_t i = 0; i < ds.size(); ++i) {
                if (ds.a[i] == group && (!by_label || ds.y[i] == static_cast<double>(label))) {
                    stratum.push_back(i);
                }
            }
            std::string name = "group=a" + std::to_string(group);
            if (by_label) {
                name += ",label=" + std::to_string(label);
            }
            if (stratum.size() < 2) {
                throw DataError(DataErrorCode::stratum_too_small,
                    "stratum " + name + " has " + std::to_string(stratum.size()) + " rows, needs at least 2");
            }
            auto rng = make_stream(seed, { stratum_index++ });
            std::shuffle(stratum.begin(), stratum.end(), rng);
            auto want = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(stratum.size())));
            want = std::clamp<std::size_t>(want, 1, stratum.size() - 1);
            test_rows.insert(test_rows.end(), stratum.begin(), stratum.begin() + static_cast<std::ptrdiff_t>(want));
            train_rows.insert(train_rows.end(), stratum.begin() + static_cast<std::ptrdiff_t>(want), stratum.end());
        }
    }
    std::sort(test_rows.begin(), test_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    return { ds.subset(train_rows), ds.subset(test_rows) };
}

} // namespace fairbias

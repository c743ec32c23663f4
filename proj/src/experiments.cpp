#include "fairbias/experiments.hpp"

#include "fairbias/csv.hpp"
#include "fairbias/decomposition.hpp"
#include "fairbias/kernels.hpp"
#include "fairbias/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <set>

namespace fairbias {

namespace {

constexpr double kIdentityTolerance = 1e-9;

std::string describe_split(std::size_t m0, std::size_t m1)
{
    return "m0=" + std::to_string(m0) + ",m1=" + std::to_string(m1);
}

MaybeValue mean_of(std::span<const MaybeValue> values)
{
    return summarize(values).mean;
}

MaybeValue combined_error(const MaybeValue& a, const MaybeValue& b)
{
    if (a && b) {
        return std::sqrt(*a * *a + *b * *b);
    }
    return std::nullopt;
}

SweepRow make_row(Family family, std::string param, double value, MetricKind metric, std::string estimator)
{
    SweepRow row;
    row.family = family;
    row.grid_param = std::move(param);
    row.grid_value = value;
    row.metric = metric;
    row.estimator = std::move(estimator);
    return row;
}

void fill_from_replicates(SweepRow& row)
{
    auto d = summarize(row.replicates);
    row.mean = d.mean;
    row.std_error = d.std_error;
    row.k_defined = d.defined;
    row.k_total = d.total;
}

LossKind ensemble_loss(Task task)
{
    return task == Task::regression ? LossKind::squared : LossKind::zero_one;
}

std::size_t as_count(double v, std::string_view what)
{
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e12) {
        throw ConfigError(std::string(what) + " grid values must be positive integers");
    }
    return static_cast<std::size_t>(v);
}

// Shared evaluation set, drawn once per run.
struct Stage {
    HoldoutSplit split;
    LossKind loss;
};

Stage prepare(const Dataset& ds, const SweepSpec& spec)
{
    ds.validate();
    spec.validate(ds.task);
    return { holdout_split(ds, spec.test_fraction, spec.seed), ensemble_loss(ds.task) };
}

void check_capacity(const Dataset& pool, const SamplingPlan& plan, std::string_view where)
{
    if (plan.with_replacement) {
        return;
    }
    for (int g : { 0, 1 }) {
        const std::size_t need = g == 0 ? plan.m0 : plan.m1;
        const std::size_t have = pool.group_size(g);
        if (need > have) {
            throw DataError(DataErrorCode::pool_exhausted,
                std::string(where) + ": group a" + std::to_string(g) + " needs " + std::to_string(need)
                    + " rows, train pool has " + std::to_string(have));
        }
    }
}

PredictionEnsemble train_ensemble(const Dataset& pool, const SamplingPlan& plan, const SweepSpec& spec,
    const Dataset& test, LossKind loss)
{
    auto preds = kernels::resolve_threads(spec.threads) == 1
        ? kernels::train_replicates_serial(pool, plan, spec.learner, test.X)
        : kernels::train_replicates_parallel(pool, plan, spec.learner, test.X, spec.threads);
    return make_ensemble(preds, test, loss);
}

struct ModelCosts {
    std::vector<MaybeValue> disc;
    std::vector<MaybeValue> a0;
    std::vector<MaybeValue> a1;
};

ModelCosts per_model(const PredictionEnsemble& ens, MetricKind metric)
{
    ModelCosts out;
    for (std::size_t k = 0; k < ens.models(); ++k) {
        auto r = group_cost(metric, ens.model(k));
        out.disc.push_back(r.disc);
        out.a0.push_back(r.value_a0);
        out.a1.push_back(r.value_a1);
    }
    return out;
}

// Discrimination row of one grid cell under the configured estimator.
SweepRow disc_row(Family family, const std::string& param, double value, MetricKind metric, Estimator estimator,
    const PredictionEnsemble& ens, const ModelCosts& costs)
{
    SweepRow row = make_row(family, param, value, metric, std::string(to_string(estimator)));
    if (estimator == Estimator::mean_over_models) {
        row.replicates = costs.disc;
        fill_from_replicates(row);
        row.group0_mean = mean_of(costs.a0);
        row.group1_mean = mean_of(costs.a1);
    } else {
        auto main = main_prediction_cost(ens, metric);
        row.mean = main.disc;
        row.k_defined = main.disc ? 1 : 0;
        row.k_total = 1;
        row.group0_mean = main.value_a0;
        row.group1_mean = main.value_a1;
    }
    return row;
}

SweepRow estimate_row(Family family, const std::string& param, double value, const std::string& prefix,
    const BiasEstimate& est, const ModelCosts& target, const ModelCosts& reference)
{
    SweepRow row = make_row(family, param, value, est.metric, prefix + "." + std::string(to_string(est.estimator)));
    row.mean = est.value;
    if (est.estimator == Estimator::mean_over_models) {
        auto t = summarize(target.disc);
        auto r = summarize(reference.disc);
        row.std_error = est.value ? combined_error(t.std_error, r.std_error) : std::nullopt;
        row.k_defined = t.defined;
        row.k_total = t.total;
    } else {
        row.k_defined = est.value ? 1 : 0;
        row.k_total = 1;
    }
    return row;
}

nlohmann::json maybe_json(const MaybeValue& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

struct Split {
    std::size_t m0;
    std::size_t m1;
};

Split ratio_split(double ratio, std::size_t m)
{
    auto m1 = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(m)));
    m1 = std::min(m1, m);
    return { m - m1, m1 };
}

} // namespace

std::string_view to_string(Family family)
{
    switch (family) {
    case Family::ssb_size: return "ssb_size";
    case Family::urb_ratio: return "urb_ratio";
    case Family::decomposition: return "decomposition";
    case Family::collect: return "collect";
    }
    return "?";
}

std::string_view to_string(CollectVariant variant)
{
    switch (variant) {
    case CollectVariant::minority_random: return "minority_random";
    case CollectVariant::majority_random: return "majority_random";
    case CollectVariant::minority_positive_only: return "minority_positive_only";
    }
    return "?";
}

std::string_view to_string(Axis axis)
{
    return axis == Axis::size ? "size" : "ratio";
}

Family parse_family(std::string_view name)
{
    for (auto f : { Family::ssb_size, Family::urb_ratio, Family::decomposition, Family::collect }) {
        if (name == to_string(f)) {
            return f;
        }
    }
    throw ConfigError("unknown sweep family '" + std::string(name)
        + "' (expected ssb_size, urb_ratio, decomposition or collect)");
}

CollectVariant parse_variant(std::string_view name)
{
    for (auto v : { CollectVariant::minority_random, CollectVariant::majority_random,
             CollectVariant::minority_positive_only }) {
        if (name == to_string(v)) {
            return v;
        }
    }
    throw ConfigError("unknown collect variant '" + std::string(name) + "'");
}

Axis parse_axis(std::string_view name)
{
    if (name == "size") {
        return Axis::size;
    }
    if (name == "ratio") {
        return Axis::ratio;
    }
    throw ConfigError("unknown decomposition axis '" + std::string(name) + "' (expected size or ratio)");
}

SweepSpec SweepSpec::from_json(const nlohmann::json& doc, Family family)
{
    if (!doc.is_object()) {
        throw ConfigError("sweep: expected an object");
    }
    SweepSpec spec;
    spec.family = doc.contains("family") ? parse_family(doc.at("family").get<std::string>()) : family;
    if (spec.family == Family::collect) {
        spec.replicates = 50;
    }
    if (spec.family == Family::decomposition) {
        spec.estimator = Estimator::main_prediction;
    }
    static const std::set<std::string> allowed = { "family", "grid", "replicates", "estimator", "with_replacement",
        "max_fraction", "reference_size", "total_size", "axis", "fixed_majority", "variant", "cross_validation",
        "cv_folds" };
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!allowed.contains(key)) {
                throw ConfigError("sweep: unknown key '" + key + "'");
            }
            if (key == "grid") {
                if (!value.is_array()) {
                    throw ConfigError("sweep: grid must be an array of numbers");
                }
                spec.grid = value.get<std::vector<double>>();
            } else if (key == "replicates") spec.replicates = value.get<std::size_t>();
            else if (key == "estimator") spec.estimator = parse_estimator(value.get<std::string>());
            else if (key == "with_replacement") spec.with_replacement = value.get<bool>();
            else if (key == "max_fraction") spec.max_fraction = value.get<double>();
            else if (key == "reference_size") spec.reference_size = value.get<std::size_t>();
            else if (key == "total_size") spec.total_size = value.get<std::size_t>();
            else if (key == "axis") spec.axis = parse_axis(value.get<std::string>());
            else if (key == "fixed_majority") spec.fixed_majority = value.get<std::size_t>();
            else if (key == "variant") spec.variant = parse_variant(value.get<std::string>());
            else if (key == "cross_validation") spec.cross_validation = value.get<bool>();
            else if (key == "cv_folds") spec.cv_folds = value.get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("sweep: ") + e.what());
    }
    return spec;
}

nlohmann::json SweepSpec::to_json() const
{
    nlohmann::json doc = { { "family", std::string(to_string(family)) }, { "grid", grid },
        { "replicates", replicates }, { "seed", seed }, { "learner", learner.to_json() },
        { "estimator", std::string(to_string(estimator)) }, { "test_fraction", test_fraction },
        { "with_replacement", with_replacement } };
    nlohmann::json metric_names = nlohmann::json::array();
    for (auto m : metrics) {
        metric_names.push_back(std::string(to_string(m)));
    }
    doc["metrics"] = metric_names;
    switch (family) {
    case Family::ssb_size:
        doc["max_fraction"] = max_fraction;
        doc["reference_size"] = reference_size;
        break;
    case Family::urb_ratio: doc["total_size"] = total_size; break;
    case Family::decomposition:
        doc["axis"] = std::string(to_string(axis));
        doc["max_fraction"] = max_fraction;
        doc["reference_size"] = reference_size;
        doc["total_size"] = total_size;
        break;
    case Family::collect:
        doc["fixed_majority"] = fixed_majority;
        doc["variant"] = std::string(to_string(variant));
        doc["cross_validation"] = cross_validation;
        doc["cv_folds"] = cv_folds;
        break;
    }
    return doc;
}

void SweepSpec::validate(Task task) const
{
    learner.validate_for(task);
    if (replicates < 2) {
        throw ConfigError("sweep: replicates must be at least 2");
    }
    if (metrics.empty()) {
        throw ConfigError("sweep: at least one metric is required");
    }
    for (auto m : metrics) {
        if (!valid_for(m, task)) {
            throw ConfigError("metric " + std::string(to_string(m)) + " does not apply to a "
                + std::string(to_string(task)) + " task");
        }
        if (family == Family::decomposition && m != MetricKind::MSE && m != MetricKind::ZOL && m != MetricKind::FPR
            && m != MetricKind::FNR && m != MetricKind::EO) {
            throw ConfigError("metric " + std::string(to_string(m)) + " has no loss decomposition");
        }
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must lie in (0, 1)");
    }
    if (!(max_fraction > 0.0 && max_fraction <= 1.0)) {
        throw ConfigError("sweep: max_fraction must lie in (0, 1]");
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || (i > 0 && !(grid[i] > grid[i - 1]))) {
            throw ConfigError("sweep: grid must be finite and strictly increasing");
        }
    }
    const bool ratio_grid = family == Family::urb_ratio || (family == Family::decomposition && axis == Axis::ratio);
    for (double g : grid) {
        if (ratio_grid) {
            if (!(g > 0.0 && g < 1.0)) {
                throw ConfigError("sweep: ratio grid values must lie in (0, 1)");
            }
        } else {
            as_count(g, family == Family::collect ? "collect" : "size");
        }
    }
    if (ratio_grid && total_size < 2) {
        throw ConfigError("sweep: total_size must be at least 2");
    }
    if (family == Family::collect) {
        if (fixed_majority < 1) {
            throw ConfigError("sweep: fixed_majority must be positive");
        }
        if (cross_validation && cv_folds < 2) {
            throw ConfigError("sweep: cv_folds must be at least 2");
        }
    }
}

std::vector<std::string> sweep_csv_header()
{
    return { "family", "grid_param", "grid_value", "metric", "estimator", "mean", "stderr", "k_defined", "k_total",
        "bias_delta", "netvar_delta", "group0_mean", "group1_mean" };
}

std::string format_number(const MaybeValue& v)
{
    if (!v) {
        return {};
    }
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, *v);
    return std::string(buf, res.ptr);
}

void SweepResult::write_csv(std::ostream& out) const
{
    csv::write_row(out, sweep_csv_header());
    for (const auto& r : rows) {
        csv::write_row(out,
            { std::string(to_string(r.family)), r.grid_param, format_number(r.grid_value),
                std::string(to_string(r.metric)), r.estimator, format_number(r.mean), format_number(r.std_error),
                std::to_string(r.k_defined), std::to_string(r.k_total), format_number(r.bias_delta),
                format_number(r.netvar_delta), format_number(r.group0_mean), format_number(r.group1_mean) });
    }
}

std::vector<SweepRow> aggregate(const SweepResult& result)
{
    std::vector<SweepRow> out = result.rows;
    for (auto& row : out) {
        if (!row.replicates.empty()) {
            fill_from_replicates(row);
        }
    }
    return out;
}

std::vector<double> default_size_grid(std::size_t pool_size, double max_fraction)
{
    const auto cap = static_cast<std::size_t>(std::floor(max_fraction * static_cast<double>(pool_size)));
    if (cap < 10) {
        throw DataError(DataErrorCode::pool_exhausted,
            "train pool of " + std::to_string(pool_size) + " rows is too small for the default size grid");
    }
    std::vector<double> grid;
    for (std::size_t decade = 10;; decade *= 10) {
        for (std::size_t step : { 1, 2, 5 }) {
            const std::size_t m = decade * step;
            if (m >= cap) {
                grid.push_back(static_cast<double>(cap));
                return grid;
            }
            grid.push_back(static_cast<double>(m));
        }
    }
}

std::vector<double> default_ratio_grid(double population_ratio)
{
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) {
        grid.push_back((1.0 + 2.0 * i) / 1000.0);
        grid.push_back((981.0 + 2.0 * i) / 1000.0);
    }
    for (int i = 1; i <= 9; ++i) {
        grid.push_back(i / 10.0);
    }
    grid.push_back(population_ratio);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::vector<double> default_collect_grid()
{
    std::vector<double> grid;
    for (int n = 2; n <= 100; ++n) {
        grid.push_back(n);
    }
    return grid;
}

std::uint64_t cell_seed(std::uint64_t seed, Family family, std::initializer_list<std::uint64_t> cell)
{
    std::vector<std::uint64_t> tags;
    tags.push_back(static_cast<std::uint64_t>(family) + 1);
    tags.insert(tags.end(), cell.begin(), cell.end());
    auto rng = make_stream(seed, tags);
    return rng();
}

SweepResult run_ssb_sweep(const Dataset& ds, const SweepSpec& spec)
{
    if (spec.family != Family::ssb_size) {
        throw ConfigError("run_ssb_sweep needs family ssb_size");
    }
    auto stage = prepare(ds, spec);
    const auto& pool = stage.split.train_pool;
    const auto& test = stage.split.test;
    const double ratio = population_ratio(ds);
    auto grid = spec.grid.empty() ? default_size_grid(pool.size(), spec.max_fraction) : spec.grid;

    const std::size_t big_m = spec.reference_size > 0 ? spec.reference_size : as_count(grid.back(), "size");
    auto plan_for = [&](std::size_t m) {
        auto plan = SamplingPlan::at_ratio(m, ratio, spec.replicates, cell_seed(spec.seed, spec.family, { m }));
        plan.with_replacement = spec.with_replacement;
        return plan;
    };
    for (double g : grid) {
        check_capacity(pool, plan_for(as_count(g, "size")), "size " + format_number(g));
    }
    check_capacity(pool, plan_for(big_m), "reference size " + std::to_string(big_m));

    SweepResult result;
    result.family = spec.family;
    result.population_ratio = ratio;
    result.seed = spec.seed;

    const auto reference = train_ensemble(pool, plan_for(big_m), spec, test, stage.loss);
    std::vector<ModelCosts> ref_costs;
    for (auto metric : spec.metrics) {
        ref_costs.push_back(per_model(reference, metric));
    }
    const Descriptor descriptor{ "", "M=" + std::to_string(big_m) };

    std::vector<std::vector<double>> sds(spec.metrics.size());
    std::vector<double> sizes;
    for (double g : grid) {
        const std::size_t m = as_count(g, "size");
        std::optional<PredictionEnsemble> trained;
        if (m != big_m) {
            trained = train_ensemble(pool, plan_for(m), spec, test, stage.loss);
        }
        const PredictionEnsemble& ens = trained ? *trained : reference;
        Descriptor d = descriptor;
        d.target = "m=" + std::to_string(m);
        sizes.push_back(g);
        for (std::size_t j = 0; j < spec.metrics.size(); ++j) {
            const auto metric = spec.metrics[j];
            auto costs = per_model(ens, metric);
            result.rows.push_back(disc_row(spec.family, "m", g, metric, spec.estimator, ens, costs));
            result.rows.push_back(estimate_row(spec.family, "m", g, "ssb",
                ssb(ens, reference, metric, spec.estimator, d), costs, ref_costs[j]));
            auto spread = summarize(costs.disc).sd;
            sds[j].push_back(spread ? *spread : std::nan(""));
        }
    }

    nlohmann::json spearman_json = nlohmann::json::object();
    for (std::size_t j = 0; j < spec.metrics.size(); ++j) {
        std::vector<double> xs;
        std::vector<double> ys;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (!std::isnan(sds[j][i])) {
                xs.push_back(sizes[i]);
                ys.push_back(sds[j][i]);
            }
        }
        spearman_json[std::string(to_string(spec.metrics[j]))] = maybe_json(spearman(xs, ys));
    }
    result.diagnostics["reference_size"] = big_m;
    result.diagnostics["spearman_m_vs_replicate_sd"] = spearman_json;
    result.diagnostics["train_pool_rows"] = pool.size();
    result.diagnostics["test_rows"] = test.size();
    return result;
}

SweepResult run_urb_sweep(const Dataset& ds, const SweepSpec& spec)
{
    if (spec.family != Family::urb_ratio) {
        throw ConfigError("run_urb_sweep needs family urb_ratio");
    }
    auto stage = prepare(ds, spec);
    const auto& pool = stage.split.train_pool;
    const auto& test = stage.split.test;
    const double ratio = population_ratio(ds);
    const std::size_t m = spec.total_size;
    auto grid = spec.grid.empty() ? default_ratio_grid(ratio) : spec.grid;
    if (std::find(grid.begin(), grid.end(), ratio) == grid.end()) {
        grid.insert(std::upper_bound(grid.begin(), grid.end(), ratio), ratio);
    }

    auto plan_for = [&](Split s) {
        SamplingPlan plan;
        plan.m0 = s.m0;
        plan.m1 = s.m1;
        plan.replicates = spec.replicates;
        plan.with_replacement = spec.with_replacement;
        // Keyed by the split, so grid values rounding to the same split share draws.
        plan.seed = cell_seed(spec.seed, spec.family, { s.m1 });
        return plan;
    };
    const Split ref_split = ratio_split(ratio, m);
    for (double r : grid) {
        auto s = ratio_split(r, m);
        if (s.m0 == 0 || s.m1 == 0) {
            throw ConfigError("ratio " + format_number(r) + " at m=" + std::to_string(m)
                + " leaves a group without training rows");
        }
        check_capacity(pool, plan_for(s), "ratio " + format_number(r));
    }
    if (ref_split.m0 == 0 || ref_split.m1 == 0) {
        throw ConfigError("population split at m=" + std::to_string(m) + " leaves a group empty");
    }

    SweepResult result;
    result.family = spec.family;
    result.population_ratio = ratio;
    result.seed = spec.seed;

    const auto reference = train_ensemble(pool, plan_for(ref_split), spec, test, stage.loss);
    std::vector<ModelCosts> ref_costs;
    for (auto metric : spec.metrics) {
        ref_costs.push_back(per_model(reference, metric));
    }
    const std::string ref_desc = describe_split(ref_split.m0, ref_split.m1);

    for (double r : grid) {
        const auto s = ratio_split(r, m);
        std::optional<PredictionEnsemble> trained;
        if (s.m1 != ref_split.m1) {
            trained = train_ensemble(pool, plan_for(s), spec, test, stage.loss);
        }
        const PredictionEnsemble& ens = trained ? *trained : reference;
        const Descriptor d{ describe_split(s.m0, s.m1), ref_desc };
        for (std::size_t j = 0; j < spec.metrics.size(); ++j) {
            const auto metric = spec.metrics[j];
            auto costs = per_model(ens, metric);
            result.rows.push_back(disc_row(spec.family, "ratio", r, metric, spec.estimator, ens, costs));
            result.rows.push_back(estimate_row(spec.family, "ratio", r, "urb",
                urb(ens, reference, metric, spec.estimator, d), costs, ref_costs[j]));
        }
    }
    result.diagnostics["total_size"] = m;
    result.diagnostics["reference_split"] = { { "m0", ref_split.m0 }, { "m1", ref_split.m1 } };
    result.diagnostics["train_pool_rows"] = pool.size();
    result.diagnostics["test_rows"] = test.size();
    return result;
}

SweepResult run_decomposition_sweep(const Dataset& ds, const SweepSpec& spec)
{
    if (spec.family != Family::decomposition) {
        throw ConfigError("run_decomposition_sweep needs family decomposition");
    }
    auto stage = prepare(ds, spec);
    const auto& pool = stage.split.train_pool;
    const auto& test = stage.split.test;
    const double ratio = population_ratio(ds);
    const bool by_size = spec.axis == Axis::size;

    std::vector<double> grid = spec.grid;
    if (grid.empty()) {
        grid = by_size ? default_size_grid(pool.size(), spec.max_fraction) : default_ratio_grid(ratio);
    }
    if (!by_size && std::find(grid.begin(), grid.end(), ratio) == grid.end()) {
        grid.insert(std::upper_bound(grid.begin(), grid.end(), ratio), ratio);
    }

    // Each cell is identified by its split so that the reference cell is reused exactly.
    auto split_of = [&](double g) {
        if (by_size) {
            const auto m = as_count(g, "size");
            auto plan = SamplingPlan::at_ratio(m, ratio, 1, 0);
            return Split{ plan.m0, plan.m1 };
        }
        return ratio_split(g, spec.total_size);
    };
    auto plan_for = [&](Split s) {
        SamplingPlan plan;
        plan.m0 = s.m0;
        plan.m1 = s.m1;
        plan.replicates = spec.replicates;
        plan.with_replacement = spec.with_replacement;
        plan.seed = cell_seed(spec.seed, spec.family, { static_cast<std::uint64_t>(spec.axis), s.m0, s.m1 });
        return plan;
    };
    Split ref_split = by_size
        ? split_of(static_cast<double>(spec.reference_size > 0 ? spec.reference_size : as_count(grid.back(), "size")))
        : ratio_split(ratio, spec.total_size);
    for (double g : grid) {
        auto s = split_of(g);
        if (!by_size && (s.m0 == 0 || s.m1 == 0)) {
            throw ConfigError("ratio " + format_number(g) + " leaves a group without training rows");
        }
        check_capacity(pool, plan_for(s), std::string(by_size ? "size " : "ratio ") + format_number(g));
    }
    check_capacity(pool, plan_for(ref_split), "reference");

    SweepResult result;
    result.family = spec.family;
    result.population_ratio = ratio;
    result.seed = spec.seed;

    const auto reference = train_ensemble(pool, plan_for(ref_split), spec, test, stage.loss);
    const std::string prefix = by_size ? "ssb" : "urb";
    const std::string param = by_size ? "m" : "ratio";
    std::vector<ModelCosts> ref_costs;
    for (auto metric : spec.metrics) {
        ref_costs.push_back(per_model(reference, metric));
    }

    for (double g : grid) {
        const auto s = split_of(g);
        std::optional<PredictionEnsemble> trained;
        if (s.m0 != ref_split.m0 || s.m1 != ref_split.m1) {
            trained = train_ensemble(pool, plan_for(s), spec, test, stage.loss);
        }
        const PredictionEnsemble& ens = trained ? *trained : reference;
        for (std::size_t j = 0; j < spec.metrics.size(); ++j) {
            const auto metric = spec.metrics[j];
            auto gap = decompose_bias_gap(ens, reference, metric, spec.threads);
            if (gap.total && gap.bias_delta.between && gap.netvar_delta.between) {
                const double sum = *gap.bias_delta.between + *gap.netvar_delta.between;
                if (std::abs(*gap.total - sum) > kIdentityTolerance) {
                    throw InvariantError("decomposition identity violated at " + param + "=" + format_number(g)
                        + " for " + std::string(to_string(metric)) + ": total " + format_number(gap.total)
                        + " vs bias+net variance " + format_number(sum));
                }
            }
            auto costs = per_model(ens, metric);
            auto t = summarize(costs.disc);
            auto r = summarize(ref_costs[j].disc);

            SweepRow row = make_row(spec.family, param, g, metric, prefix + ".mean_over_models");
            row.mean = gap.total;
            row.std_error = gap.total ? combined_error(t.std_error, r.std_error) : std::nullopt;
            row.k_defined = t.defined;
            row.k_total = t.total;
            row.bias_delta = gap.bias_delta.between;
            row.netvar_delta = gap.netvar_delta.between;
            row.group0_mean = gap.target.a0.cost;
            row.group1_mean = gap.target.a1.cost;
            result.rows.push_back(row);

            SweepRow main = make_row(spec.family, param, g, metric, prefix + ".main_prediction");
            main.mean = gap.main_prediction_gap;
            main.k_defined = gap.main_prediction_gap ? 1 : 0;
            main.k_total = 1;
            main.bias_delta = gap.bias_delta.between;
            auto main_target = main_prediction_cost(ens, metric);
            main.group0_mean = main_target.value_a0;
            main.group1_mean = main_target.value_a1;
            result.rows.push_back(main);
        }
        if (ds.task == Task::classification) {
            auto record = sd_bounds(ens).to_json();
            record["grid_value"] = g;
            result.diagnostics["sd_bounds"].push_back(record);
        }
    }
    result.diagnostics["axis"] = std::string(to_string(spec.axis));
    result.diagnostics["reference_split"] = { { "m0", ref_split.m0 }, { "m1", ref_split.m1 } };
    result.diagnostics["identity_tolerance"] = kIdentityTolerance;
    result.diagnostics["train_pool_rows"] = pool.size();
    result.diagnostics["test_rows"] = test.size();
    return result;
}

Dataset collect_pool(const Dataset& train_pool, CollectVariant variant)
{
    if (variant != CollectVariant::minority_positive_only) {
        return train_pool;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < train_pool.size(); ++i) {
        if (train_pool.a[i] == 0 || train_pool.y[i] != 0.0) {
            keep.push_back(i);
        }
    }
    return train_pool.subset(keep);
}

SamplingPlan collect_plan(const SweepSpec& spec, std::size_t count)
{
    SamplingPlan plan;
    if (spec.variant == CollectVariant::majority_random) {
        plan.m1 = spec.fixed_majority;
        plan.m0 = count;
    } else {
        plan.m0 = spec.fixed_majority;
        plan.m1 = count;
    }
    plan.replicates = spec.replicates;
    plan.with_replacement = spec.with_replacement;
    plan.seed = cell_seed(spec.seed, Family::collect, { static_cast<std::uint64_t>(spec.variant), count });
    return plan;
}

SweepResult run_collect_sim(const Dataset& ds, const SweepSpec& spec)
{
    if (spec.family != Family::collect) {
        throw ConfigError("run_collect_sim needs family collect");
    }
    auto stage = prepare(ds, spec);
    const auto& test = stage.split.test;
    const Dataset sample_pool = collect_pool(stage.split.train_pool, spec.variant);
    const auto grid = spec.grid.empty() ? default_collect_grid() : spec.grid;
    const bool grow_majority = spec.variant == CollectVariant::majority_random;

    for (double g : grid) {
        auto plan = collect_plan(spec, as_count(g, "collect"));
        if (spec.variant == CollectVariant::minority_positive_only && !spec.with_replacement
            && plan.m1 > sample_pool.group_size(1)) {
            throw DataError(DataErrorCode::pool_exhausted,
                "positive-outcome minority pool has " + std::to_string(sample_pool.group_size(1))
                    + " rows, grid point needs " + std::to_string(plan.m1) + " (short by "
                    + std::to_string(plan.m1 - sample_pool.group_size(1)) + ")");
        }
        check_capacity(sample_pool, plan, "collect n=" + format_number(g));
        if (spec.cross_validation && plan.m() < spec.cv_folds) {
            throw ConfigError("collect: " + std::to_string(plan.m()) + " rows cannot form "
                + std::to_string(spec.cv_folds) + " folds");
        }
    }

    const std::size_t metrics = spec.metrics.size();
    const std::size_t cells = grid.size() * spec.replicates;
    // costs[cell][metric]
    std::vector<std::vector<GroupCostReport>> costs(cells);

    kernels::for_each(cells, spec.threads, [&](std::size_t task) {
        const std::size_t gi = task / spec.replicates;
        const std::size_t k = task % spec.replicates;
        const auto plan = collect_plan(spec, as_count(grid[gi], "collect"));
        const Dataset sample = draw_sample(sample_pool, plan, k);
        std::vector<GroupCostReport> out(metrics);
        if (!spec.cross_validation) {
            auto pred = fit(spec.learner, sample).predict(test.X);
            Observations obs{ test.y, pred.labels, pred.scores, test.a };
            for (std::size_t j = 0; j < metrics; ++j) {
                out[j] = group_cost(spec.metrics[j], obs);
            }
        } else {
            std::vector<std::size_t> order(sample.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            auto rng = make_stream(plan.seed, { k, 0x6376ULL });
            std::shuffle(order.begin(), order.end(), rng);
            std::vector<std::vector<MaybeValue>> d(metrics);
            std::vector<std::vector<MaybeValue>> v0(metrics);
            std::vector<std::vector<MaybeValue>> v1(metrics);
            for (std::size_t f = 0; f < spec.cv_folds; ++f) {
                std::vector<std::size_t> train_idx;
                std::vector<std::size_t> hold_idx;
                for (std::size_t i = 0; i < order.size(); ++i) {
                    (i % spec.cv_folds == f ? hold_idx : train_idx).push_back(order[i]);
                }
                std::sort(train_idx.begin(), train_idx.end());
                std::sort(hold_idx.begin(), hold_idx.end());
                const Dataset train = sample.subset(train_idx);
                const Dataset hold = sample.subset(hold_idx);
                auto pred = fit(spec.learner, train).predict(hold.X);
                Observations obs{ hold.y, pred.labels, pred.scores, hold.a };
                for (std::size_t j = 0; j < metrics; ++j) {
                    auto r = group_cost(spec.metrics[j], obs);
                    d[j].push_back(r.disc);
                    v0[j].push_back(r.value_a0);
                    v1[j].push_back(r.value_a1);
                }
            }
            for (std::size_t j = 0; j < metrics; ++j) {
                out[j].metric = spec.metrics[j];
                out[j].disc = mean_of(d[j]);
                out[j].value_a0 = mean_of(v0[j]);
                out[j].value_a1 = mean_of(v1[j]);
            }
        }
        costs[task] = std::move(out);
    });

    SweepResult result;
    result.family = spec.family;
    result.population_ratio = population_ratio(ds);
    result.seed = spec.seed;
    const std::string param = grow_majority ? "n0" : "n1";
    const std::string estimator = spec.cross_validation ? "cv_fold_mean" : "mean_over_models";
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        for (std::size_t j = 0; j < metrics; ++j) {
            SweepRow row = make_row(spec.family, param, grid[gi], spec.metrics[j], estimator);
            std::vector<MaybeValue> a0;
            std::vector<MaybeValue> a1;
            for (std::size_t k = 0; k < spec.replicates; ++k) {
                const auto& c = costs[gi * spec.replicates + k][j];
                row.replicates.push_back(c.disc);
                a0.push_back(c.value_a0);
                a1.push_back(c.value_a1);
            }
            fill_from_replicates(row);
            row.group0_mean = mean_of(a0);
            row.group1_mean = mean_of(a1);
            result.rows.push_back(std::move(row));
        }
    }
    result.diagnostics["variant"] = std::string(to_string(spec.variant));
    result.diagnostics["fixed_group"] = grow_majority ? "a1" : "a0";
    result.diagnostics["fixed_count"] = spec.fixed_majority;
    result.diagnostics["evaluation"] = spec.cross_validation
        ? nlohmann::json("cv_" + std::to_string(spec.cv_folds) + "_fold")
        : nlohmann::json("holdout");
    result.diagnostics["sampling_pool_group_rows"] = { { "a0", sample_pool.group_size(0) },
        { "a1", sample_pool.group_size(1) } };
    result.diagnostics["test_rows"] = test.size();
    return result;
}

SweepResult run_sweep(const Dataset& ds, const SweepSpec& spec)
{
    switch (spec.family) {
    case Family::ssb_size: return run_ssb_sweep(ds, spec);
    case Family::urb_ratio: return run_urb_sweep(ds, spec);
    case Family::decomposition: return run_decomposition_sweep(ds, spec);
    case Family::collect: return run_collect_sim(ds, spec);
    }
    throw ConfigError("unknown sweep family");
}

} // namespace fairbias

#include "fairbias/decomposition.hpp"

#include "fairbias/kernels.hpp"
#include "fairbias/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace fairbias {

namespace {

MaybeValue minus(const MaybeValue& a, const MaybeValue& b)
{
    if (a && b) {
        return *a - *b;
    }
    return std::nullopt;
}

nlohmann::json maybe(const MaybeValue& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json terms_json(const GroupTerms& t)
{
    return { { "cost", maybe(t.cost) }, { "noise", maybe(t.noise) }, { "bias", maybe(t.bias) },
        { "net_variance", maybe(t.net_variance) }, { "points", t.points } };
}

std::vector<double> column(const Matrix& m, std::size_t i)
{
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        out[static_cast<std::size_t>(k)] = m(k, static_cast<Eigen::Index>(i));
    }
    return out;
}

double majority_label(std::span<const double> labels, double mean_score)
{
    std::size_t ones = 0;
    for (double l : labels) {
        ones += l != 0.0 ? 1 : 0;
    }
    if (2 * ones != labels.size()) {
        return 2 * ones > labels.size() ? 1.0 : 0.0;
    }
    return mean_score >= 0.5 ? 1.0 : 0.0;
}

struct Conditioning {
    std::string name;
    int y_value = -1; // -1: every point
    double offset = 0.0;
    double sign = 1.0;
};

Conditioning conditioning_for(MetricKind metric)
{
    switch (metric) {
    case MetricKind::MSE:
    case MetricKind::ZOL: return { "all", -1, 0.0, 1.0 };
    case MetricKind::FPR: return { "y=0", 0, 0.0, 1.0 };
    case MetricKind::FNR: return { "y=1", 1, 0.0, 1.0 };
    case MetricKind::EO: return { "y=1", 1, 1.0, -1.0 };
    default: break;
    }
    throw ConfigError("metric " + std::string(to_string(metric)) + " has no loss decomposition");
}

bool selected(const Conditioning& c, double y)
{
    return c.y_value < 0 || (y != 0.0) == (c.y_value == 1);
}

} // namespace

std::string_view to_string(LossKind loss)
{
    switch (loss) {
    case LossKind::squared: return "squared";
    case LossKind::zero_one: return "zero_one";
    case LossKind::absolute: return "absolute";
    }
    return "?";
}

LossKind loss_for(MetricKind metric)
{
    return metric == MetricKind::MSE ? LossKind::squared : LossKind::zero_one;
}

Observations PredictionEnsemble::model(std::size_t k) const
{
    const auto n = points();
    return { eval_y, std::span<const double>(labels.data() + k * n, n), std::span<const double>(scores.data() + k * n, n),
        eval_a };
}

bool PredictionEnsemble::same_evaluation_set(const PredictionEnsemble& other) const noexcept
{
    return eval_y == other.eval_y && eval_a == other.eval_a;
}

void PredictionEnsemble::validate() const
{
    const auto n = static_cast<Eigen::Index>(points());
    if (scores.rows() < 1) {
        throw DataError(DataErrorCode::dimension_mismatch, "ensemble needs at least one model");
    }
    if (scores.rows() != labels.rows() || scores.cols() != n || labels.cols() != n
        || eval_a.size() != eval_y.size()) {
        throw DataError(DataErrorCode::dimension_mismatch, "ensemble rows are not aligned with the evaluation set");
    }
}

PredictionEnsemble make_ensemble(std::span<const Predictions> predictions, const Dataset& eval, LossKind loss)
{
    PredictionEnsemble ens;
    const auto k = static_cast<Eigen::Index>(predictions.size());
    const auto n = static_cast<Eigen::Index>(eval.size());
    ens.scores.resize(k, n);
    ens.labels.resize(k, n);
    for (Eigen::Index r = 0; r < k; ++r) {
        const auto& p = predictions[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(p.scores.size()) != n || static_cast<Eigen::Index>(p.labels.size()) != n) {
            throw DataError(DataErrorCode::dimension_mismatch, "prediction length differs from the evaluation set");
        }
        std::copy(p.scores.begin(), p.scores.end(), ens.scores.row(r).begin());
        std::copy(p.labels.begin(), p.labels.end(), ens.labels.row(r).begin());
    }
    ens.eval_y = eval.y;
    ens.eval_a = eval.a;
    ens.loss = loss;
    ens.task = eval.task;
    ens.validate();
    return ens;
}

MainPrediction main_prediction(const PredictionEnsemble& ens)
{
    ens.validate();
    MainPrediction out;
    out.scores.resize(ens.points());
    out.labels.resize(ens.points());
    for (std::size_t i = 0; i < ens.points(); ++i) {
        auto s = column(ens.scores, i);
        out.scores[i] = ordered_mean(s);
        out.labels[i] = ens.task == Task::classification ? majority_label(column(ens.labels, i), out.scores[i])
                                                         : out.scores[i];
    }
    return out;
}

PointDecomposition decompose_point(const PredictionEnsemble& ens, std::size_t i)
{
    PointDecomposition p;
    const double y = ens.eval_y[i];
    auto s = column(ens.scores, i);
    const double mean_score = ordered_mean(s);
    const auto k = static_cast<std::int64_t>(s.size());

    if (ens.loss == LossKind::squared) {
        p.main = mean_score;
        p.bias = (p.main - y) * (p.main - y);
        std::vector<double> spread(s.size());
        std::vector<double> loss(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) {
            spread[j] = (s[j] - p.main) * (s[j] - p.main);
            loss[j] = (s[j] - y) * (s[j] - y);
        }
        p.variance = ordered_mean(spread);
        p.mean_loss = ordered_mean(loss);
        p.factor = 1.0;
        return p;
    }

    auto labels = column(ens.labels, i);
    p.main = majority_label(labels, mean_score);
    for (double l : labels) {
        p.error_count += l != y ? 1 : 0;
        p.disagree_count += l != p.main ? 1 : 0;
    }
    p.bias = p.main != y ? 1.0 : 0.0;
    p.factor = p.bias == 0.0 ? 1.0 : -1.0;
    p.variance = static_cast<double>(p.disagree_count) / static_cast<double>(k);
    p.mean_loss = static_cast<double>(p.error_count) / static_cast<double>(k);
    return p;
}

std::vector<PointDecomposition> decompose_points(const PredictionEnsemble& ens, int threads)
{
    ens.validate();
    if (ens.loss == LossKind::absolute) {
        throw ConfigError("absolute loss has no exact decomposition; use sd_bounds");
    }
    if (ens.loss == LossKind::zero_one && ens.task != Task::classification) {
        throw ConfigError("zero-one loss requires a classification ensemble");
    }
    return kernels::resolve_threads(threads) == 1 ? kernels::point_terms_serial(ens)
                                                  : kernels::point_terms_parallel(ens, threads);
}

DecompositionReport aggregate_terms(
    const PredictionEnsemble& ens, std::span<const PointDecomposition> points, MetricKind metric)
{
    if (loss_for(metric) != ens.loss) {
        throw ConfigError("metric " + std::string(to_string(metric)) + " does not match "
            + std::string(to_string(ens.loss)) + " loss");
    }
    const Conditioning cond = conditioning_for(metric);
    DecompositionReport report;
    report.metric = metric;
    report.loss = ens.loss;
    report.conditioning = cond.name;
    report.offset = cond.offset;
    report.sign = cond.sign;
    report.models = ens.models();

    if (ens.loss == LossKind::squared) {
        std::vector<double> cost[2];
        std::vector<double> bias[2];
        std::vector<double> var[2];
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (!selected(cond, ens.eval_y[i])) {
                continue;
            }
            const int g = ens.eval_a[i];
            cost[g].push_back(points[i].mean_loss);
            bias[g].push_back(points[i].bias);
            var[g].push_back(points[i].factor * points[i].variance);
        }
        for (int g = 0; g < 2; ++g) {
            GroupTerms& t = g == 0 ? report.a0 : report.a1;
            t.points = cost[g].size();
            if (t.points > 0) {
                t.cost = ordered_mean(cost[g]);
                t.noise = 0.0;
                t.bias = ordered_mean(bias[g]);
                t.net_variance = ordered_mean(var[g]);
            }
        }
        report.difference.cost = minus(report.a1.cost, report.a0.cost);
        report.difference.noise = minus(report.a1.noise, report.a0.noise);
        report.difference.bias = minus(report.a1.bias, report.a0.bias);
        report.difference.net_variance = minus(report.a1.net_variance, report.a0.net_variance);
        return report;
    }

    // Zero-one terms are integer counts, so every group mean is one division.
    const auto k = static_cast<std::int64_t>(ens.models());
    std::int64_t n[2] = { 0, 0 };
    std::int64_t errors[2] = { 0, 0 };
    std::int64_t biased[2] = { 0, 0 };
    std::int64_t net[2] = { 0, 0 };
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!selected(cond, ens.eval_y[i])) {
            continue;
        }
        const int g = ens.eval_a[i];
        ++n[g];
        errors[g] += points[i].error_count;
        biased[g] += points[i].bias != 0.0 ? 1 : 0;
        net[g] += points[i].bias != 0.0 ? -points[i].disagree_count : points[i].disagree_count;
    }
    Ratio cost_r[2];
    Ratio bias_r[2];
    Ratio net_r[2];
    Ratio zero_r[2];
    for (int g = 0; g < 2; ++g) {
        cost_r[g] = cond.sign < 0 ? Ratio{ k * n[g] - errors[g], k * n[g] } : Ratio{ errors[g], k * n[g] };
        bias_r[g] = { biased[g], n[g] };
        net_r[g] = { net[g], k * n[g] };
        zero_r[g] = { 0, n[g] };
        GroupTerms& t = g == 0 ? report.a0 : report.a1;
        t.points = static_cast<std::size_t>(n[g]);
        t.cost = cost_r[g].value();
        t.noise = zero_r[g].value();
        t.bias = bias_r[g].value();
        t.net_variance = net_r[g].value();
    }
    auto signed_diff = [&](const Ratio* r) {
        return cond.sign < 0 ? ratio_difference(r[0], r[1]) : ratio_difference(r[1], r[0]);
    };
    report.difference.cost = ratio_difference(cost_r[1], cost_r[0]);
    report.difference.noise = signed_diff(zero_r);
    report.difference.bias = signed_diff(bias_r);
    report.difference.net_variance = signed_diff(net_r);
    return report;
}

DecompositionReport decompose_cost(const PredictionEnsemble& ens, MetricKind metric, int threads)
{
    conditioning_for(metric);
    auto points = decompose_points(ens, threads);
    return aggregate_terms(ens, points, metric);
}

GroupCostReport main_prediction_cost(const PredictionEnsemble& ens, MetricKind metric)
{
    auto main = main_prediction(ens);
    Observations obs{ ens.eval_y, main.labels, main.scores, ens.eval_a };
    return group_cost(metric, obs);
}

BiasGapReport decompose_bias_gap(
    const PredictionEnsemble& target, const PredictionEnsemble& reference, MetricKind metric, int threads)
{
    target.validate();
    reference.validate();
    if (!target.same_evaluation_set(reference)) {
        throw DataError(DataErrorCode::dimension_mismatch, "target and reference use different evaluation sets");
    }
    BiasGapReport out;
    out.target = decompose_cost(target, metric, threads);
    out.reference = decompose_cost(reference, metric, threads);
    const auto& t = out.target;
    const auto& r = out.reference;
    out.bias_delta = { minus(t.a0.bias, r.a0.bias), minus(t.a1.bias, r.a1.bias),
        minus(t.difference.bias, r.difference.bias) };
    out.netvar_delta = { minus(t.a0.net_variance, r.a0.net_variance), minus(t.a1.net_variance, r.a1.net_variance),
        minus(t.difference.net_variance, r.difference.net_variance) };
    out.total = minus(t.difference.cost, r.difference.cost);

    const auto ref_main = main_prediction_cost(reference, metric).disc;
    out.main_prediction_gap = minus(main_prediction_cost(target, metric).disc, ref_main);
    out.single_model_gaps.reserve(target.models());
    for (std::size_t k = 0; k < target.models(); ++k) {
        out.single_model_gaps.push_back(minus(group_cost(metric, target.model(k)).disc, ref_main));
    }
    return out;
}

SdBoundsRecord sd_bounds(const PredictionEnsemble& ens)
{
    ens.validate();
    if (ens.task != Task::classification) {
        throw ConfigError("sd_bounds requires a classification ensemble");
    }
    const auto main = main_prediction(ens);
    const auto k = static_cast<std::int64_t>(ens.models());
    std::int64_t n[2] = { 0, 0 };
    std::int64_t errors[2] = { 0, 0 };
    std::int64_t biased[2] = { 0, 0 };
    std::int64_t net[2] = { 0, 0 };
    std::int64_t predicted[2] = { 0, 0 };
    std::int64_t actual[2] = { 0, 0 };
    for (std::size_t i = 0; i < ens.points(); ++i) {
        const int g = ens.eval_a[i];
        const double y = ens.eval_y[i];
        std::int64_t disagree = 0;
        for (std::size_t j = 0; j < ens.models(); ++j) {
            const double l = ens.labels(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            disagree += l != main.labels[i] ? 1 : 0;
            errors[g] += l != y ? 1 : 0;
            predicted[g] += l != 0.0 ? 1 : 0;
        }
        // Binary labels: |main - y| is 0 or 1 and (1 - 2B) is +1 or -1.
        const bool b = main.labels[i] != y;
        ++n[g];
        biased[g] += b ? 1 : 0;
        net[g] += b ? -disagree : disagree;
        actual[g] += y != 0.0 ? 1 : 0;
    }
    SdBoundsRecord rec;
    Ratio bias_r[2];
    Ratio net_r[2];
    Ratio zero_r[2];
    Ratio shift_r[2];
    for (int g = 0; g < 2; ++g) {
        bias_r[g] = { biased[g], n[g] };
        net_r[g] = { net[g], k * n[g] };
        zero_r[g] = { 0, n[g] };
        shift_r[g] = { predicted[g] - k * actual[g], k * n[g] };
        GroupTerms& t = g == 0 ? rec.a0 : rec.a1;
        t.points = static_cast<std::size_t>(n[g]);
        t.cost = Ratio{ errors[g], k * n[g] }.value();
        t.noise = zero_r[g].value();
        t.bias = bias_r[g].value();
        t.net_variance = net_r[g].value();
    }
    rec.delta_noise = ratio_difference(zero_r[1], zero_r[0]);
    rec.delta_bias = ratio_difference(bias_r[1], bias_r[0]);
    rec.delta_variance = ratio_difference(net_r[1], net_r[0]);
    if (auto d = ratio_difference(shift_r[1], shift_r[0])) {
        rec.observed = std::abs(*d);
    }
    if (rec.delta_noise && rec.delta_bias && rec.delta_variance) {
        const double dn = *rec.delta_noise;
        const double db = *rec.delta_bias;
        const double dv = *rec.delta_variance;
        rec.upper = dn + db + dv;
        rec.lower = std::max({ dn - db - dv, db - dn - dv, dv - db - dn });
        if (rec.observed) {
            rec.within = *rec.lower <= *rec.observed && *rec.observed <= *rec.upper;
        }
    }
    return rec;
}

nlohmann::json DecompositionReport::to_json() const
{
    return { { "metric", std::string(to_string(metric)) }, { "loss", std::string(to_string(loss)) },
        { "conditioning", conditioning }, { "offset", offset }, { "sign", sign }, { "models", models },
        { "a0", terms_json(a0) }, { "a1", terms_json(a1) }, { "difference", terms_json(difference) } };
}

nlohmann::json BiasGapReport::to_json() const
{
    auto delta = [](const TermDelta& d) {
        return nlohmann::json{ { "a0", maybe(d.a0) }, { "a1", maybe(d.a1) }, { "between", maybe(d.between) } };
    };
    nlohmann::json singles = nlohmann::json::array();
    for (const auto& g : single_model_gaps) {
        singles.push_back(maybe(g));
    }
    return { { "target", target.to_json() }, { "reference", reference.to_json() },
        { "bias_delta", delta(bias_delta) }, { "net_variance_delta", delta(netvar_delta) }, { "total", maybe(total) },
        { "main_prediction_gap", maybe(main_prediction_gap) }, { "single_model_gaps", singles } };
}

nlohmann::json SdBoundsRecord::to_json() const
{
    return { { "a0", terms_json(a0) }, { "a1", terms_json(a1) }, { "delta_noise", maybe(delta_noise) },
        { "delta_bias", maybe(delta_bias) }, { "delta_variance", maybe(delta_variance) }, { "upper", maybe(upper) },
        { "lower", maybe(lower) }, { "observed", maybe(observed) },
        { "within", within ? nlohmann::json(*within) : nlohmann::json(nullptr) } };
}

} // namespace fairbias

#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace fairbias::oracle {

namespace {

struct Frac {
    std::int64_t num = 0;
    std::int64_t den = 0;
};

MaybeValue value(Frac f)
{
    if (f.den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(f.num) / static_cast<double>(f.den);
}

MaybeValue diff(Frac f1, Frac f0)
{
    if (f1.den == 0 || f0.den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(f1.num * f0.den - f0.num * f1.den) / static_cast<double>(f1.den * f0.den);
}

Frac count_metric(MetricKind m, std::span<const double> y, std::span<const double> labels, std::span<const int> a,
    int g)
{
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (a[i] != g) {
            continue;
        }
        const bool truth = y[i] == 1.0;
        const bool pred = labels[i] == 1.0;
        tp += truth && pred;
        fp += !truth && pred;
        tn += !truth && !pred;
        fn += truth && !pred;
    }
    switch (m) {
    case MetricKind::FPR: return { fp, fp + tn };
    case MetricKind::FNR: return { fn, tp + fn };
    case MetricKind::EO: return { tp, tp + fn };
    case MetricKind::ZOL: return { fp + fn, tp + fp + tn + fn };
    case MetricKind::SD: return { tp + fp, tp + fp + tn + fn };
    default: throw std::logic_error("not a count metric");
    }
}

// Twice the Mann-Whitney count over 2PN: every (positive, negative) pair
// scores 2 when concordant and 1 when tied.
Frac pair_auc(std::span<const double> y, std::span<const double> scores, std::span<const int> a, int g)
{
    std::int64_t p = 0;
    std::int64_t n = 0;
    std::int64_t wins2 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (a[i] != g) {
            continue;
        }
        (y[i] == 1.0 ? p : n) += 1;
        if (y[i] != 1.0) {
            continue;
        }
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (a[j] != g || y[j] == 1.0) {
                continue;
            }
            wins2 += scores[i] > scores[j] ? 2 : (scores[i] == scores[j] ? 1 : 0);
        }
    }
    if (p == 0 || n == 0) {
        return {};
    }
    return { wins2, 2 * p * n };
}

double main_label(const PredictionEnsemble& ens, std::size_t i)
{
    std::int64_t cost0 = 0;
    std::int64_t cost1 = 0;
    double score_sum = 0.0;
    for (Eigen::Index k = 0; k < ens.labels.rows(); ++k) {
        const double l = ens.labels(k, static_cast<Eigen::Index>(i));
        cost0 += l != 0.0;
        cost1 += l != 1.0;
        score_sum += ens.scores(k, static_cast<Eigen::Index>(i));
    }
    if (cost0 != cost1) {
        return cost1 < cost0 ? 1.0 : 0.0;
    }
    return score_sum / static_cast<double>(ens.labels.rows()) >= 0.5 ? 1.0 : 0.0;
}

void check_tiny(const PredictionEnsemble& ens)
{
    if (ens.models() > 5 || ens.points() > 20) {
        throw std::invalid_argument("oracle ensembles are limited to K <= 5, n <= 20");
    }
}

} // namespace

GroupCostReport metric(MetricKind m, std::span<const double> y, std::span<const double> labels,
    std::span<const double> scores, std::span<const int> a)
{
    if (y.size() > 500) {
        throw std::invalid_argument("oracle metrics are limited to n <= 500");
    }
    GroupCostReport r;
    r.metric = m;
    if (m == MetricKind::MSE) {
        double s[2] = { 0, 0 };
        std::int64_t c[2] = { 0, 0 };
        for (std::size_t i = 0; i < y.size(); ++i) {
            s[a[i]] += (scores[i] - y[i]) * (scores[i] - y[i]);
            ++c[a[i]];
        }
        if (c[0] > 0) {
            r.value_a0 = s[0] / static_cast<double>(c[0]);
        }
        if (c[1] > 0) {
            r.value_a1 = s[1] / static_cast<double>(c[1]);
        }
        if (r.value_a0 && r.value_a1) {
            r.disc = *r.value_a1 - *r.value_a0;
        }
        return r;
    }
    Frac f0 = m == MetricKind::AUC ? pair_auc(y, scores, a, 0) : count_metric(m, y, labels, a, 0);
    Frac f1 = m == MetricKind::AUC ? pair_auc(y, scores, a, 1) : count_metric(m, y, labels, a, 1);
    r.value_a0 = value(f0);
    r.value_a1 = value(f1);
    r.disc = diff(f1, f0);
    return r;
}

std::vector<GroupCostReport> metrics(std::span<const double> y, std::span<const double> labels,
    std::span<const double> scores, std::span<const int> a, Task task)
{
    std::vector<GroupCostReport> out;
    if (task == Task::regression) {
        out.push_back(metric(MetricKind::MSE, y, labels, scores, a));
        return out;
    }
    for (auto m : { MetricKind::FPR, MetricKind::FNR, MetricKind::EO, MetricKind::ZOL, MetricKind::AUC,
             MetricKind::SD }) {
        out.push_back(metric(m, y, labels, scores, a));
    }
    return out;
}

std::vector<PointDecomposition> decomposition(const PredictionEnsemble& ens)
{
    check_tiny(ens);
    const auto k = static_cast<double>(ens.models());
    std::vector<PointDecomposition> out;
    for (std::size_t i = 0; i < ens.points(); ++i) {
        PointDecomposition p;
        const double y = ens.eval_y[i];
        const auto col = static_cast<Eigen::Index>(i);
        if (ens.loss == LossKind::squared) {
            double sum = 0.0;
            for (Eigen::Index r = 0; r < ens.scores.rows(); ++r) {
                sum += ens.scores(r, col);
            }
            p.main = sum / k;
            p.bias = (p.main - y) * (p.main - y);
            double v = 0.0;
            double loss = 0.0;
            for (Eigen::Index r = 0; r < ens.scores.rows(); ++r) {
                v += (ens.scores(r, col) - p.main) * (ens.scores(r, col) - p.main);
                loss += (ens.scores(r, col) - y) * (ens.scores(r, col) - y);
            }
            p.variance = v / k;
            p.mean_loss = loss / k;
            p.factor = 1.0;
        } else {
            p.main = main_label(ens, i);
            for (Eigen::Index r = 0; r < ens.labels.rows(); ++r) {
                p.error_count += ens.labels(r, col) != y;
                p.disagree_count += ens.labels(r, col) != p.main;
            }
            p.bias = p.main == y ? 0.0 : 1.0;
            p.factor = p.bias == 0.0 ? 1.0 : -1.0;
            p.variance = static_cast<double>(p.disagree_count) / k;
            p.mean_loss = static_cast<double>(p.error_count) / k;
        }
        out.push_back(p);
    }
    return out;
}

SdComponents sd_components(const PredictionEnsemble& ens)
{
    check_tiny(ens);
    SdComponents c;
    const auto k = static_cast<std::int64_t>(ens.models());
    std::int64_t predicted[2] = { 0, 0 };
    std::int64_t actual[2] = { 0, 0 };
    for (std::size_t i = 0; i < ens.points(); ++i) {
        const int g = ens.eval_a[i];
        const double main = main_label(ens, i);
        const std::int64_t b = std::llround(std::abs(main - ens.eval_y[i]));
        std::int64_t differ = 0;
        for (Eigen::Index r = 0; r < ens.labels.rows(); ++r) {
            differ += std::llround(std::abs(ens.labels(r, static_cast<Eigen::Index>(i)) - main));
            predicted[g] += std::llround(ens.labels(r, static_cast<Eigen::Index>(i)));
        }
        actual[g] += std::llround(ens.eval_y[i]);
        ++c.points[g];
        c.bias_count[g] += b;
        c.net_numerator[g] += (1 - 2 * b) * differ;
    }
    for (int g = 0; g < 2; ++g) {
        c.bias[g] = static_cast<double>(c.bias_count[g]) / static_cast<double>(c.points[g]);
        c.net_variance[g] = static_cast<double>(c.net_numerator[g]) / static_cast<double>(k * c.points[g]);
    }
    const std::int64_t num = (predicted[1] - k * actual[1]) * c.points[0] - (predicted[0] - k * actual[0]) * c.points[1];
    c.observed = std::abs(static_cast<double>(num) / static_cast<double>(k * c.points[1] * c.points[0]));
    return c;
}

} // namespace fairbias::oracle

#include "fairbias/learners.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace fairbias {

std::string_view to_string(LearnerKind kind)
{
    switch (kind) {
    case LearnerKind::logistic_regression: return "logistic_regression";
    case LearnerKind::decision_tree: return "decision_tree";
    case LearnerKind::knn: return "knn";
    case LearnerKind::linear_regression: return "linear_regression";
    }
    return "unknown";
}

LearnerKind parse_learner_kind(std::string_view name)
{
    for (auto kind : { LearnerKind::logistic_regression, LearnerKind::decision_tree, LearnerKind::knn,
             LearnerKind::linear_regression }) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    throw ConfigError("unknown learner kind '" + std::string(name) + "'");
}

LearnerSpec LearnerSpec::from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) {
        throw ConfigError("learner: expected an object");
    }
    LearnerSpec spec;
    if (doc.contains("kind")) {
        spec.kind = parse_learner_kind(doc.at("kind").get<std::string>());
    }
    std::set<std::string> allowed = { "kind", "threshold" };
    switch (spec.kind) {
    case LearnerKind::logistic_regression:
        allowed.insert({ "l2", "learning_rate", "max_iterations", "gradient_tolerance" });
        break;
    case LearnerKind::decision_tree: allowed.insert({ "max_depth", "min_leaf" }); break;
    case LearnerKind::knn: allowed.insert("k"); break;
    case LearnerKind::linear_regression: allowed.insert("ridge_jitter"); break;
    }
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!allowed.contains(key)) {
                throw ConfigError("learner: key '" + key + "' is not a " + std::string(to_string(spec.kind))
                    + " hyperparameter");
            }
            if (key == "threshold") spec.threshold = value.get<double>();
            else if (key == "l2") spec.l2 = value.get<double>();
            else if (key == "learning_rate") spec.learning_rate = value.get<double>();
            else if (key == "max_iterations") spec.max_iterations = value.get<int>();
            else if (key == "gradient_tolerance") spec.gradient_tolerance = value.get<double>();
            else if (key == "max_depth") spec.max_depth = value.get<int>();
            else if (key == "min_leaf") spec.min_leaf = value.get<int>();
            else if (key == "k") spec.k = value.get<int>();
            else if (key == "ridge_jitter") spec.ridge_jitter = value.get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("learner: ") + e.what());
    }
    spec.validate();
    return spec;
}

nlohmann::json LearnerSpec::to_json() const
{
    nlohmann::json doc = { { "kind", std::string(to_string(kind)) }, { "threshold", threshold } };
    switch (kind) {
    case LearnerKind::logistic_regression:
        doc["l2"] = l2;
        doc["learning_rate"] = learning_rate;
        doc["max_iterations"] = max_iterations;
        doc["gradient_tolerance"] = gradient_tolerance;
        break;
    case LearnerKind::decision_tree:
        doc["max_depth"] = max_depth;
        doc["min_leaf"] = min_leaf;
        break;
    case LearnerKind::knn: doc["k"] = k; break;
    case LearnerKind::linear_regression: doc["ridge_jitter"] = ridge_jitter; break;
    }
    return doc;
}

void LearnerSpec::validate() const
{
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("learner: threshold must lie in (0, 1)");
    }
    if (l2 < 0.0 || !(learning_rate > 0.0) || max_iterations < 1 || !(gradient_tolerance > 0.0)) {
        throw ConfigError("learner: logistic regression needs l2 >= 0, learning_rate > 0, max_iterations >= 1, "
                          "gradient_tolerance > 0");
    }
    if (max_depth < 0 || min_leaf < 1) {
        throw ConfigError("learner: decision tree needs max_depth >= 0 and min_leaf >= 1");
    }
    if (k < 1) {
        throw ConfigError("learner: knn needs k >= 1");
    }
    if (!(ridge_jitter > 0.0)) {
        throw ConfigError("learner: ridge_jitter must be positive");
    }
}

void LearnerSpec::validate_for(Task task) const
{
    validate();
    if (kind == LearnerKind::logistic_regression && task != Task::classification) {
        throw ConfigError("learner: logistic_regression requires a classification task");
    }
    if (kind == LearnerKind::linear_regression && task != Task::regression) {
        throw ConfigError("learner: linear_regression requires a regression task");
    }
}

FittedModel::FittedModel(std::shared_ptr<const Model> model, Task task, double threshold)
    : model_(std::move(model))
    , task_(task)
    , threshold_(threshold)
{
}

Predictions FittedModel::predict(const Matrix& X) const
{
    if (static_cast<std::size_t>(X.cols()) != model_->dimension()) {
        throw DataError(DataErrorCode::dimension_mismatch,
            "model expects " + std::to_string(model_->dimension()) + " columns, got " + std::to_string(X.cols()));
    }
    Predictions out;
    out.scores = model_->score(X);
    if (task_ == Task::classification) {
        out.labels.resize(out.scores.size());
        for (std::size_t i = 0; i < out.scores.size(); ++i) {
            out.scores[i] = std::clamp(out.scores[i], 0.0, 1.0);
            out.labels[i] = out.scores[i] >= threshold_ ? 1.0 : 0.0;
        }
    } else {
        out.labels = out.scores;
    }
    return out;
}

std::vector<double> ConstantModel::score(const Matrix& X) const
{
    return std::vector<double>(static_cast<std::size_t>(X.rows()), value_);
}

std::vector<double> LinearModel::score(const Matrix& X) const
{
    Vector z = (X * coefficients_).array() + intercept_;
    std::vector<double> out(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        double v = z[i];
        if (logistic_) {
            v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        }
        out[static_cast<std::size_t>(i)] = v;
    }
    return out;
}

std::vector<double> TreeModel::score(const Matrix& X) const
{
    std::vector<double> out(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        int node = 0;
        while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
            const auto& n = nodes_[static_cast<std::size_t>(node)];
            node = X(r, n.feature) <= n.threshold ? n.left : n.right;
        }
        out[static_cast<std::size_t>(r)] = nodes_[static_cast<std::size_t>(node)].value;
    }
    return out;
}

std::vector<double> KnnModel::score(const Matrix& X) const
{
    const auto n_train = static_cast<std::size_t>(X_.rows());
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_), n_train);
    std::vector<double> out(static_cast<std::size_t>(X.rows()));
    std::vector<std::pair<double, std::size_t>> dist(n_train);
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        Vector d2 = (X_.rowwise() - X.row(r)).rowwise().squaredNorm();
        for (std::size_t i = 0; i < n_train; ++i) {
            dist[i] = { d2[static_cast<Eigen::Index>(i)], i };
        }
        // Pair ordering breaks distance ties by lower training row.
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            sum += y_[dist[i].second];
        }
        out[static_cast<std::size_t>(r)] = sum / static_cast<double>(k);
    }
    return out;
}

namespace {

Eigen::Map<const Vector> as_vector(const std::vector<double>& v)
{
    return { v.data(), static_cast<Eigen::Index>(v.size()) };
}

struct LogisticState {
    Eigen::ArrayXd z;         // X w + b
    Eigen::ArrayXd neg_exp;   // exp(-|z|)
    double objective = 0.0;
};

// Mean log-loss plus (l2/2)|w|^2, written with softplus(z) = max(z,0) + log1p(exp(-|z|)).
void evaluate(LogisticState& s, const Eigen::ArrayXd& y, const Vector& w, double l2)
{
    s.neg_exp = (-s.z.abs()).exp();
    Eigen::ArrayXd softplus = s.z.max(0.0) + s.neg_exp.log1p();
    s.objective = (softplus - y * s.z).sum() / static_cast<double>(y.size()) + 0.5 * l2 * w.squaredNorm();
}

std::shared_ptr<const Model> fit_logistic(const LearnerSpec& spec, const Dataset& train)
{
    const auto& X = train.X;
    const auto n = static_cast<double>(train.size());
    const Eigen::ArrayXd y = as_vector(train.y).array();
    Vector w = Vector::Zero(X.cols());
    double b = 0.0;

    LogisticState cur;
    cur.z = Eigen::ArrayXd::Zero(X.rows());
    evaluate(cur, y, w, spec.l2);
    LogisticState trial;

    int iteration = 0;
    for (; iteration < spec.max_iterations; ++iteration) {
        Eigen::ArrayXd p = (cur.z >= 0.0).select(1.0 / (1.0 + cur.neg_exp), cur.neg_exp / (1.0 + cur.neg_exp));
        Vector residual = (p - y).matrix();
        Vector grad_w = X.transpose() * residual / n + spec.l2 * w;
        double grad_b = residual.sum() / n;
        double grad_max = std::max(grad_w.lpNorm<Eigen::Infinity>(), std::abs(grad_b));
        if (grad_max < spec.gradient_tolerance) {
            break;
        }
        Eigen::ArrayXd direction = (X * grad_w).array() + grad_b;

        double step = spec.learning_rate;
        bool accepted = false;
        while (step > 1e-12) {
            trial.z = cur.z - step * direction;
            Vector w_trial = w - step * grad_w;
            evaluate(trial, y, w_trial, spec.l2);
            if (trial.objective <= cur.objective) {
                w = std::move(w_trial);
                b -= step * grad_b;
                std::swap(cur, trial);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;
        }
    }
    return std::make_shared<LinearModel>(std::move(w), b, true, iteration, false);
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& train, const LearnerSpec& spec)
        : X_(train.X)
        , y_(train.y)
        , max_depth_(spec.max_depth)
        , min_leaf_(static_cast<std::size_t>(spec.min_leaf))
    {
    }

    std::vector<TreeModel::Node> build()
    {
        std::vector<std::size_t> rows(y_.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        grow(rows, 0);
        return std::move(nodes_);
    }

private:
    // For 0/1 labels the sum of squared deviations equals n * Gini / 2, so the
    // same criterion serves CART classification and regression trees.
    static double sse(double count, double sum, double sumsq) { return sumsq - sum * sum / count; }

    int grow(std::vector<std::size_t>& rows, int depth)
    {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        double sum = 0.0;
        double sumsq = 0.0;
        for (auto r : rows) {
            sum += y_[r];
            sumsq += y_[r] * y_[r];
        }
        const auto count = static_cast<double>(rows.size());
        nodes_[static_cast<std::size_t>(id)].value = sum / count;
        nodes_[static_cast<std::size_t>(id)].count = rows.size();

        bool pure = std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return y_[r] == y_[rows.front()]; });
        if (depth >= max_depth_ || rows.size() < 2 * min_leaf_ || pure) {
            return id;
        }

        const double parent = sse(count, sum, sumsq);
        double best = parent - 1e-12 * std::max(1.0, parent);
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> order = rows;
        for (Eigen::Index f = 0; f < X_.cols(); ++f) {
            std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
                double xl = X_(static_cast<Eigen::Index>(l), f);
                double xr = X_(static_cast<Eigen::Index>(r), f);
                return xl < xr || (xl == xr && l < r);
            });
            double left_sum = 0.0;
            double left_sumsq = 0.0;
            for (std::size_t pos = 1; pos < order.size(); ++pos) {
                double yv = y_[order[pos - 1]];
                left_sum += yv;
                left_sumsq += yv * yv;
                if (pos < min_leaf_) {
                    continue;
                }
                if (order.size() - pos < min_leaf_) {
                    break;
                }
                double lo = X_(static_cast<Eigen::Index>(order[pos - 1]), f);
                double hi = X_(static_cast<Eigen::Index>(order[pos]), f);
                if (lo == hi) {
                    continue;
                }
                auto nl = static_cast<double>(pos);
                double score = sse(nl, left_sum, left_sumsq)
                    + sse(count - nl, sum - left_sum, sumsq - left_sumsq);
                // Strict improvement keeps the lowest feature, then lowest threshold.
                if (score < best) {
                    best = score;
                    best_feature = static_cast<int>(f);
                    double mid = lo + (hi - lo) / 2.0;
                    best_threshold = mid < hi ? mid : lo;
                }
            }
        }
        if (best_feature < 0) {
            return id;
        }

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (auto r : rows) {
            (X_(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        int l = grow(left, depth + 1);
        int r = grow(right, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const Matrix& X_;
    const std::vector<double>& y_;
    int max_depth_;
    std::size_t min_leaf_;
    std::vector<TreeModel::Node> nodes_;
};

std::shared_ptr<const Model> fit_linear(const LearnerSpec& spec, const Dataset& train)
{
    const auto n = train.X.rows();
    const auto d = train.X.cols();
    Matrix design(n, d + 1);
    design.col(0).setOnes();
    design.rightCols(d) = train.X;
    Eigen::MatrixXd gram = design.transpose() * design;
    Vector rhs = design.transpose() * as_vector(train.y);

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    bool jittered = false;
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-12) {
        gram.diagonal().array() += spec.ridge_jitter;
        ldlt.compute(gram);
        jittered = true;
    }
    Vector beta = ldlt.solve(rhs);
    return std::make_shared<LinearModel>(beta.tail(d), beta[0], false, 0, jittered);
}

class BuiltinLearner final : public Learner {
public:
    explicit BuiltinLearner(LearnerSpec spec)
        : spec_(spec)
    {
        spec_.validate();
    }

    [[nodiscard]] FittedModel fit(const Dataset& train) const override
    {
        spec_.validate_for(train.task);
        if (train.size() == 0) {
            throw DataError(DataErrorCode::empty_dataset, "cannot fit on an empty training set");
        }
        if (train.dimension() == 0) {
            throw DataError(DataErrorCode::dimension_mismatch, "cannot fit on zero features");
        }
        const auto d = train.dimension();
        std::shared_ptr<const Model> model;
        if (train.task == Task::classification) {
            bool single = std::all_of(train.y.begin(), train.y.end(), [&](double v) { return v == train.y.front(); });
            if (single) {
                return FittedModel(std::make_shared<ConstantModel>(train.y.front(), d), train.task, spec_.threshold);
            }
        }
        switch (spec_.kind) {
        case LearnerKind::logistic_regression: model = fit_logistic(spec_, train); break;
        case LearnerKind::decision_tree:
            model = std::make_shared<TreeModel>(TreeBuilder(train, spec_).build(), d);
            break;
        case LearnerKind::knn: model = std::make_shared<KnnModel>(train.X, train.y, spec_.k); break;
        case LearnerKind::linear_regression: model = fit_linear(spec_, train); break;
        }
        return FittedModel(std::move(model), train.task, spec_.threshold);
    }

private:
    LearnerSpec spec_;
};

} // namespace

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec)
{
    return std::make_unique<BuiltinLearner>(spec);
}

FittedModel fit(const LearnerSpec& spec, const Dataset& train)
{
    return make_learner(spec)->fit(train);
}

} // namespace fairbias

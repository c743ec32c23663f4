#pragma once

#include "fairbias/common.hpp"
#include "fairbias/dataset.hpp"

#include "json.hpp"

#include <memory>
#include <string_view>
#include <vector>

namespace fairbias {

enum class LearnerKind { logistic_regression, decision_tree, knn, linear_regression };

std::string_view to_string(LearnerKind kind);
LearnerKind parse_learner_kind(std::string_view name);

// Hyperparameters for every built-in kind; only the fields of `kind` are used.
struct LearnerSpec {
    LearnerKind kind = LearnerKind::logistic_regression;
    double threshold = 0.5;

    // logistic regression: full-batch gradient descent on L2-regularised log-loss
    double l2 = 1e-4;
    double learning_rate = 0.1;
    int max_iterations = 2000;
    double gradient_tolerance = 1e-6;

    // CART
    int max_depth = 8;
    int min_leaf = 5;

    // kNN
    int k = 5;

    // OLS
    double ridge_jitter = 1e-8;

    // Accepts {"kind": ..., <overrides>}; unknown keys are rejected.
    static LearnerSpec from_json(const nlohmann::json& doc);
    [[nodiscard]] nlohmann::json to_json() const;

    void validate() const;
    void validate_for(Task task) const;
};

struct Predictions {
    std::vector<double> scores;
    std::vector<double> labels; // 0/1 for classification, equal to scores for regression
};

// A fitted predictor. Implementations must be immutable after construction.
class Model {
public:
    virtual ~Model() = default;

    // Classification: probability-like scores in [0, 1]. Regression: predictions.
    [[nodiscard]] virtual std::vector<double> score(const Matrix& X) const = 0;
    [[nodiscard]] virtual std::size_t dimension() const noexcept = 0;
    [[nodiscard]] virtual std::string_view name() const noexcept = 0;
};

struct TrainingFingerprint {
    std::size_t m0 = 0;
    std::size_t m1 = 0;
    std::uint64_t seed = 0;
    std::size_t replicate_index = 0;
};

class FittedModel {
public:
    FittedModel(std::shared_ptr<const Model> model, Task task, double threshold);

    // Throws DataError(dimension_mismatch) when X has the wrong width.
    [[nodiscard]] Predictions predict(const Matrix& X) const;

    [[nodiscard]] const Model& model() const noexcept { return *model_; }
    [[nodiscard]] Task task() const noexcept { return task_; }
    [[nodiscard]] double threshold() const noexcept { return threshold_; }

    TrainingFingerprint fingerprint;

private:
    std::shared_ptr<const Model> model_;
    Task task_;
    double threshold_;
};

// Extension point: random forests, SVMs and the like implement this.
class Learner {
public:
    virtual ~Learner() = default;
    [[nodiscard]] virtual FittedModel fit(const Dataset& train) const = 0;
};

std::unique_ptr<Learner> make_learner(const LearnerSpec& spec);

FittedModel fit(const LearnerSpec& spec, const Dataset& train);

// Concrete models, exposed for inspection in tests and tools.

class ConstantModel final : public Model {
public:
    ConstantModel(double value, std::size_t dimension)
        : value_(value)
        , dimension_(dimension)
    {
    }
    [[nodiscard]] std::vector<double> score(const Matrix& X) const override;
    [[nodiscard]] std::size_t dimension() const noexcept override { return dimension_; }
    [[nodiscard]] std::string_view name() const noexcept override { return "constant"; }
    [[nodiscard]] double value() const noexcept { return value_; }

private:
    double value_;
    std::size_t dimension_;
};

class LinearModel final : public Model {
public:
    // logistic == true applies the sigmoid link.
    LinearModel(Vector coefficients, double intercept, bool logistic, int iterations = 0, bool jittered = false)
        : coefficients_(std::move(coefficients))
        , intercept_(intercept)
        , logistic_(logistic)
        , iterations_(iterations)
        , jittered_(jittered)
    {
    }
    [[nodiscard]] std::vector<double> score(const Matrix& X) const override;
    [[nodiscard]] std::size_t dimension() const noexcept override { return static_cast<std::size_t>(coefficients_.size()); }
    [[nodiscard]] std::string_view name() const noexcept override
    {
        return logistic_ ? "logistic_regression" : "linear_regression";
    }
    [[nodiscard]] const Vector& coefficients() const noexcept { return coefficients_; }
    [[nodiscard]] double intercept() const noexcept { return intercept_; }
    // Gradient-descent iterations used (logistic only).
    [[nodiscard]] int iterations() const noexcept { return iterations_; }
    // Whether the Gram matrix needed the ridge jitter (OLS only).
    [[nodiscard]] bool jittered() const noexcept { return jittered_; }

private:
    Vector coefficients_;
    double intercept_;
    bool logistic_;
    int iterations_;
    bool jittered_;
};

class TreeModel final : public Model {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
        std::size_t count = 0;
    };

    TreeModel(std::vector<Node> nodes, std::size_t dimension)
        : nodes_(std::move(nodes))
        , dimension_(dimension)
    {
    }
    [[nodiscard]] std::vector<double> score(const Matrix& X) const override;
    [[nodiscard]] std::size_t dimension() const noexcept override { return dimension_; }
    [[nodiscard]] std::string_view name() const noexcept override { return "decision_tree"; }
    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

private:
    std::vector<Node> nodes_;
    std::size_t dimension_;
};

class KnnModel final : public Model {
public:
    KnnModel(Matrix X, std::vector<double> y, int k)
        : X_(std::move(X))
        , y_(std::move(y))
        , k_(k)
    {
    }
    [[nodiscard]] std::vector<double> score(const Matrix& X) const override;
    [[nodiscard]] std::size_t dimension() const noexcept override { return static_cast<std::size_t>(X_.cols()); }
    [[nodiscard]] std::string_view name() const noexcept override { return "knn"; }

private:
    Matrix X_;
    std::vector<double> y_;
    int k_;
};

} // namespace fairbias

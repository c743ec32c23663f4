#pragma once

#include "fairbias/bias_estimators.hpp"
#include "fairbias/dataset.hpp"
#include "fairbias/group_metrics.hpp"
#include "fairbias/learners.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fairbias {

enum class Family { ssb_size, urb_ratio, decomposition, collect };
enum class CollectVariant { minority_random, majority_random, minority_positive_only };
enum class Axis { size, ratio };

std::string_view to_string(Family family);
std::string_view to_string(CollectVariant variant);
std::string_view to_string(Axis axis);
Family parse_family(std::string_view name);
CollectVariant parse_variant(std::string_view name);
Axis parse_axis(std::string_view name);

struct SweepSpec {
    Family family = Family::ssb_size;
    std::vector<double> grid; // empty: family default
    std::size_t replicates = 30;
    std::uint64_t seed = 0;
    LearnerSpec learner;
    std::vector<MetricKind> metrics;
    Estimator estimator = Estimator::mean_over_models;
    double test_fraction = 0.3;
    bool with_replacement = false;
    int threads = 1;

    // ssb_size, decomposition on the size axis
    double max_fraction = 0.8;      // default grid ends at this share of the train pool
    std::size_t reference_size = 0; // M; 0 means the largest grid point

    // urb_ratio, decomposition on the ratio axis
    std::size_t total_size = 1000;

    Axis axis = Axis::size;

    // collect
    std::size_t fixed_majority = 100;
    CollectVariant variant = CollectVariant::minority_random;
    bool cross_validation = false;
    std::size_t cv_folds = 3;

    // Family-aware defaults (replicates 50 for collect, main_prediction for
    // decomposition) apply to keys absent from the document.
    static SweepSpec from_json(const nlohmann::json& doc, Family family);
    [[nodiscard]] nlohmann::json to_json() const;

    void validate(Task task) const;
};

struct SweepRow {
    Family family = Family::ssb_size;
    std::string grid_param;
    double grid_value = 0.0;
    MetricKind metric = MetricKind::ZOL;
    std::string estimator;
    // Per-replicate values behind mean/stderr; empty for rows with a single value.
    std::vector<MaybeValue> replicates;
    MaybeValue mean;
    MaybeValue std_error;
    std::size_t k_defined = 0;
    std::size_t k_total = 0;
    MaybeValue bias_delta;
    MaybeValue netvar_delta;
    MaybeValue group0_mean;
    MaybeValue group1_mean;
};

struct SweepResult {
    Family family = Family::ssb_size;
    std::vector<SweepRow> rows;
    double population_ratio = 0.0;
    std::uint64_t seed = 0;
    nlohmann::json diagnostics = nlohmann::json::object();

    void write_csv(std::ostream& out) const;
};

std::vector<std::string> sweep_csv_header();

// Shortest round-trip decimal; empty for undefined.
std::string format_number(const MaybeValue& v);

// mean, stderr, k_defined and k_total of a row recomputed from its replicates;
// rows without replicates are returned unchanged.
std::vector<SweepRow> aggregate(const SweepResult& result);

// Grids used when SweepSpec::grid is empty.
std::vector<double> default_size_grid(std::size_t pool_size, double max_fraction);
std::vector<double> default_ratio_grid(double population_ratio);
std::vector<double> default_collect_grid();

// Seed of the sampling plan at one grid cell; replicates are tagged inside
// draw_sample, completing the (seed, family, cell, replicate) stream key.
std::uint64_t cell_seed(std::uint64_t seed, Family family, std::initializer_list<std::uint64_t> cell);

SweepResult run_ssb_sweep(const Dataset& ds, const SweepSpec& spec);
SweepResult run_urb_sweep(const Dataset& ds, const SweepSpec& spec);
SweepResult run_decomposition_sweep(const Dataset& ds, const SweepSpec& spec);
SweepResult run_collect_sim(const Dataset& ds, const SweepSpec& spec);
SweepResult run_sweep(const Dataset& ds, const SweepSpec& spec);

// Sampling pool and plan of one collect cell; exposed so callers can inspect draws.
Dataset collect_pool(const Dataset& train_pool, CollectVariant variant);
SamplingPlan collect_plan(const SweepSpec& spec, std::size_t count);

} // namespace fairbias

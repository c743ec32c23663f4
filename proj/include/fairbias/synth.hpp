#pragma once

#include "fairbias/csv.hpp"
#include "fairbias/dataset.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fairbias {

// Two-group Gaussian population. Group a1 features are shifted by `shift`;
// the outcome is logistic (classification) or linear plus Gaussian noise
// (regression) in beta . x + intercept + the group's offset.
struct SynthSpec {
    std::size_t n = 10000;
    std::size_t d = 5;
    double group1_share = 0.31;
    std::vector<double> shift; // empty: zero shift
    Task task = Task::classification;
    std::vector<double> beta; // empty: every coefficient 1/sqrt(d)
    double intercept = 0.0;
    double offset_a0 = 0.0;
    double offset_a1 = 0.0;
    double noise_sd = 0.0; // regression only
    std::uint64_t seed = 0;

    static SynthSpec from_json(const nlohmann::json& doc);
    [[nodiscard]] nlohmann::json to_json() const;

    // Throws ConfigError on a degenerate spec.
    void validate() const;

    [[nodiscard]] std::vector<double> effective_shift() const;
    [[nodiscard]] std::vector<double> effective_beta() const;
};

// Raw features (not standardized). Group a1 has exactly round(share * n) rows,
// placed at random positions.
Dataset generate(const SynthSpec& spec);

// The same population as a CSV table (header x0.., group, y; groups g0/g1,
// classification labels 0/1) and the schema that loads it back.
std::vector<csv::Row> synth_table(const SynthSpec& spec);
Schema synth_schema(const SynthSpec& spec);

// Dataset exactly as load_csv would produce from synth_table.
Dataset synth_dataset(const SynthSpec& spec);

} // namespace fairbias

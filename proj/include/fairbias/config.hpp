#pragma once

#include "fairbias/dataset.hpp"
#include "fairbias/experiments.hpp"
#include "fairbias/group_metrics.hpp"
#include "fairbias/learners.hpp"
#include "fairbias/synth.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fairbias {

// One JSON document per run:
// {
//   "dataset": {"csv": path, "schema": path} | {"synth": {...}},
//   "learner": {"kind": ..., overrides},
//   "metrics": ["EO", ...],          optional, defaults by task
//   "seed": 7, "test_fraction": 0.3, "threads": 1,
//   "sweep": {"family": ..., ...},   sweep and decompose only
//   "output": "out"
// }
// Relative paths resolve against the config file's directory.
struct RunConfig {
    std::string csv_path;
    std::string schema_path;
    std::optional<SynthSpec> synth;
    LearnerSpec learner;
    std::vector<MetricKind> metrics; // empty: task defaults
    std::uint64_t seed = 0;
    double test_fraction = 0.3;
    int threads = 1;
    nlohmann::json sweep = nlohmann::json::object();
    std::string output = "out";
    std::string description;

    // Raw bytes of the config file, for hashing.
    std::string source_bytes;

    static RunConfig from_json(const nlohmann::json& doc, const std::string& base_dir);
    static RunConfig load(const std::string& path);

    // Effective config with overrides applied, paths as resolved.
    [[nodiscard]] nlohmann::json to_json() const;
};

struct LoadedData {
    Dataset dataset;
    std::string sha256; // of the CSV bytes (synth: of the generated table)
};

LoadedData load_dataset(const RunConfig& config);

std::vector<MetricKind> default_metrics(Task task);
std::vector<MetricKind> resolve_metrics(const RunConfig& config, Task task);

// Builds the sweep spec from config.sweep plus the run-level fields.
SweepSpec make_sweep_spec(const RunConfig& config, Task task, std::optional<Family> forced = std::nullopt);

std::string sha256_hex(std::string_view bytes);
std::string read_text(const std::string& path);

// Per-group cost table of a single model: metric,value_a0,value_a1,disc.
std::vector<std::string> metrics_csv_header();
void write_metrics_csv(std::ostream& out, const std::vector<GroupCostReport>& reports);

// Trains one model on the train pool and evaluates it on the held-out set.
std::vector<GroupCostReport> evaluate_single_model(const RunConfig& config, const Dataset& ds);

} // namespace fairbias

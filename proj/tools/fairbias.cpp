#include "fairbias/config.hpp"
#include "fairbias/csv.hpp"
#include "fairbias/experiments.hpp"
#include "fairbias/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace fairbias;

namespace {

enum Exit { ok = 0, config_error = 2, data_error = 3, internal_error = 4 };

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
};

std::string utc_now()
{
    std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

RunConfig load_config(const Options& opt)
{
    RunConfig cfg = RunConfig::load(opt.config);
    if (opt.seed) {
        cfg.seed = *opt.seed;
    }
    if (opt.out) {
        cfg.output = *opt.out;
    }
    if (opt.threads) {
        if (*opt.threads < 1) {
            throw ConfigError("--threads must be at least 1");
        }
        cfg.threads = *opt.threads;
    }
    return cfg;
}

fs::path prepare_output(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory '" + dir + "': " + ec.message());
    }
    return fs::path(dir);
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw ConfigError("cannot write '" + path.string() + "'");
    }
}

nlohmann::json manifest(const RunConfig& cfg, const LoadedData& data, std::size_t rows)
{
    return { { "config", cfg.to_json() }, { "config_sha256", sha256_hex(cfg.source_bytes) }, { "seed", cfg.seed },
        { "dataset_sha256", data.sha256 }, { "version", std::string(kVersion) }, { "started_at", utc_now() },
        { "rows_written", rows }, { "population_ratio", population_ratio(data.dataset) },
        { "dataset_rows", data.dataset.size() }, { "task", std::string(to_string(data.dataset.task)) } };
}

int cmd_metrics(const Options& opt)
{
    auto cfg = load_config(opt);
    auto started = utc_now();
    auto data = load_dataset(cfg);
    auto reports = evaluate_single_model(cfg, data.dataset);
    auto dir = prepare_output(cfg.output);
    std::ostringstream csv_text;
    write_metrics_csv(csv_text, reports);
    write_file(dir / "metrics.csv", csv_text.str());
    auto m = manifest(cfg, data, reports.size());
    m["started_at"] = started;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    std::cout << "wrote " << reports.size() << " metric rows to " << (dir / "metrics.csv").string() << "\n";
    return ok;
}

int run_sweep_command(const Options& opt, std::optional<Family> forced, const std::string& csv_name)
{
    auto cfg = load_config(opt);
    auto started = utc_now();
    auto data = load_dataset(cfg);
    auto spec = make_sweep_spec(cfg, data.dataset.task, forced);
    auto result = run_sweep(data.dataset, spec);
    auto dir = prepare_output(cfg.output);
    std::ostringstream csv_text;
    result.write_csv(csv_text);
    write_file(dir / csv_name, csv_text.str());
    auto m = manifest(cfg, data, result.rows.size());
    m["started_at"] = started;
    m["sweep"] = spec.to_json();
    m["family"] = std::string(to_string(spec.family));
    if (spec.family == Family::collect) {
        m["variant"] = std::string(to_string(spec.variant));
    }
    m["diagnostics"] = result.diagnostics;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    std::cout << "wrote " << result.rows.size() << " rows to " << (dir / csv_name).string() << "\n";
    return ok;
}

int cmd_synth(const Options& opt)
{
    std::string bytes = read_text(opt.config);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("synth config: " + std::string(e.what()));
    }
    SynthSpec spec = SynthSpec::from_json(doc);
    if (opt.seed) {
        spec.seed = *opt.seed;
    }
    auto dir = prepare_output(opt.out.value_or("out"));
    std::ostringstream table;
    for (const auto& row : synth_table(spec)) {
        csv::write_row(table, row);
    }
    write_file(dir / "synth.csv", table.str());
    auto schema = synth_schema(spec).to_json();
    schema["description"] = "synthetic two-group population " + spec.to_json().dump();
    write_file(dir / "synth.schema.json", schema.dump(2) + "\n");
    std::cout << "wrote " << spec.n << " rows to " << (dir / "synth.csv").string() << "\n";
    return ok;
}

template <class F>
int guarded(F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return config_error;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return data_error;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return internal_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return internal_error;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "Sample-size and underrepresentation bias in fairness measurements" };
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON config file")->required();
        sub->add_option("--seed", opt.seed, "Override the config seed");
        sub->add_option("--out", opt.out, "Override the output directory");
        sub->add_option("--threads", opt.threads, "Worker threads (results do not depend on it)");
    };
    auto* metrics = app.add_subcommand("metrics", "Train one model and write per-group costs");
    auto* sweep = app.add_subcommand("sweep", "Run an ssb_size, urb_ratio, decomposition or collect sweep");
    auto* decompose = app.add_subcommand("decompose", "Run a bias / net-variance decomposition sweep");
    auto* synth = app.add_subcommand("synth", "Write a synthetic population and its schema");
    for (auto* sub : { metrics, sweep, decompose, synth }) {
        add_common(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    return guarded([&] {
        if (metrics->parsed()) {
            return cmd_metrics(opt);
        }
        if (sweep->parsed()) {
            return run_sweep_command(opt, std::nullopt, "sweep.csv");
        }
        if (decompose->parsed()) {
            return run_sweep_command(opt, Family::decomposition, "decomposition.csv");
        }
        return cmd_synth(opt);
    });
}

#include "fairbias/config.hpp"

#include "fairbias/csv.hpp"

#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace fairbias {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& base, const std::string& path)
{
    if (path.empty() || fs::path(path).is_absolute()) {
        return path;
    }
    return (fs::path(base) / path).lexically_normal().string();
}

void require_file(const std::string& path, std::string_view what)
{
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw ConfigError(std::string(what) + " '" + path + "' does not exist");
    }
}

std::string table_text(const std::vector<csv::Row>& rows)
{
    std::ostringstream out;
    for (const auto& r : rows) {
        csv::write_row(out, r);
    }
    return out.str();
}

} // namespace

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

RunConfig RunConfig::from_json(const nlohmann::json& doc, const std::string& base_dir)
{
    if (!doc.is_object()) {
        throw ConfigError("config: expected a JSON object");
    }
    static const std::set<std::string> allowed = { "dataset", "learner", "metrics", "seed", "test_fraction",
        "threads", "sweep", "output", "description" };
    RunConfig cfg;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!allowed.contains(key)) {
                throw ConfigError("config: unknown key '" + key + "'");
            }
        }
        if (!doc.contains("dataset")) {
            throw ConfigError("config: 'dataset' is required");
        }
        const auto& data = doc.at("dataset");
        if (!data.is_object()) {
            throw ConfigError("config: 'dataset' must be an object");
        }
        for (const auto& [key, value] : data.items()) {
            if (key != "csv" && key != "schema" && key != "synth") {
                throw ConfigError("dataset: unknown key '" + key + "'");
            }
        }
        if (data.contains("synth")) {
            if (data.contains("csv") || data.contains("schema")) {
                throw ConfigError("dataset: give either synth or csv + schema, not both");
            }
            cfg.synth = SynthSpec::from_json(data.at("synth"));
        } else {
            if (!data.contains("csv") || !data.contains("schema")) {
                throw ConfigError("dataset: csv and schema are both required");
            }
            cfg.csv_path = resolve(base_dir, data.at("csv").get<std::string>());
            cfg.schema_path = resolve(base_dir, data.at("schema").get<std::string>());
        }
        if (doc.contains("learner")) {
            cfg.learner = LearnerSpec::from_json(doc.at("learner"));
        }
        if (doc.contains("metrics")) {
            cfg.metrics = parse_metrics(doc.at("metrics"));
        }
        if (doc.contains("seed")) {
            cfg.seed = doc.at("seed").get<std::uint64_t>();
        }
        if (doc.contains("test_fraction")) {
            cfg.test_fraction = doc.at("test_fraction").get<double>();
        }
        if (doc.contains("threads")) {
            cfg.threads = doc.at("threads").get<int>();
        }
        if (doc.contains("sweep")) {
            cfg.sweep = doc.at("sweep");
            if (!cfg.sweep.is_object()) {
                throw ConfigError("config: 'sweep' must be an object");
            }
        }
        cfg.output = resolve(base_dir, doc.value("output", std::string("out")));
        cfg.description = doc.value("description", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
        throw ConfigError("config: test_fraction must lie in (0, 1)");
    }
    if (cfg.threads < 1) {
        throw ConfigError("config: threads must be at least 1");
    }
    if (!cfg.synth) {
        require_file(cfg.schema_path, "schema file");
        require_file(cfg.csv_path, "data file");
    }
    return cfg;
}

RunConfig RunConfig::load(const std::string& path)
{
    require_file(path, "config file");
    std::string bytes = read_text(path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config '" + path + "': " + e.what());
    }
    auto base = fs::path(path).parent_path().string();
    RunConfig cfg = from_json(doc, base.empty() ? "." : base);
    cfg.source_bytes = std::move(bytes);
    return cfg;
}

nlohmann::json RunConfig::to_json() const
{
    nlohmann::json doc;
    if (synth) {
        doc["dataset"] = { { "synth", synth->to_json() } };
    } else {
        doc["dataset"] = { { "csv", csv_path }, { "schema", schema_path } };
    }
    doc["learner"] = learner.to_json();
    nlohmann::json names = nlohmann::json::array();
    for (auto m : metrics) {
        names.push_back(std::string(to_string(m)));
    }
    doc["metrics"] = names;
    doc["seed"] = seed;
    doc["test_fraction"] = test_fraction;
    doc["threads"] = threads;
    doc["sweep"] = sweep;
    doc["output"] = output;
    if (!description.empty()) {
        doc["description"] = description;
    }
    return doc;
}

LoadedData load_dataset(const RunConfig& config)
{
    if (config.synth) {
        auto table = synth_table(*config.synth);
        return { encode_rows(table, synth_schema(*config.synth)), sha256_hex(table_text(table)) };
    }
    Schema schema = load_schema(config.schema_path);
    std::string bytes;
    {
        std::ifstream in(config.csv_path, std::ios::binary);
        if (!in) {
            throw DataError(DataErrorCode::malformed_csv, "cannot open '" + config.csv_path + "'");
        }
        std::ostringstream buffer;
        buffer << in.rdbuf();
        bytes = buffer.str();
    }
    return { encode_rows(csv::parse(bytes), schema), sha256_hex(bytes) };
}

std::vector<MetricKind> default_metrics(Task task)
{
    if (task == Task::regression) {
        return { MetricKind::MSE };
    }
    return { MetricKind::FPR, MetricKind::FNR, MetricKind::EO, MetricKind::ZOL, MetricKind::AUC, MetricKind::SD };
}

std::vector<MetricKind> resolve_metrics(const RunConfig& config, Task task)
{
    auto metrics = config.metrics.empty() ? default_metrics(task) : config.metrics;
    for (auto m : metrics) {
        if (!valid_for(m, task)) {
            throw ConfigError("metric " + std::string(to_string(m)) + " does not apply to a "
                + std::string(to_string(task)) + " task");
        }
    }
    return metrics;
}

SweepSpec make_sweep_spec(const RunConfig& config, Task task, std::optional<Family> forced)
{
    if (!forced && !config.sweep.contains("family")) {
        throw ConfigError("sweep: 'family' is required");
    }
    SweepSpec spec = SweepSpec::from_json(config.sweep, forced.value_or(Family::ssb_size));
    if (forced && spec.family != *forced) {
        throw ConfigError("sweep: family must be " + std::string(to_string(*forced)) + " for this command");
    }
    spec.seed = config.seed;
    spec.learner = config.learner;
    spec.test_fraction = config.test_fraction;
    spec.threads = config.threads;
    if (config.metrics.empty() && spec.family == Family::decomposition) {
        spec.metrics = task == Task::regression
            ? std::vector<MetricKind>{ MetricKind::MSE }
            : std::vector<MetricKind>{ MetricKind::ZOL, MetricKind::FPR, MetricKind::EO };
    } else {
        spec.metrics = resolve_metrics(config, task);
    }
    spec.validate(task);
    return spec;
}

std::vector<std::string> metrics_csv_header()
{
    return { "metric", "value_a0", "value_a1", "disc" };
}

void write_metrics_csv(std::ostream& out, const std::vector<GroupCostReport>& reports)
{
    csv::write_row(out, metrics_csv_header());
    for (const auto& r : reports) {
        csv::write_row(out, { std::string(to_string(r.metric)), format_number(r.value_a0), format_number(r.value_a1),
                                format_number(r.disc) });
    }
}

std::vector<GroupCostReport> evaluate_single_model(const RunConfig& config, const Dataset& ds)
{
    ds.validate();
    config.learner.validate_for(ds.task);
    const auto metrics = resolve_metrics(config, ds.task);
    auto split = holdout_split(ds, config.test_fraction, config.seed);
    auto pred = fit(config.learner, split.train_pool).predict(split.test.X);
    Observations obs{ split.test.y, pred.labels, pred.scores, split.test.a };
    return disc_vector(obs, metrics);
}

} // namespace fairbias

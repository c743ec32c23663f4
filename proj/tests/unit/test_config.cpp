#include "fairbias/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fairbias;
namespace fs = std::filesystem;

namespace {

nlohmann::json synth_config()
{
    return nlohmann::json::parse(R"({
        "dataset": {"synth": {"n": 400, "seed": 1}},
        "learner": {"kind": "logistic_regression"},
        "seed": 3
    })");
}

} // namespace

TEST(Config, UnknownKeysRejected)
{
    auto doc = synth_config();
    doc["sede"] = 1;
    EXPECT_THROW(RunConfig::from_json(doc, "."), ConfigError);
    doc = synth_config();
    doc["dataset"]["extra"] = 1;
    EXPECT_THROW(RunConfig::from_json(doc, "."), ConfigError);
}

TEST(Config, MissingFilesAreConfigErrors)
{
    auto doc = nlohmann::json::parse(R"({"dataset": {"csv": "nope.csv", "schema": "nope.json"}})");
    EXPECT_THROW(RunConfig::from_json(doc, "/nonexistent"), ConfigError);
    EXPECT_THROW(RunConfig::load("/nonexistent/config.json"), ConfigError);
}

TEST(Config, RelativePathsResolveAgainstConfigDir)
{
    auto dir = fs::temp_directory_path() / "fairbias_config_test";
    fs::create_directories(dir / "d");
    std::ofstream(dir / "d" / "t.csv") << "x,g,y\n";
    std::ofstream(dir / "d" / "s.json") << "{}";
    std::ofstream(dir / "c.json") << R"({"dataset": {"csv": "d/t.csv", "schema": "d/s.json"}, "output": "o"})";
    auto cfg = RunConfig::load((dir / "c.json").string());
    EXPECT_EQ(fs::path(cfg.csv_path), (dir / "d" / "t.csv").lexically_normal());
    EXPECT_EQ(fs::path(cfg.output), (dir / "o").lexically_normal());
    EXPECT_FALSE(cfg.source_bytes.empty());
    fs::remove_all(dir);
}

TEST(Config, DefaultMetricsByTask)
{
    EXPECT_EQ(default_metrics(Task::regression), std::vector<MetricKind>{ MetricKind::MSE });
    EXPECT_EQ(default_metrics(Task::classification).size(), 6u);
    auto cfg = RunConfig::from_json(synth_config(), ".");
    cfg.metrics = { MetricKind::MSE };
    EXPECT_THROW(resolve_metrics(cfg, Task::classification), ConfigError);
}

TEST(Config, SweepSpecTakesRunFields)
{
    auto doc = synth_config();
    doc["sweep"] = { { "family", "ssb_size" }, { "grid", { 10, 20 } }, { "replicates", 3 } };
    doc["threads"] = 2;
    auto cfg = RunConfig::from_json(doc, ".");
    auto spec = make_sweep_spec(cfg, Task::classification);
    EXPECT_EQ(spec.seed, 3u);
    EXPECT_EQ(spec.threads, 2);
    EXPECT_EQ(spec.replicates, 3u);
    EXPECT_THROW(make_sweep_spec(cfg, Task::classification, Family::decomposition), ConfigError);
}

TEST(Config, RegressionLearnerOnClassificationData)
{
    auto doc = synth_config();
    doc["learner"] = { { "kind", "linear_regression" } };
    auto cfg = RunConfig::from_json(doc, ".");
    auto data = load_dataset(cfg);
    EXPECT_THROW(evaluate_single_model(cfg, data.dataset), ConfigError);
}

TEST(Config, SingleModelMetricsTable)
{
    auto cfg = RunConfig::from_json(synth_config(), ".");
    auto data = load_dataset(cfg);
    EXPECT_EQ(data.sha256.size(), 64u);
    auto reports = evaluate_single_model(cfg, data.dataset);
    ASSERT_EQ(reports.size(), 6u);
    EXPECT_EQ(*reports[2].disc, -*reports[1].disc);
    std::ostringstream out;
    write_metrics_csv(out, reports);
    EXPECT_EQ(out.str().substr(0, 28), "metric,value_a0,value_a1,dis");
}

TEST(Config, Sha256)
{
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

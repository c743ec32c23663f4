#include "fairbias/synth.hpp"

#include "fairbias/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

namespace fairbias {

namespace {

constexpr std::uint64_t kSynthTag = 0x73796e7468ULL;

std::string shortest(double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

SynthSpec SynthSpec::from_json(const nlohmann::json& doc)
{
    if (!doc.is_object()) {
        throw ConfigError("synth: expected an object");
    }
    static const std::set<std::string> allowed = { "n", "d", "group1_share", "shift", "task", "beta", "intercept",
        "offset_a0", "offset_a1", "noise_sd", "seed" };
    SynthSpec spec;
    try {
        for (const auto& [key, value] : doc.items()) {
            if (!allowed.contains(key)) {
                throw ConfigError("synth: unknown key '" + key + "'");
            }
            if (key == "n") spec.n = value.get<std::size_t>();
            else if (key == "d") spec.d = value.get<std::size_t>();
            else if (key == "group1_share") spec.group1_share = value.get<double>();
            else if (key == "shift") spec.shift = value.get<std::vector<double>>();
            else if (key == "task") spec.task = parse_task(value.get<std::string>());
            else if (key == "beta") spec.beta = value.get<std::vector<double>>();
            else if (key == "intercept") spec.intercept = value.get<double>();
            else if (key == "offset_a0") spec.offset_a0 = value.get<double>();
            else if (key == "offset_a1") spec.offset_a1 = value.get<double>();
            else if (key == "noise_sd") spec.noise_sd = value.get<double>();
            else if (key == "seed") spec.seed = value.get<std::uint64_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("synth: ") + e.what());
    }
    spec.validate();
    return spec;
}

nlohmann::json SynthSpec::to_json() const
{
    return { { "n", n }, { "d", d }, { "group1_share", group1_share }, { "shift", effective_shift() },
        { "task", std::string(to_string(task)) }, { "beta", effective_beta() }, { "intercept", intercept },
        { "offset_a0", offset_a0 }, { "offset_a1", offset_a1 }, { "noise_sd", noise_sd }, { "seed", seed } };
}

void SynthSpec::validate() const
{
    if (d == 0) {
        throw ConfigError("synth: d must be positive");
    }
    if (!(group1_share > 0.0 && group1_share < 1.0)) {
        throw ConfigError("synth: group1_share must lie in (0, 1)");
    }
    const double n1 = std::round(group1_share * static_cast<double>(n));
    if (n1 < 2.0 || static_cast<double>(n) - n1 < 2.0) {
        throw ConfigError("synth: each group needs at least 2 rows");
    }
    if (!shift.empty() && shift.size() != d) {
        throw ConfigError("synth: shift must have d entries");
    }
    if (!beta.empty() && beta.size() != d) {
        throw ConfigError("synth: beta must have d entries");
    }
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
        throw ConfigError("synth: noise_sd must be a finite non-negative number");
    }
}

std::vector<double> SynthSpec::effective_shift() const
{
    return shift.empty() ? std::vector<double>(d, 0.0) : shift;
}

std::vector<double> SynthSpec::effective_beta() const
{
    return beta.empty() ? std::vector<double>(d, 1.0 / std::sqrt(static_cast<double>(d))) : beta;
}

Dataset generate(const SynthSpec& spec)
{
    spec.validate();
    const auto shift = spec.effective_shift();
    const auto beta = spec.effective_beta();
    auto rng = make_stream(spec.seed, { kSynthTag });

    const auto n1 = static_cast<std::size_t>(std::llround(spec.group1_share * static_cast<double>(spec.n)));
    std::vector<int> groups(spec.n, 0);
    std::fill(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(n1), 1);
    std::shuffle(groups.begin(), groups.end(), rng);

    Dataset ds;
    ds.task = spec.task;
    ds.X.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.d));
    ds.y.resize(spec.n);
    ds.a = groups;
    ds.row_ids.resize(spec.n);
    std::iota(ds.row_ids.begin(), ds.row_ids.end(), std::size_t{0});
    for (std::size_t j = 0; j < spec.d; ++j) {
        ds.feature_names.push_back("x" + std::to_string(j));
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const int g = groups[i];
        double eta = spec.intercept + (g == 1 ? spec.offset_a1 : spec.offset_a0);
        for (std::size_t j = 0; j < spec.d; ++j) {
            const double x = normal(rng) + (g == 1 ? shift[j] : 0.0);
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
            eta += beta[j] * x;
        }
        if (spec.task == Task::classification) {
            const double p = 1.0 / (1.0 + std::exp(-eta));
            ds.y[i] = unit(rng) < p ? 1.0 : 0.0;
        } else {
            ds.y[i] = spec.noise_sd > 0.0 ? eta + spec.noise_sd * normal(rng) : eta;
        }
    }
    return ds;
}

std::vector<csv::Row> synth_table(const SynthSpec& spec)
{
    const Dataset ds = generate(spec);
    std::vector<csv::Row> rows;
    rows.reserve(ds.size() + 1);
    csv::Row header = ds.feature_names;
    header.emplace_back("group");
    header.emplace_back("y");
    rows.push_back(std::move(header));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        csv::Row row;
        row.reserve(spec.d + 2);
        for (std::size_t j = 0; j < spec.d; ++j) {
            row.push_back(shortest(ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
        row.emplace_back(ds.a[i] == 1 ? "g1" : "g0");
        row.push_back(spec.task == Task::classification ? (ds.y[i] != 0.0 ? "1" : "0") : shortest(ds.y[i]));
        rows.push_back(std::move(row));
    }
    return rows;
}

Schema synth_schema(const SynthSpec& spec)
{
    Schema schema;
    schema.target_column = "y";
    schema.positive_label = spec.task == Task::classification ? "1" : "";
    schema.sensitive_column = "group";
    schema.privileged_value = "g0";
    schema.task = spec.task;
    for (std::size_t j = 0; j < spec.d; ++j) {
        schema.features.push_back({ "x" + std::to_string(j), FeatureKind::numeric });
    }
    return schema;
}

Dataset synth_dataset(const SynthSpec& spec)
{
    return encode_rows(synth_table(spec), synth_schema(spec));
}

} // namespace fairbias

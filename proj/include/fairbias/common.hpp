#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fairbias {

// Row-major so that a training row is contiguous; learners and kNN walk rows.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// A cost or discrimination value that may be undefined (empty conditioning set).
using MaybeValue = std::optional<double>;

enum class Task { classification, regression };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

inline constexpr std::string_view kVersion = "1.0.0";

// Error taxonomy. The CLI maps these onto exit codes 2, 3 and 4.

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DataErrorCode {
    malformed_csv,
    missing_column,
    missing_value,
    unparsable_numeric,
    sensitive_not_binary,
    target_not_binary,
    empty_group,
    stratum_too_small,
    pool_exhausted,
    dimension_mismatch,
    empty_dataset,
};

std::string_view to_string(DataErrorCode code);

class DataError : public std::runtime_error {
public:
    DataError(DataErrorCode code, const std::string& detail);

    [[nodiscard]] DataErrorCode code() const noexcept { return code_; }

private:
    DataErrorCode code_;
};

class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace fairbias

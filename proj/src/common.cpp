#include "fairbias/common.hpp"

namespace fairbias {

std::string_view to_string(Task task)
{
    return task == Task::classification ? "classification" : "regression";
}

Task parse_task(std::string_view name)
{
    if (name == "classification") {
        return Task::classification;
    }
    if (name == "regression") {
        return Task::regression;
    }
    throw ConfigError("unknown task '" + std::string(name) + "' (expected classification or regression)");
}

std::string_view to_string(DataErrorCode code)
{
    switch (code) {
    case DataErrorCode::malformed_csv: return "malformed csv";
    case DataErrorCode::missing_column: return "missing column";
    case DataErrorCode::missing_value: return "missing value";
    case DataErrorCode::unparsable_numeric: return "unparsable numeric";
    case DataErrorCode::sensitive_not_binary: return "sensitive not binary";
    case DataErrorCode::target_not_binary: return "target not binary";
    case DataErrorCode::empty_group: return "empty group";
    case DataErrorCode::stratum_too_small: return "stratum too small";
    case DataErrorCode::pool_exhausted: return "group pool exhausted";
    case DataErrorCode::dimension_mismatch: return "dimension mismatch";
    case DataErrorCode::empty_dataset: return "empty dataset";
    }
    return "data error";
}

DataError::DataError(DataErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail)
    , code_(code)
{
}

} // namespace fairbias

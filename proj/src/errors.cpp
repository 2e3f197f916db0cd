#include "dataecon/errors.hpp"

#include <utility>

namespace dataecon {

namespace {

std::string describe(const std::vector<ValidationError::Violation>& violations) {
    std::string msg = "invalid parameters:";
    for (const auto& v : violations) {
        msg += " " + v.field + " (" + v.bound + ");";
    }
    if (!violations.empty()) msg.pop_back();
    return msg;
}

std::string join_columns(const std::vector<std::string>& columns) {
    std::string msg = "rank-deficient design, collinear columns:";
    for (const auto& c : columns) msg += " " + c;
    return msg;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(describe(violations)), violations_(std::move(violations)) {}

RankDeficiencyError::RankDeficiencyError(std::vector<std::string> columns)
    : DesignError(join_columns(columns)), columns_(std::move(columns)) {}

}  // namespace dataecon

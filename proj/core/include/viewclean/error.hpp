#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace viewclean {

enum class ErrorCode {
    parse,             // malformed CSV or dependency text
    ingest,            // duplicate / invalid row ids on load
    condition,         // view condition invalid for its table
    schema,            // unknown attribute in a dependency or detector request
    validation,        // malformed request or argument
    not_found,         // unknown table, row, view, mark set or audit entry
    mark,              // unresolvable cell in a mark request
    lineage,           // relax with atoms outside the parent
    scope,             // correction outside the view's rows
    conflict,          // undo blocked by an intervening edit
    state,             // operation not allowed in the current state (double undo)
    restore,           // corrupted snapshot / changelog
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `detail` carries machine-readable
/// context (offending cells, line numbers) and is surfaced verbatim in API
/// error bodies.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::ordered_json detail = nullptr)
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::ordered_json& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    nlohmann::ordered_json detail_;
};

}  // namespace viewclean

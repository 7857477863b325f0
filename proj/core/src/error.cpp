#include "viewclean/error.hpp"

namespace viewclean {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::parse: return "parse_error";
        case ErrorCode::ingest: return "ingest_error";
        case ErrorCode::condition: return "condition_error";
        case ErrorCode::schema: return "schema_error";
        case ErrorCode::validation: return "validation_error";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::mark: return "mark_error";
        case ErrorCode::lineage: return "lineage_error";
        case ErrorCode::scope: return "scope_error";
        case ErrorCode::conflict: return "conflict";
        case ErrorCode::state: return "state_error";
        case ErrorCode::restore: return "restore_error";
    }
    return "error";
}

}  // namespace viewclean

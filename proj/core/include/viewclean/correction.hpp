#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "viewclean/session.hpp"

namespace viewclean {

struct CorrectionResult {
    AuditEntry entry;
    /// Marked cells among the changed cells. Corrections never unmark; the
    /// caller decides whether to resolve them.
    std::vector<CellRef> touched_marks;
};

/// Corrects one cell through a view. The cell's row must satisfy the view
/// condition at execution time (scope_error otherwise). Writing the current
/// value still records an entry with old == new.
CorrectionResult correct_cell(Session& session, ViewId view, const CellRef& cell,
                              CellValue new_value, std::string actor);

/// Batch form: every cell of `attribute` equal to `old_value` among the
/// view's current rows becomes `new_value`. Zero matches records an empty
/// entry.
/// Cells correct_values would change right now, without recording anything.
std::vector<CellChange> plan_values(const Session& session, ViewId view, const std::string& attribute,
                                    const CellValue& old_value, const CellValue& new_value);

CorrectionResult correct_values(Session& session, ViewId view, const std::string& attribute,
                                const CellValue& old_value, const CellValue& new_value,
                                std::string actor);

/// Appends a compensating entry restoring every pre-image of `entry` and
/// flags `entry` undone. Throws state_error when already undone, conflict
/// when a later edit changed one of its cells (detail lists them).
AuditEntry undo(Session& session, AuditId entry, std::optional<std::string> actor = std::nullopt);

struct HistoryFilter {
    std::optional<std::string> table;
    std::optional<std::string> attribute;
    std::optional<ViewId> view;
};

std::vector<AuditEntry> history(const Session& session, const HistoryFilter& filter = {});

struct SubstitutionRule {
    std::string attribute;
    std::string old_value;
    std::string new_value;
    std::size_t support = 0;  // number of effective corrections applying it
    AuditId last_applied;

    friend bool operator==(const SubstitutionRule&, const SubstitutionRule&) = default;
};

/// Exact-match lookup of past substitutions `value -> x` on `attribute`,
/// ranked by support then recency. Only corrections that are currently in
/// effect count: an undone correction contributes nothing until its undo is
/// itself undone.
std::vector<SubstitutionRule> suggest_from_history(const Session& session, std::string_view table,
                                                   std::string_view attribute, std::string_view value);

/// True when the correction `entry` (not a compensating entry) is in effect.
bool correction_in_effect(const Session& session, const AuditEntry& entry);

}  // namespace viewclean

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "viewclean/session.hpp"

namespace viewclean {

// Views are stored conditions plus lineage; they are never materialized.
// Every evaluation reads the current base table, so corrections show up
// without a refresh. Rows keep their base row-id, which makes updates
// through a view unambiguous.

ViewDef create_view(Session& session, const std::string& table, ViewCondition condition);

/// Child with the parent's atoms plus `extra_atoms`.
ViewDef refine_view(Session& session, ViewId parent, const std::vector<ConditionAtom>& extra_atoms);

/// Child keeping a subset of the parent's atoms. Throws lineage_error when
/// an atom in `keep` is not one of the parent's.
ViewDef relax_view(Session& session, ViewId parent, const std::vector<ConditionAtom>& keep);

/// Stores a view derived from a mark set (lineage label from_marks).
/// The condition must select every row that holds a marked cell.
ViewDef create_view_from_marks(Session& session, MarkSetId marks, ViewCondition condition);

std::vector<RowId> view_row_ids(const Session& session, const ViewDef& view);

struct Paging {
    std::size_t offset = 0;
    std::optional<std::size_t> limit = 100;  // nullopt: no limit
};

struct ViewPage {
    ViewId view;
    std::vector<Row> rows;
    std::size_t total_count = 0;
    std::vector<CellRef> marked_cells;  // marked cells on the returned rows
    Paging paging;

    bool empty_view() const noexcept { return total_count == 0; }
};

ViewPage evaluate_view(const Session& session, ViewId view, Paging paging = {});

struct LineageStep {
    ViewId view;
    Derivation derivation;
    ViewCondition condition;
};

/// Root first, `view` last.
std::vector<LineageStep> view_lineage(const Session& session, ViewId view);

}  // namespace viewclean

#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "viewclean/session.hpp"

namespace viewclean {

/// Records a new mark set. Duplicate cells in `cells` collapse to one.
/// Throws mark_error naming the first cell that does not resolve, and
/// validation_error for an empty request. Table data is never touched.
MarkSet mark_cells(Session& session, const std::vector<CellRef>& cells,
                   std::optional<std::string> label = std::nullopt,
                   MarkOrigin origin = MarkOrigin::manual);

/// Removes cells from a set; cells not in the set are ignored. Returns the
/// remaining set, or nullopt when the set became empty and was deleted.
std::optional<MarkSet> unmark(Session& session, MarkSetId id, const std::vector<CellRef>& cells);

/// Union of all mark sets' cells, optionally restricted to one table.
std::set<CellRef> marked_cells(const Session& session, std::optional<std::string_view> table = std::nullopt);

/// Marked cells whose rows currently satisfy the view's condition.
std::set<CellRef> marks_in_view(const Session& session, const ViewDef& view);

}  // namespace viewclean

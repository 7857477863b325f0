#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <vector>

#include "viewclean/session.hpp"

namespace viewclean {

struct SuggestionParams {
    std::size_t max_atoms = 2;
    std::optional<std::size_t> min_rows;  // default: marked-row count + 1
    std::size_t max_rows = 200;
    std::set<AtomOp> ops_allowed{AtomOp::equals};

    std::size_t effective_min_rows(std::size_t marked_rows) const {
        return min_rows.value_or(marked_rows + 1);
    }
    void validate(std::size_t marked_rows) const;
};

struct SuggestionCandidate {
    ViewCondition condition;
    std::size_t row_count = 0;
    std::size_t extra_rows = 0;  // rows with no marked cell
    bool covers_marked = true;
    bool in_window = false;
    std::size_t marked_attribute_atoms = 0;  // atoms constraining a marked attribute
    std::size_t rank = 0;                    // 1-based position
};

/// Atoms true on every row that holds a marked cell. With `equals` that is
/// one atom per attribute whose value is shared (non-NULL) by all marked
/// rows; `equals_ci` adds case-insensitive agreement and `contains` adds
/// whitespace tokens present in every marked row's value.
std::vector<ConditionAtom> candidate_atoms(const Table& table, const std::set<CellRef>& marked,
                                           const std::set<AtomOp>& ops = {AtomOp::equals});
std::vector<ConditionAtom> candidate_atoms(const Session& session, const MarkSet& marks,
                                           const std::set<AtomOp>& ops = {AtomOp::equals});

/// Every conjunction of 1..max_atoms candidate atoms, best first:
///   1. when any candidate shows an unmarked row, candidates with none go last
///   2. row count inside [min_rows, max_rows] before outside
///   3. fewer atoms
///   4. row count closer to the window midpoint
///   5. more atoms on marked attributes (targets the marked values directly)
///   6. condition text
/// Coverage of all marked rows holds by construction.
std::vector<SuggestionCandidate> suggest_views(const Table& table, const std::set<CellRef>& marked,
                                               const SuggestionParams& params = {});
std::vector<SuggestionCandidate> suggest_views(const Session& session, const MarkSet& marks,
                                               const SuggestionParams& params = {});

/// Stores the top-ranked suggestion as a from_marks view. Throws
/// validation_error when no covering condition exists.
ViewDef create_view_from_suggestion(Session& session, MarkSetId marks,
                                    const SuggestionParams& params = {});

/// Table shared by all cells; validation_error when they span tables or are empty.
const Table& marked_table(const Session& session, const std::set<CellRef>& cells);

}  // namespace viewclean

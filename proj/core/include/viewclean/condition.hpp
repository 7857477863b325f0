#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "viewclean/table.hpp"

namespace viewclean {

enum class AtomOp { equals, equals_ci, contains };

std::string_view to_string(AtomOp op) noexcept;
std::optional<AtomOp> parse_atom_op(std::string_view text) noexcept;

struct ConditionAtom {
    std::string attribute;
    AtomOp op = AtomOp::equals;
    std::string value;

    friend auto operator<=>(const ConditionAtom&, const ConditionAtom&) = default;
};

/// Conjunction of atoms. Atoms are kept sorted and unique, so two
/// conditions with the same atom set compare equal regardless of the order
/// they were written in. The empty conjunction selects every row.
class ViewCondition {
public:
    ViewCondition() = default;
    explicit ViewCondition(std::vector<ConditionAtom> atoms);

    const std::vector<ConditionAtom>& atoms() const noexcept { return atoms_; }
    bool empty() const noexcept { return atoms_.empty(); }
    std::size_t size() const noexcept { return atoms_.size(); }

    bool contains(const ConditionAtom& atom) const;
    bool includes(const ViewCondition& other) const;  // other's atoms ⊆ ours
    ViewCondition with(const std::vector<ConditionAtom>& extra) const;

    /// Human-readable form, e.g. `NP='OMORI' AND OP='KU'`; stable for a given
    /// atom set and used as the last ranking tie-break for suggestions.
    std::string text() const;

    friend auto operator<=>(const ViewCondition&, const ViewCondition&) = default;

private:
    std::vector<ConditionAtom> atoms_;
};

/// A condition with attribute names resolved against one table.
class BoundCondition {
public:
    /// Throws condition_error for unknown attributes or an empty `contains`.
    BoundCondition(const Table& table, const ViewCondition& condition);

    bool matches(const Row& row) const;

private:
    struct Bound {
        std::size_t index;
        AtomOp op;
        std::string value;
    };
    std::vector<Bound> atoms_;
};

bool atom_holds(AtomOp op, const std::string& pattern, const CellValue& value);

/// Rows satisfying the condition in ascending row-id order.
std::vector<RowId> scan_ids(const Table& table, const ViewCondition& condition = {});
std::vector<Row> scan(const Table& table, const std::optional<ViewCondition>& condition = std::nullopt);

}  // namespace viewclean

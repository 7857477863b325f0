#include "viewclean/condition.hpp"

#include <algorithm>

#include "viewclean/text.hpp"

namespace viewclean {

std::string_view to_string(AtomOp op) noexcept {
    switch (op) {
        case AtomOp::equals: return "equals";
        case AtomOp::equals_ci: return "equals_ci";
        case AtomOp::contains: return "contains";
    }
    return "equals";
}

std::optional<AtomOp> parse_atom_op(std::string_view text) noexcept {
    if (text == "equals" || text == "=") return AtomOp::equals;
    if (text == "equals_ci") return AtomOp::equals_ci;
    if (text == "contains") return AtomOp::contains;
    return std::nullopt;
}

ViewCondition::ViewCondition(std::vector<ConditionAtom> atoms) : atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end());
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool ViewCondition::contains(const ConditionAtom& atom) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

bool ViewCondition::includes(const ViewCondition& other) const {
    return std::includes(atoms_.begin(), atoms_.end(), other.atoms_.begin(), other.atoms_.end());
}

ViewCondition ViewCondition::with(const std::vector<ConditionAtom>& extra) const {
    auto all = atoms_;
    all.insert(all.end(), extra.begin(), extra.end());
    return ViewCondition(std::move(all));
}

std::string ViewCondition::text() const {
    if (atoms_.empty()) return "TRUE";
    std::string out;
    for (const auto& a : atoms_) {
        if (!out.empty()) out += " AND ";
        out += a.attribute;
        switch (a.op) {
            case AtomOp::equals: out += "="; break;
            case AtomOp::equals_ci: out += " ILIKE "; break;
            case AtomOp::contains: out += " CONTAINS "; break;
        }
        out += '\'' + a.value + '\'';
    }
    return out;
}

bool atom_holds(AtomOp op, const std::string& pattern, const CellValue& value) {
    if (!value) return false;
    switch (op) {
        case AtomOp::equals: return *value == pattern;
        case AtomOp::equals_ci: return ascii_iequals(*value, pattern);
        case AtomOp::contains: return value->find(pattern) != std::string::npos;
    }
    return false;
}

BoundCondition::BoundCondition(const Table& table, const ViewCondition& condition) {
    for (const auto& a : condition.atoms()) {
        std::size_t idx = table.require_attribute(a.attribute, ErrorCode::condition);
        if (a.op == AtomOp::contains && a.value.empty()) {
            throw Error(ErrorCode::condition, "contains atom on '" + a.attribute + "' needs a value",
                        {{"attribute", a.attribute}});
        }
        atoms_.push_back({idx, a.op, a.value});
    }
}

bool BoundCondition::matches(const Row& row) const {
    return std::all_of(atoms_.begin(), atoms_.end(), [&](const Bound& b) {
        return atom_holds(b.op, b.value, row.values[b.index]);
    });
}

std::vector<RowId> scan_ids(const Table& table, const ViewCondition& condition) {
    BoundCondition bound(table, condition);
    std::vector<RowId> out;
    for (const auto& [id, row] : table.rows()) {
        if (bound.matches(row)) out.push_back(id);
    }
    return out;
}

std::vector<Row> scan(const Table& table, const std::optional<ViewCondition>& condition) {
    BoundCondition bound(table, condition.value_or(ViewCondition{}));
    std::vector<Row> out;
    for (const auto& [id, row] : table.rows()) {
        if (bound.matches(row)) out.push_back(row);
    }
    return out;
}

}  // namespace viewclean

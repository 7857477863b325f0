#include "viewclean/correction.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "viewclean/marking.hpp"
#include "viewclean/serialize.hpp"

namespace viewclean {

namespace {

std::size_t correctable_attribute(const Table& table, std::string_view attribute) {
    std::size_t idx = table.require_attribute(attribute, ErrorCode::validation);
    if (table.id_attribute() && *table.id_attribute() == attribute) {
        throw Error(ErrorCode::validation,
                    "attribute '" + std::string(attribute) + "' carries row ids and cannot be corrected",
                    {{"attribute", attribute}});
    }
    return idx;
}

CorrectionResult record(Session& session, AuditEntry entry) {
    entry.id = session.next_audit_id();
    entry.timestamp = session.now();
    session.commit(ChangeKind::correction, {{"entry", to_json(entry)}});

    CorrectionResult result{session.audit_entry(entry.id), {}};
    auto marks = marked_cells(session, entry.table);
    for (const auto& c : entry.changes) {
        CellRef ref{entry.table, c.row, c.attribute};
        if (marks.contains(ref)) result.touched_marks.push_back(std::move(ref));
    }
    return result;
}

}  // namespace

CorrectionResult correct_cell(Session& session, ViewId view_id, const CellRef& cell,
                              CellValue new_value, std::string actor) {
    const ViewDef& view = session.view(view_id);
    const Table& table = session.table(view.table);
    if (cell.table != view.table) {
        throw Error(ErrorCode::scope, "cell " + describe(cell) + " is not in the view's table",
                    {{"cell", to_json(cell)}, {"view", view_id.value()}});
    }
    std::size_t idx = correctable_attribute(table, cell.attribute);
    const Row& row = table.row(cell.row);
    if (!BoundCondition(table, view.condition).matches(row)) {
        throw Error(ErrorCode::scope,
                    "row " + std::to_string(cell.row.value()) + " is not in view " +
                        std::to_string(view_id.value()),
                    {{"cell", to_json(cell)}, {"view", view_id.value()}});
    }
    AuditEntry entry;
    entry.view = view_id;
    entry.table = view.table;
    entry.actor = std::move(actor);
    entry.changes.push_back({cell.row, cell.attribute, row.values[idx], std::move(new_value)});
    return record(session, std::move(entry));
}

std::vector<CellChange> plan_values(const Session& session, ViewId view_id, const std::string& attribute,
                                    const CellValue& old_value, const CellValue& new_value) {
    const ViewDef& view = session.view(view_id);
    const Table& table = session.table(view.table);
    std::size_t idx = correctable_attribute(table, attribute);
    BoundCondition cond(table, view.condition);
    std::vector<CellChange> changes;
    for (const auto& [id, row] : table.rows()) {
        if (cond.matches(row) && row.values[idx] == old_value) {
            changes.push_back({id, attribute, old_value, new_value});
        }
    }
    return changes;
}

CorrectionResult correct_values(Session& session, ViewId view_id, const std::string& attribute,
                                const CellValue& old_value, const CellValue& new_value,
                                std::string actor) {
    AuditEntry entry;
    entry.changes = plan_values(session, view_id, attribute, old_value, new_value);
    entry.view = view_id;
    entry.table = session.view(view_id).table;
    entry.actor = std::move(actor);
    return record(session, std::move(entry));
}

AuditEntry undo(Session& session, AuditId id, std::optional<std::string> actor) {
    const AuditEntry& original = session.audit_entry(id);
    if (original.undone) {
        throw Error(ErrorCode::state, "entry " + std::to_string(id.value()) + " is already undone",
                    {{"entry", id.value()}});
    }
    const Table& table = session.table(original.table);
    json conflicts = json::array();
    AuditEntry comp;
    comp.view = original.view;
    comp.table = original.table;
    comp.actor = actor.value_or(original.actor);
    comp.undo_of = id;
    for (const auto& c : original.changes) {
        const CellValue& current = table.value(c.row, table.require_attribute(c.attribute));
        if (current != c.new_value) {
            conflicts.push_back({{"row", c.row.value()},
                                 {"attr", c.attribute},
                                 {"expected", cell_value_json(c.new_value)},
                                 {"actual", cell_value_json(current)}});
        }
        comp.changes.push_back({c.row, c.attribute, c.new_value, c.old_value});
    }
    if (!conflicts.empty()) {
        throw Error(ErrorCode::conflict,
                    "entry " + std::to_string(id.value()) + " cannot be undone: cells changed since",
                    {{"entry", id.value()}, {"conflicts", std::move(conflicts)}});
    }
    // A batch may touch one cell only once, so applying the reversed changes
    // in order restores every pre-image.
    comp.id = session.next_audit_id();
    comp.timestamp = session.now();
    session.commit(ChangeKind::undo, {{"entry", to_json(comp)}});
    return session.audit_entry(comp.id);
}

std::vector<AuditEntry> history(const Session& session, const HistoryFilter& filter) {
    std::vector<AuditEntry> out;
    for (const auto& e : session.audit()) {
        if (filter.table && e.table != *filter.table) continue;
        if (filter.view && e.view != *filter.view) continue;
        if (filter.attribute &&
            std::none_of(e.changes.begin(), e.changes.end(),
                         [&](const CellChange& c) { return c.attribute == *filter.attribute; })) {
            continue;
        }
        out.push_back(e);
    }
    return out;
}

bool correction_in_effect(const Session& session, const AuditEntry& entry) {
    // Walk the undo chain: e, undo(e), undo(undo(e)), ... The last link is
    // the only one not flagged undone; e is in effect iff the chain length is odd.
    std::map<AuditId, AuditId> undone_by;
    for (const auto& e : session.audit()) {
        if (e.undo_of) undone_by[*e.undo_of] = e.id;
    }
    bool in_effect = true;
    AuditId cur = entry.id;
    for (auto it = undone_by.find(cur); it != undone_by.end(); it = undone_by.find(cur)) {
        in_effect = !in_effect;
        cur = it->second;
    }
    return in_effect;
}

std::vector<SubstitutionRule> suggest_from_history(const Session& session, std::string_view table,
                                                   std::string_view attribute, std::string_view value) {
    std::map<std::string, SubstitutionRule> by_target;
    for (const auto& e : session.audit()) {
        if (e.undo_of || e.table != table || !correction_in_effect(session, e)) continue;
        // Support counts correction events, not cells: a 7-cell batch is one
        // decision.
        std::set<std::string> targets;
        for (const auto& c : e.changes) {
            if (c.attribute != attribute || !c.old_value || !c.new_value) continue;
            if (*c.old_value != value || *c.new_value == value) continue;
            targets.insert(*c.new_value);
        }
        for (const auto& target : targets) {
            auto& rule = by_target[target];
            rule.attribute = std::string(attribute);
            rule.old_value = std::string(value);
            rule.new_value = target;
            ++rule.support;
            rule.last_applied = e.id;
        }
    }
    std::vector<SubstitutionRule> rules;
    for (auto& [_, r] : by_target) rules.push_back(std::move(r));
    std::sort(rules.begin(), rules.end(), [](const SubstitutionRule& a, const SubstitutionRule& b) {
        if (a.support != b.support) return a.support > b.support;
        return a.last_applied > b.last_applied;
    });
    return rules;
}

}  // namespace viewclean

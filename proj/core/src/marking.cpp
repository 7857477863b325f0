#include "viewclean/marking.hpp"

#include "viewclean/serialize.hpp"

namespace viewclean {

namespace {

void require_resolvable(const Session& session, const CellRef& cell) {
    auto it = session.tables().find(cell.table);
    if (it == session.tables().end() || !it->second.resolves(cell)) {
        throw Error(ErrorCode::mark, "cannot mark unresolvable cell " + describe(cell),
                    {{"cell", to_json(cell)}});
    }
}

}  // namespace

MarkSet mark_cells(Session& session, const std::vector<CellRef>& cells,
                   std::optional<std::string> label, MarkOrigin origin) {
    if (cells.empty()) throw Error(ErrorCode::validation, "mark request has no cells");
    MarkSet set;
    for (const auto& c : cells) {
        require_resolvable(session, c);
        set.cells.insert(c);
    }
    set.id = session.next_mark_set_id();
    set.label = std::move(label);
    set.created_at = session.now();
    set.origin = origin;
    session.commit(ChangeKind::mark, {{"mark_set", to_json(set)}});
    return session.mark_set(set.id);
}

std::optional<MarkSet> unmark(Session& session, MarkSetId id, const std::vector<CellRef>& cells) {
    session.mark_set(id);  // not_found before any mutation
    json payload_cells = json::array();
    for (const auto& c : cells) payload_cells.push_back(to_json(c));
    session.commit(ChangeKind::unmark, {{"mark_set", id.value()}, {"cells", std::move(payload_cells)}});
    auto it = session.mark_sets().find(id);
    if (it == session.mark_sets().end()) return std::nullopt;
    return it->second;
}

std::set<CellRef> marked_cells(const Session& session, std::optional<std::string_view> table) {
    std::set<CellRef> out;
    for (const auto& [_, set] : session.mark_sets()) {
        for (const auto& c : set.cells) {
            if (!table || c.table == *table) out.insert(c);
        }
    }
    return out;
}

std::set<CellRef> marks_in_view(const Session& session, const ViewDef& view) {
    const Table& table = session.table(view.table);
    BoundCondition cond(table, view.condition);
    std::set<CellRef> out;
    for (const auto& c : marked_cells(session, view.table)) {
        const Row* row = table.find(c.row);
        if (row && cond.matches(*row)) out.insert(c);
    }
    return out;
}

}  // namespace viewclean

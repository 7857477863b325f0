#include "viewclean/views.hpp"

#include <algorithm>

#include "viewclean/marking.hpp"
#include "viewclean/serialize.hpp"

namespace viewclean {

namespace {

ViewDef store(Session& session, ViewDef view) {
    BoundCondition validate(session.table(view.table), view.condition);
    view.id = session.next_view_id();
    view.created_at = session.now();
    session.commit(ChangeKind::view, {{"view", to_json(view)}});
    return session.view(view.id);
}

}  // namespace

ViewDef create_view(Session& session, const std::string& table, ViewCondition condition) {
    ViewDef v;
    v.table = table;
    v.condition = std::move(condition);
    v.derivation = Derivation::root;
    return store(session, std::move(v));
}

ViewDef refine_view(Session& session, ViewId parent, const std::vector<ConditionAtom>& extra_atoms) {
    const ViewDef& p = session.view(parent);
    ViewDef v;
    v.table = p.table;
    v.condition = p.condition.with(extra_atoms);
    v.parent = parent;
    v.derivation = Derivation::refine;
    return store(session, std::move(v));
}

ViewDef relax_view(Session& session, ViewId parent, const std::vector<ConditionAtom>& keep) {
    const ViewDef& p = session.view(parent);
    json missing = json::array();
    for (const auto& a : keep) {
        if (!p.condition.contains(a)) missing.push_back(to_json(a));
    }
    if (!missing.empty()) {
        throw Error(ErrorCode::lineage, "relax may only keep atoms of the parent view",
                    {{"not_in_parent", std::move(missing)}});
    }
    ViewDef v;
    v.table = p.table;
    v.condition = ViewCondition(keep);
    v.parent = parent;
    v.derivation = Derivation::relax;
    return store(session, std::move(v));
}

ViewDef create_view_from_marks(Session& session, MarkSetId marks, ViewCondition condition) {
    const MarkSet& set = session.mark_set(marks);
    const std::string& table_name = set.cells.begin()->table;
    const Table& table = session.table(table_name);
    BoundCondition cond(table, condition);
    json uncovered = json::array();
    for (const auto& c : set.cells) {
        if (c.table != table_name) {
            throw Error(ErrorCode::validation, "mark set spans several tables", {{"mark_set", marks.value()}});
        }
        if (!cond.matches(table.row(c.row))) uncovered.push_back(to_json(c));
    }
    if (!uncovered.empty()) {
        throw Error(ErrorCode::condition, "condition does not cover every marked row",
                    {{"uncovered", std::move(uncovered)}});
    }
    ViewDef v;
    v.table = table_name;
    v.condition = std::move(condition);
    v.derivation = Derivation::from_marks;
    v.source_marks = marks;
    return store(session, std::move(v));
}

std::vector<RowId> view_row_ids(const Session& session, const ViewDef& view) {
    return scan_ids(session.table(view.table), view.condition);
}

ViewPage evaluate_view(const Session& session, ViewId id, Paging paging) {
    const ViewDef& view = session.view(id);
    const Table& table = session.table(view.table);
    auto ids = scan_ids(table, view.condition);

    ViewPage page;
    page.view = id;
    page.total_count = ids.size();
    page.paging = paging;
    std::size_t begin = std::min(paging.offset, ids.size());
    std::size_t end = paging.limit ? std::min(ids.size(), begin + *paging.limit) : ids.size();

    auto marks = marked_cells(session, view.table);
    for (std::size_t i = begin; i < end; ++i) {
        page.rows.push_back(table.row(ids[i]));
        auto lo = marks.lower_bound(CellRef{view.table, ids[i], {}});
        for (; lo != marks.end() && lo->table == view.table && lo->row == ids[i]; ++lo) {
            page.marked_cells.push_back(*lo);
        }
    }
    return page;
}

std::vector<LineageStep> view_lineage(const Session& session, ViewId id) {
    std::vector<LineageStep> chain;
    std::optional<ViewId> cur = id;
    while (cur) {
        const ViewDef& v = session.view(*cur);
        chain.push_back({v.id, v.derivation, v.condition});
        // Parents always carry smaller ids, so the walk terminates.
        if (v.parent && *v.parent >= v.id) {
            throw Error(ErrorCode::lineage, "cyclic view lineage", {{"view", v.id.value()}});
        }
        cur = v.parent;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

}  // namespace viewclean

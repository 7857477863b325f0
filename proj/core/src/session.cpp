#include "viewclean/session.hpp"

#include <algorithm>

#include "viewclean/serialize.hpp"
#include "viewclean/text.hpp"

namespace viewclean {

std::string_view to_string(MarkOrigin origin) noexcept {
    switch (origin) {
        case MarkOrigin::manual: return "manual";
        case MarkOrigin::variant_detector: return "variant_detector";
        case MarkOrigin::fd_violation: return "fd_violation";
    }
    return "manual";
}

std::optional<MarkOrigin> parse_mark_origin(std::string_view text) noexcept {
    if (text == "manual") return MarkOrigin::manual;
    if (text == "variant_detector") return MarkOrigin::variant_detector;
    if (text == "fd_violation") return MarkOrigin::fd_violation;
    return std::nullopt;
}

std::string_view to_string(Derivation derivation) noexcept {
    switch (derivation) {
        case Derivation::root: return "root";
        case Derivation::refine: return "refine";
        case Derivation::relax: return "relax";
        case Derivation::from_marks: return "from_marks";
    }
    return "root";
}

std::optional<Derivation> parse_derivation(std::string_view text) noexcept {
    if (text == "root") return Derivation::root;
    if (text == "refine") return Derivation::refine;
    if (text == "relax") return Derivation::relax;
    if (text == "from_marks") return Derivation::from_marks;
    return std::nullopt;
}

std::string_view to_string(ChangeKind kind) noexcept {
    switch (kind) {
        case ChangeKind::ingest: return "ingest";
        case ChangeKind::mark: return "mark";
        case ChangeKind::unmark: return "unmark";
        case ChangeKind::view: return "view";
        case ChangeKind::correction: return "correction";
        case ChangeKind::undo: return "undo";
    }
    return "ingest";
}

std::optional<ChangeKind> parse_change_kind(std::string_view text) noexcept {
    for (auto k : {ChangeKind::ingest, ChangeKind::mark, ChangeKind::unmark, ChangeKind::view,
                   ChangeKind::correction, ChangeKind::undo}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

Session::Session(std::string id, Clock clock) : id_(std::move(id)) {
    set_clock(std::move(clock));
    created_at_ = now();
}

void Session::set_clock(Clock clock) {
    clock_ = clock ? std::move(clock) : Clock([] { return std::chrono::system_clock::now(); });
}

std::string Session::now() const { return format_iso8601(clock_()); }

const Table& Session::table(std::string_view name) const {
    auto it = tables_.find(name);
    if (it == tables_.end()) {
        throw Error(ErrorCode::not_found, "unknown table '" + std::string(name) + "'",
                    {{"table", name}});
    }
    return it->second;
}

const MarkSet& Session::mark_set(MarkSetId id) const {
    auto it = marks_.find(id);
    if (it == marks_.end()) {
        throw Error(ErrorCode::not_found, "unknown mark set " + std::to_string(id.value()),
                    {{"mark_set", id.value()}});
    }
    return it->second;
}

const ViewDef& Session::view(ViewId id) const {
    auto it = views_.find(id);
    if (it == views_.end()) {
        throw Error(ErrorCode::not_found, "unknown view " + std::to_string(id.value()),
                    {{"view", id.value()}});
    }
    return it->second;
}

const AuditEntry& Session::audit_entry(AuditId id) const {
    // Audit ids are dense and 1-based.
    auto idx = id.value() - 1;
    if (idx < 0 || idx >= static_cast<std::int64_t>(audit_.size())) {
        throw Error(ErrorCode::not_found, "unknown audit entry " + std::to_string(id.value()),
                    {{"entry", id.value()}});
    }
    return audit_[static_cast<std::size_t>(idx)];
}

MarkSetId Session::next_mark_set_id() const {
    // Deleted sets leave gaps; ids are derived from the changelog so replay
    // reproduces them.
    std::int64_t max_id = 0;
    for (const auto& r : changelog_) {
        if (r.kind == ChangeKind::mark) {
            max_id = std::max(max_id, r.payload.at("mark_set").at("id").get<std::int64_t>());
        }
    }
    return MarkSetId(max_id + 1);
}

ViewId Session::next_view_id() const {
    return ViewId(views_.empty() ? 1 : views_.rbegin()->first.value() + 1);
}

AuditId Session::next_audit_id() const { return AuditId(static_cast<std::int64_t>(audit_.size()) + 1); }

const ChangeRecord& Session::commit(ChangeKind kind, nlohmann::ordered_json payload) {
    ChangeRecord record;
    record.seq = static_cast<std::int64_t>(changelog_.size()) + 1;
    record.kind = kind;
    record.payload = std::move(payload);
    record.timestamp = now();
    apply(record);
    changelog_.push_back(std::move(record));
    return changelog_.back();
}

namespace {

void apply_changes(std::map<std::string, Table, std::less<>>& tables, const AuditEntry& entry) {
    auto it = tables.find(entry.table);
    if (it == tables.end()) throw Error(ErrorCode::restore, "audit entry references unknown table");
    Table& t = it->second;
    std::vector<std::pair<RowId, std::size_t>> targets;
    for (const auto& c : entry.changes) {
        auto idx = t.attribute_index(c.attribute);
        if (!idx || !t.find(c.row)) {
            throw Error(ErrorCode::restore, "audit entry references unknown cell");
        }
        targets.emplace_back(c.row, *idx);
    }
    for (std::size_t i = 0; i < entry.changes.size(); ++i) {
        t.set_value(targets[i].first, targets[i].second, entry.changes[i].new_value);
    }
}

}  // namespace

void Session::apply(const ChangeRecord& record) {
    const auto& p = record.payload;
    switch (record.kind) {
        case ChangeKind::ingest: {
            Table t = table_from(p.at("table"));
            if (tables_.contains(t.name())) {
                throw Error(ErrorCode::validation, "table '" + t.name() + "' already exists",
                            {{"table", t.name()}});
            }
            std::string name = t.name();
            tables_.emplace(std::move(name), std::move(t));
            break;
        }
        case ChangeKind::mark: {
            MarkSet m = mark_set_from(p.at("mark_set"));
            marks_.insert_or_assign(m.id, std::move(m));
            break;
        }
        case ChangeKind::unmark: {
            MarkSetId id(p.at("mark_set").get<std::int64_t>());
            auto it = marks_.find(id);
            if (it == marks_.end()) throw Error(ErrorCode::restore, "unmark of unknown mark set");
            for (const auto& c : p.at("cells")) it->second.cells.erase(cell_ref_from(c));
            if (it->second.cells.empty()) marks_.erase(it);
            break;
        }
        case ChangeKind::view: {
            ViewDef v = view_from(p.at("view"));
            views_.insert_or_assign(v.id, std::move(v));
            break;
        }
        case ChangeKind::correction: {
            AuditEntry e = audit_entry_from(p.at("entry"));
            apply_changes(tables_, e);
            audit_.push_back(std::move(e));
            break;
        }
        case ChangeKind::undo: {
            AuditEntry e = audit_entry_from(p.at("entry"));
            if (!e.undo_of) throw Error(ErrorCode::restore, "undo record without undo_of");
            auto idx = e.undo_of->value() - 1;
            if (idx < 0 || idx >= static_cast<std::int64_t>(audit_.size())) {
                throw Error(ErrorCode::restore, "undo of unknown entry");
            }
            apply_changes(tables_, e);
            audit_[static_cast<std::size_t>(idx)].undone = true;
            audit_.push_back(std::move(e));
            break;
        }
    }
}

Session Session::replay(std::string id, std::string created_at,
                        const std::vector<ChangeRecord>& records, Clock clock) {
    Session s(std::move(id), std::move(clock));
    s.created_at_ = std::move(created_at);
    for (const auto& r : records) {
        try {
            s.apply(r);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::restore,
                        "changelog record " + std::to_string(r.seq) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::restore,
                        "changelog record " + std::to_string(r.seq) + ": " + e.what());
        }
        s.changelog_.push_back(r);
    }
    return s;
}

Session Session::from_state(State state, Clock clock) {
    Session s(std::move(state.id), std::move(clock));
    s.created_at_ = std::move(state.created_at);
    for (auto& t : state.tables) {
        std::string name = t.name();
        if (!s.tables_.emplace(std::move(name), std::move(t)).second) {
            throw Error(ErrorCode::restore, "duplicate table in snapshot");
        }
    }
    for (auto& m : state.mark_sets) {
        for (const auto& c : m.cells) {
            auto it = s.tables_.find(c.table);
            if (it == s.tables_.end() || !it->second.resolves(c)) {
                throw Error(ErrorCode::restore, "mark set references unresolvable cell " + describe(c));
            }
        }
        s.marks_.emplace(m.id, std::move(m));
    }
    for (auto& v : state.views) {
        auto it = s.tables_.find(v.table);
        if (it == s.tables_.end()) throw Error(ErrorCode::restore, "view references unknown table");
        BoundCondition check(it->second, v.condition);
        if (v.parent && !s.views_.contains(*v.parent)) {
            throw Error(ErrorCode::restore, "view lineage references unknown parent");
        }
        s.views_.emplace(v.id, std::move(v));
    }
    std::int64_t expected = 1;
    for (auto& e : state.audit) {
        if (e.id.value() != expected++) throw Error(ErrorCode::restore, "audit ids are not dense");
        if (!s.views_.contains(e.view)) throw Error(ErrorCode::restore, "audit entry references unknown view");
        s.audit_.push_back(std::move(e));
    }
    expected = 1;
    for (const auto& r : state.changelog) {
        if (r.seq != expected++) throw Error(ErrorCode::restore, "changelog sequence is not contiguous");
    }
    s.changelog_ = std::move(state.changelog);
    return s;
}

bool operator==(const Session& a, const Session& b) {
    return a.id_ == b.id_ && a.created_at_ == b.created_at_ && a.tables_ == b.tables_ &&
           a.marks_ == b.marks_ && a.views_ == b.views_ && a.audit_ == b.audit_ &&
           a.changelog_ == b.changelog_;
}

const Table& add_table(Session& session, Table table) {
    if (session.tables().contains(table.name())) {
        throw Error(ErrorCode::validation, "table '" + table.name() + "' already exists",
                    {{"table", table.name()}});
    }
    std::string name = table.name();
    session.commit(ChangeKind::ingest, {{"table", to_json(table)}});
    return session.table(name);
}

}  // namespace viewclean

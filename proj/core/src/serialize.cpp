#include "viewclean/serialize.hpp"

#include <cstdint>
#include <sstream>

namespace viewclean {

namespace {

template <typename T>
T enum_from(const json& j, std::optional<T> (*parse)(std::string_view) noexcept, const char* what) {
    auto text = j.get<std::string>();
    if (auto v = parse(text)) return *v;
    throw Error(ErrorCode::validation, std::string("unknown ") + what + " '" + text + "'",
                {{what, text}});
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

template <typename Id>
json optional_id(const std::optional<Id>& id) {
    return id ? json(id->value()) : json(nullptr);
}

template <typename Id>
std::optional<Id> optional_id_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return Id(it->template get<std::int64_t>());
}

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

constexpr std::string_view kSnapshotFormat = "viewclean-session/1";

}  // namespace

json cell_value_json(const CellValue& v) { return v ? json(*v) : json(nullptr); }

CellValue cell_value_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}

json to_json(const Table& table) {
    json rows = json::array();
    for (const auto& [id, row] : table.rows()) {
        json values = json::array();
        for (const auto& v : row.values) values.push_back(cell_value_json(v));
        rows.push_back({{"id", id.value()}, {"values", std::move(values)}});
    }
    return {{"name", table.name()},
            {"attributes", table.attributes()},
            {"id_attribute", optional_string(table.id_attribute())},
            {"next_row_id", table.next_row_id().value()},
            {"rows", std::move(rows)}};
}

Table table_from(const json& j) {
    std::optional<std::string> id_attr;
    if (auto it = j.find("id_attribute"); it != j.end() && !it->is_null()) {
        id_attr = it->get<std::string>();
    }
    Table table(j.at("name").get<std::string>(), j.at("attributes").get<std::vector<std::string>>(),
                id_attr);
    for (const auto& r : j.at("rows")) {
        Row row;
        row.id = RowId(r.at("id").get<std::int64_t>());
        for (const auto& v : r.at("values")) row.values.push_back(cell_value_from(v));
        table.insert(std::move(row));
    }
    auto next = j.at("next_row_id").get<std::int64_t>();
    while (table.next_row_id().value() < next) table.allocate_row_id();
    return table;
}

json to_json(const CellRef& cell) {
    return {{"table", cell.table}, {"row", cell.row.value()}, {"attr", cell.attribute}};
}

CellRef cell_ref_from(const json& j, std::string_view default_table) {
    CellRef cell;
    if (auto it = j.find("table"); it != j.end()) {
        cell.table = it->get<std::string>();
    } else if (!default_table.empty()) {
        cell.table = default_table;
    } else {
        throw Error(ErrorCode::validation, "cell reference needs a table", {{"cell", j}});
    }
    cell.row = RowId(j.at("row").get<std::int64_t>());
    cell.attribute = j.at("attr").get<std::string>();
    return cell;
}

json to_json(const ConditionAtom& atom) {
    return {{"attr", atom.attribute}, {"op", to_string(atom.op)}, {"value", atom.value}};
}

ConditionAtom atom_from(const json& j) {
    ConditionAtom atom;
    atom.attribute = j.at("attr").get<std::string>();
    atom.op = j.contains("op") ? enum_from<AtomOp>(j.at("op"), &parse_atom_op, "op") : AtomOp::equals;
    atom.value = j.at("value").get<std::string>();
    return atom;
}

std::vector<ConditionAtom> atoms_from(const json& array) {
    if (!array.is_array()) throw Error(ErrorCode::validation, "atoms must be an array");
    std::vector<ConditionAtom> atoms;
    for (const auto& a : array) atoms.push_back(atom_from(a));
    return atoms;
}

json to_json(const ViewCondition& condition) {
    json atoms = json::array();
    for (const auto& a : condition.atoms()) atoms.push_back(to_json(a));
    return {{"atoms", std::move(atoms)}};
}

ViewCondition condition_from(const json& j) { return ViewCondition(atoms_from(j.at("atoms"))); }

json to_json(const MarkSet& marks) {
    json cells = json::array();
    for (const auto& c : marks.cells) cells.push_back(to_json(c));
    return {{"id", marks.id.value()},
            {"label", optional_string(marks.label)},
            {"cells", std::move(cells)},
            {"created_at", marks.created_at},
            {"origin", to_string(marks.origin)}};
}

MarkSet mark_set_from(const json& j) {
    MarkSet m;
    m.id = MarkSetId(j.at("id").get<std::int64_t>());
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) m.label = it->get<std::string>();
    for (const auto& c : j.at("cells")) m.cells.insert(cell_ref_from(c));
    m.created_at = j.at("created_at").get<std::string>();
    m.origin = enum_from<MarkOrigin>(j.at("origin"), &parse_mark_origin, "origin");
    return m;
}

json to_json(const ViewDef& view) {
    return {{"id", view.id.value()},
            {"table", view.table},
            {"condition", to_json(view.condition)},
            {"parent", optional_id(view.parent)},
            {"derivation", to_string(view.derivation)},
            {"source_marks", optional_id(view.source_marks)},
            {"created_at", view.created_at}};
}

ViewDef view_from(const json& j) {
    ViewDef v;
    v.id = ViewId(j.at("id").get<std::int64_t>());
    v.table = j.at("table").get<std::string>();
    v.condition = condition_from(j.at("condition"));
    v.parent = optional_id_from<ViewId>(j, "parent");
    v.derivation = enum_from<Derivation>(j.at("derivation"), &parse_derivation, "derivation");
    v.source_marks = optional_id_from<MarkSetId>(j, "source_marks");
    v.created_at = j.at("created_at").get<std::string>();
    return v;
}

json to_json(const AuditEntry& entry) {
    json changes = json::array();
    for (const auto& c : entry.changes) {
        changes.push_back({{"row", c.row.value()},
                           {"attr", c.attribute},
                           {"old", cell_value_json(c.old_value)},
                           {"new", cell_value_json(c.new_value)}});
    }
    json j = {{"id", entry.id.value()}, {"view", entry.view.value()},  {"actor", entry.actor},
              {"ts", entry.timestamp},  {"changes", std::move(changes)}, {"undone", entry.undone},
              {"table", entry.table}};
    if (entry.undo_of) j["undo_of"] = entry.undo_of->value();
    return j;
}

AuditEntry audit_entry_from(const json& j) {
    AuditEntry e;
    e.id = AuditId(j.at("id").get<std::int64_t>());
    e.view = ViewId(j.at("view").get<std::int64_t>());
    e.table = j.at("table").get<std::string>();
    e.actor = j.at("actor").get<std::string>();
    e.timestamp = j.at("ts").get<std::string>();
    for (const auto& c : j.at("changes")) {
        e.changes.push_back({RowId(c.at("row").get<std::int64_t>()), c.at("attr").get<std::string>(),
                             cell_value_from(c.at("old")), cell_value_from(c.at("new"))});
    }
    e.undone = j.at("undone").get<bool>();
    e.undo_of = optional_id_from<AuditId>(j, "undo_of");
    return e;
}

json to_json(const ChangeRecord& record) {
    return {{"seq", record.seq},
            {"kind", to_string(record.kind)},
            {"payload", record.payload},
            {"timestamp", record.timestamp}};
}

ChangeRecord change_record_from(const json& j) {
    ChangeRecord r;
    r.seq = j.at("seq").get<std::int64_t>();
    r.kind = enum_from<ChangeKind>(j.at("kind"), &parse_change_kind, "kind");
    r.payload = j.at("payload");
    r.timestamp = j.at("timestamp").get<std::string>();
    return r;
}

std::string snapshot(const Session& session) {
    json tables = json::array();
    for (const auto& [_, t] : session.tables()) tables.push_back(to_json(t));
    json marks = json::array();
    for (const auto& [_, m] : session.mark_sets()) marks.push_back(to_json(m));
    json views = json::array();
    for (const auto& [_, v] : session.views()) views.push_back(to_json(v));
    json audit = json::array();
    for (const auto& e : session.audit()) audit.push_back(to_json(e));
    json changelog = json::array();
    for (const auto& r : session.changelog()) changelog.push_back(to_json(r));

    json body = {{"id", session.id()},          {"created_at", session.created_at()},
                 {"tables", std::move(tables)}, {"mark_sets", std::move(marks)},
                 {"views", std::move(views)},   {"audit", std::move(audit)},
                 {"changelog", std::move(changelog)}};
    std::string digest = hex(fnv1a(body.dump()));
    json doc = {{"format", kSnapshotFormat}, {"digest", digest}, {"session", std::move(body)}};
    return doc.dump(1) + "\n";
}

Session restore(std::string_view document, Session::Clock clock) {
    try {
        json doc = json::parse(document);
        if (doc.at("format").get<std::string>() != kSnapshotFormat) {
            throw Error(ErrorCode::restore, "unsupported snapshot format");
        }
        const json& body = doc.at("session");
        if (hex(fnv1a(body.dump())) != doc.at("digest").get<std::string>()) {
            throw Error(ErrorCode::restore, "snapshot digest mismatch");
        }
        Session::State state;
        state.id = body.at("id").get<std::string>();
        state.created_at = body.at("created_at").get<std::string>();
        for (const auto& t : body.at("tables")) state.tables.push_back(table_from(t));
        for (const auto& m : body.at("mark_sets")) state.mark_sets.push_back(mark_set_from(m));
        for (const auto& v : body.at("views")) state.views.push_back(view_from(v));
        for (const auto& e : body.at("audit")) state.audit.push_back(audit_entry_from(e));
        for (const auto& r : body.at("changelog")) state.changelog.push_back(change_record_from(r));
        return Session::from_state(std::move(state), std::move(clock));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::restore) throw;
        throw Error(ErrorCode::restore, std::string("corrupted snapshot: ") + e.what(), e.detail());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::restore, std::string("corrupted snapshot: ") + e.what());
    }
}

std::string changelog_jsonl(const std::vector<ChangeRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<ChangeRecord> parse_changelog_jsonl(std::string_view text) {
    std::vector<ChangeRecord> records;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(change_record_from(json::parse(line)));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::restore,
                        "changelog line " + std::to_string(line_no) + ": " + e.what(),
                        {{"line", line_no}});
        }
    }
    return records;
}

}  // namespace viewclean

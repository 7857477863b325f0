#include "viewclean/api.hpp"

#include <charconv>
#include <functional>
#include <vector>

#include "viewclean/correction.hpp"
#include "viewclean/fd.hpp"
#include "viewclean/marking.hpp"
#include "viewclean/serialize.hpp"
#include "viewclean/suggest.hpp"
#include "viewclean/variants.hpp"
#include "viewclean/views.hpp"

namespace viewclean::api {

namespace {

std::string percent_decode(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out += ' ';
        } else if (s[i] == '%' && i + 2 < s.size()) {
            unsigned v = 0;
            auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
            if (ec == std::errc{} && p == s.data() + i + 3) {
                out += static_cast<char>(v);
                i += 2;
            } else {
                out += s[i];
            }
        } else {
            out += s[i];
        }
    }
    return out;
}

std::vector<std::string> split_path(std::string_view path) {
    std::vector<std::string> parts;
    while (!path.empty()) {
        if (path.front() == '/') {
            path.remove_prefix(1);
            continue;
        }
        auto slash = path.find('/');
        parts.push_back(percent_decode(path.substr(0, slash)));
        if (slash == std::string_view::npos) break;
        path.remove_prefix(slash);
    }
    return parts;
}

Response json_response(int status, const json& body) { return {status, body.dump(), "application/json"}; }

// ---------------------------------------------------------------------------
// Argument helpers

std::int64_t parse_int(std::string_view text, std::string_view what) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
        throw Error(ErrorCode::validation, std::string(what) + " must be an integer",
                    {{std::string(what), text}});
    }
    return v;
}

std::optional<std::string> query_value(const Request& r, const std::string& key) {
    auto it = r.query.find(key);
    if (it == r.query.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> query_size(const Request& r, const std::string& key) {
    auto v = query_value(r, key);
    if (!v) return std::nullopt;
    auto n = parse_int(*v, key);
    if (n < 0) throw Error(ErrorCode::validation, key + " must be non-negative");
    return static_cast<std::size_t>(n);
}

Paging paging_from(const Request& r) {
    Paging p;
    p.offset = query_size(r, "offset").value_or(0);
    p.limit = query_size(r, "limit").value_or(100);
    return p;
}

json parse_body(const Request& r) {
    if (r.body.empty()) return json::object();
    json body = json::parse(r.body, nullptr, false);
    if (body.is_discarded()) throw Error(ErrorCode::validation, "request body is not valid JSON");
    if (!body.is_object()) throw Error(ErrorCode::validation, "request body must be a JSON object");
    return body;
}

std::int64_t id_from(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::validation, std::string("missing field '") + key + "'");
    const json& v = j.at(key);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) return parse_int(v.get<std::string>(), key);
    throw Error(ErrorCode::validation, std::string("field '") + key + "' must be an id");
}

std::string string_field(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw Error(ErrorCode::validation, std::string("missing string field '") + key + "'");
    }
    return j.at(key).get<std::string>();
}

CellValue value_field(const json& j, const char* key) {
    if (!j.contains(key)) throw Error(ErrorCode::validation, std::string("missing field '") + key + "'");
    return cell_value_from(j.at(key));
}

std::vector<CellRef> cells_from(const json& array, std::string_view default_table) {
    if (!array.is_array()) throw Error(ErrorCode::validation, "cells must be an array");
    std::vector<CellRef> cells;
    for (const auto& c : array) cells.push_back(cell_ref_from(c, default_table));
    return cells;
}

std::string table_name(const Session& s, const json& body) {
    if (body.contains("table")) return string_field(body, "table");
    if (s.tables().size() == 1) return s.tables().begin()->first;
    throw Error(ErrorCode::validation, "missing field 'table'");
}

/// Rows a detector should look at: the view's current rows or the whole table.
std::pair<const Table*, std::vector<RowId>> detector_rows(const Session& s, const json& body) {
    if (body.contains("view") && !body.at("view").is_null()) {
        const ViewDef& v = s.view(ViewId(id_from(body, "view")));
        const Table& t = s.table(v.table);
        if (body.contains("table") && string_field(body, "table") != v.table) {
            throw Error(ErrorCode::validation, "view belongs to another table");
        }
        return {&t, view_row_ids(s, v)};
    }
    const Table& t = s.table(table_name(s, body));
    return {&t, t.row_ids()};
}

NormalizationPolicy policy_from(const json& j) {
    NormalizationPolicy p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw Error(ErrorCode::validation, "policy must be an object");
    if (j.contains("case_fold")) p.case_fold = j.at("case_fold").get<bool>();
    if (j.contains("separators")) {
        const auto& sep = j.at("separators");
        if (sep.is_array()) {
            p.separators.clear();
            for (const auto& s : sep) p.separators += s.get<std::string>();
        } else {
            p.separators = sep.get<std::string>();
        }
    }
    if (j.contains("compare_as")) {
        auto text = j.at("compare_as").get<std::string>();
        auto mode = parse_compare_as(text);
        if (!mode) throw Error(ErrorCode::validation, "unknown compare_as '" + text + "'");
        p.compare_as = *mode;
    }
    p.validate();
    return p;
}

SuggestionParams params_from(const json& j) {
    SuggestionParams p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw Error(ErrorCode::validation, "params must be an object");
    auto size = [&](const char* key) -> std::size_t {
        auto v = j.at(key).get<std::int64_t>();
        if (v < 0) throw Error(ErrorCode::validation, std::string(key) + " must be non-negative");
        return static_cast<std::size_t>(v);
    };
    if (j.contains("max_atoms")) p.max_atoms = size("max_atoms");
    if (j.contains("min_rows") && !j.at("min_rows").is_null()) p.min_rows = size("min_rows");
    if (j.contains("max_rows")) p.max_rows = size("max_rows");
    if (j.contains("ops_allowed")) {
        p.ops_allowed.clear();
        for (const auto& op : j.at("ops_allowed")) {
            auto text = op.get<std::string>();
            auto parsed = parse_atom_op(text);
            if (!parsed) throw Error(ErrorCode::validation, "unknown op '" + text + "'");
            p.ops_allowed.insert(*parsed);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// Encoders

json rows_json(const Table& table, const std::vector<Row>& rows) {
    json out = json::array();
    for (const auto& row : rows) {
        json values = json::object();
        for (std::size_t i = 0; i < row.values.size(); ++i) {
            values[table.attributes()[i]] = cell_value_json(row.values[i]);
        }
        out.push_back({{"id", row.id.value()}, {"values", std::move(values)}});
    }
    return out;
}

json short_cells(const std::vector<CellRef>& cells) {
    json out = json::array();
    for (const auto& c : cells) out.push_back({{"row", c.row.value()}, {"attr", c.attribute}});
    return out;
}

json cells_json(const std::set<CellRef>& cells) {
    json out = json::array();
    for (const auto& c : cells) out.push_back(to_json(c));
    return out;
}

json table_summary(const Table& t) {
    return {{"name", t.name()},
            {"attributes", t.attributes()},
            {"id_attribute", t.id_attribute() ? json(*t.id_attribute()) : json(nullptr)},
            {"rows", t.size()}};
}

json page_json(const Table& table, const ViewPage& page, std::optional<ViewId> view) {
    return {{"table", table.name()},
            {"view", view ? json(view->value()) : json(nullptr)},
            {"total", page.total_count},
            {"offset", page.paging.offset},
            {"limit", page.paging.limit ? json(*page.paging.limit) : json(nullptr)},
            {"empty", page.empty_view()},
            {"rows", rows_json(table, page.rows)},
            {"marked", short_cells(page.marked_cells)}};
}

json view_created(const Session& s, const ViewDef& v) {
    auto ids = view_row_ids(s, v);
    return {{"view", to_json(v)}, {"rows", ids.size()}, {"empty", ids.empty()}};
}

json report_json(const ViolationReport& r) {
    json groups = json::array();
    for (const auto& g : r.groups) {
        json parts = json::array();
        for (const auto& p : g.partitions) {
            json rows = json::array();
            for (auto id : p.rows) rows.push_back(id.value());
            parts.push_back({{"value", p.value}, {"rows", std::move(rows)}});
        }
        json group = {{"lhs_values", g.lhs_values}, {"partitions", std::move(parts)}};
        if (g.pattern) group["pattern"] = *g.pattern;
        if (g.expected) group["expected"] = *g.expected;
        groups.push_back(std::move(group));
    }
    return {{"dependency", r.dependency},
            {"table", r.table},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"holds", r.holds()},
            {"groups", std::move(groups)},
            {"rows_checked", r.rows_checked},
            {"not_evaluated", r.not_evaluated},
            {"proposed_marks", cells_json(violations_to_marks(r))}};
}

json variant_groups_json(const std::vector<VariantGroup>& groups) {
    json out = json::array();
    for (const auto& g : groups) {
        json members = json::array();
        for (const auto& m : g.members) {
            json rows = json::array();
            for (auto id : m.rows) rows.push_back(id.value());
            members.push_back({{"value", m.value}, {"rows", std::move(rows)}});
        }
        out.push_back({{"attribute", g.attribute},
                       {"key", g.key},
                       {"occurrences", g.occurrences()},
                       {"members", std::move(members)}});
    }
    return out;
}

json suggestion_json(const SuggestionCandidate& c) {
    return {{"condition", to_json(c.condition)},
            {"text", c.condition.text()},
            {"rows", c.row_count},
            {"extra", c.extra_rows},
            {"atoms", c.condition.size()},
            {"rank", c.rank}};
}

// ---------------------------------------------------------------------------
// Handlers

using Args = std::vector<std::string>;
using Handler = std::function<Response(Session&, const Request&, const Args&)>;

struct Route {
    std::string method;
    std::vector<std::string> pattern;  // "*" matches one segment
    bool mutates;
    Handler handler;
};

Response upload_table(Session& s, const Request& r, const Args&) {
    auto name = query_value(r, "name");
    if (!name || name->empty()) throw Error(ErrorCode::validation, "query parameter 'name' is required");
    CsvOptions opts;
    if (auto h = query_value(r, "header")) opts.has_header = *h != "false" && *h != "0";
    if (auto id = query_value(r, "id_col"); id && !id->empty()) opts.id_attribute = *id;
    Table t = load_csv_text(r.body, *name, opts);
    return json_response(201, table_summary(add_table(s, std::move(t))));
}

Response list_tables(Session& s, const Request&, const Args&) {
    json out = json::array();
    for (const auto& [_, t] : s.tables()) out.push_back(table_summary(t));
    return json_response(200, {{"tables", std::move(out)}});
}

Response table_rows(Session& s, const Request& r, const Args& a) {
    const Table& t = s.table(a[0]);
    Paging paging = paging_from(r);
    if (auto v = query_value(r, "view"); v && !v->empty()) {
        ViewId id(parse_int(*v, "view"));
        if (s.view(id).table != t.name()) throw Error(ErrorCode::validation, "view belongs to another table");
        return json_response(200, page_json(t, evaluate_view(s, id, paging), id));
    }
    // Whole table: same page shape as a view with the empty condition.
    ViewPage page;
    auto ids = t.row_ids();
    page.total_count = ids.size();
    page.paging = paging;
    auto marks = marked_cells(s, t.name());
    std::size_t begin = std::min(paging.offset, ids.size());
    std::size_t end = paging.limit ? std::min(ids.size(), begin + *paging.limit) : ids.size();
    for (std::size_t i = begin; i < end; ++i) {
        page.rows.push_back(t.row(ids[i]));
        for (const auto& c : marks) {
            if (c.row == ids[i]) page.marked_cells.push_back(c);
        }
    }
    return json_response(200, page_json(t, page, std::nullopt));
}

Response export_table(Session& s, const Request&, const Args& a) {
    return {200, to_csv(s.table(a[0])), "text/csv"};
}

Response create_marks(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    std::string table = body.contains("table") || s.tables().size() == 1 ? table_name(s, body) : std::string{};
    auto cells = cells_from(body.value("cells", json::array()), table);
    std::optional<std::string> label;
    if (body.contains("label") && !body.at("label").is_null()) label = string_field(body, "label");
    MarkOrigin origin = MarkOrigin::manual;
    if (body.contains("origin")) {
        auto text = string_field(body, "origin");
        auto parsed = parse_mark_origin(text);
        if (!parsed) throw Error(ErrorCode::validation, "unknown origin '" + text + "'");
        origin = *parsed;
    }
    return json_response(201, to_json(mark_cells(s, cells, std::move(label), origin)));
}

Response list_marks(Session& s, const Request&, const Args&) {
    json out = json::array();
    for (const auto& [_, m] : s.mark_sets()) out.push_back(to_json(m));
    return json_response(200, {{"mark_sets", std::move(out)}});
}

Response get_marks(Session& s, const Request&, const Args& a) {
    return json_response(200, to_json(s.mark_set(MarkSetId(parse_int(a[0], "mark_set")))));
}

Response delete_mark_cells(Session& s, const Request& r, const Args& a) {
    MarkSetId id(parse_int(a[0], "mark_set"));
    json body = parse_body(r);
    const MarkSet& set = s.mark_set(id);
    auto cells = cells_from(body.value("cells", json::array()), set.cells.begin()->table);
    auto remaining = unmark(s, id, cells);
    return json_response(200, {{"mark_set", remaining ? to_json(*remaining) : json(nullptr)},
                               {"deleted", !remaining.has_value()}});
}

Response create_view_route(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    auto atoms_in = [&](const char* key) {
        if (body.contains(key)) return atoms_from(body.at(key));
        if (body.contains("condition")) return atoms_from(body.at("condition").at("atoms"));
        return std::vector<ConditionAtom>{};
    };
    if (body.contains("refine")) {
        return json_response(201, view_created(s, refine_view(s, ViewId(id_from(body, "refine")), atoms_in("atoms"))));
    }
    if (body.contains("relax")) {
        const char* key = body.contains("keep") ? "keep" : "atoms";
        return json_response(201, view_created(s, relax_view(s, ViewId(id_from(body, "relax")), atoms_in(key))));
    }
    if (body.contains("from_marks")) {
        MarkSetId marks(id_from(body, "from_marks"));
        if (body.contains("atoms") || body.contains("condition")) {
            return json_response(
                201, view_created(s, create_view_from_marks(s, marks, ViewCondition(atoms_in("atoms")))));
        }
        auto params = params_from(body.value("params", json(nullptr)));
        return json_response(201, view_created(s, create_view_from_suggestion(s, marks, params)));
    }
    std::string table = table_name(s, body);
    return json_response(201, view_created(s, create_view(s, table, ViewCondition(atoms_in("atoms")))));
}

Response list_views(Session& s, const Request&, const Args&) {
    json out = json::array();
    for (const auto& [_, v] : s.views()) out.push_back(to_json(v));
    return json_response(200, {{"views", std::move(out)}});
}

Response get_view(Session& s, const Request&, const Args& a) {
    return json_response(200, view_created(s, s.view(ViewId(parse_int(a[0], "view")))));
}

Response view_rows(Session& s, const Request& r, const Args& a) {
    ViewId id(parse_int(a[0], "view"));
    const ViewDef& v = s.view(id);
    return json_response(200, page_json(s.table(v.table), evaluate_view(s, id, paging_from(r)), id));
}

Response view_lineage_route(Session& s, const Request&, const Args& a) {
    ViewId id(parse_int(a[0], "view"));
    json chain = json::array();
    for (const auto& step : view_lineage(s, id)) {
        chain.push_back({{"view", step.view.value()},
                         {"derivation", to_string(step.derivation)},
                         {"condition", to_json(step.condition)},
                         {"text", step.condition.text()}});
    }
    return json_response(200, {{"view", id.value()}, {"chain", std::move(chain)}});
}

Response view_marks(Session& s, const Request&, const Args& a) {
    // Throwing calls stay outside json initializer lists; nlohmann leaks on unwind there.
    auto cells = cells_json(marks_in_view(s, s.view(ViewId(parse_int(a[0], "view")))));
    return json_response(200, {{"cells", std::move(cells)}});
}

json correction_json(const CorrectionResult& r) {
    return {{"entry", to_json(r.entry)}, {"touched_marks", short_cells(r.touched_marks)}};
}

Response create_correction(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    ViewId view(id_from(body, "view"));
    std::string actor = body.contains("actor") ? string_field(body, "actor") : std::string("anonymous");
    const ViewDef& v = s.view(view);
    if (body.contains("cell")) {
        CellRef cell = cell_ref_from(body.at("cell"), v.table);
        return json_response(201, correction_json(correct_cell(s, view, cell, value_field(body, "new"), actor)));
    }
    std::string attr = string_field(body, "attr");
    if (body.value("preview", false)) {
        // Dry run for confirmation dialogs: same matching, nothing recorded.
        auto changes = plan_values(s, view, attr, value_field(body, "old"), value_field(body, "new"));
        json rows = json::array();
        for (const auto& c : changes) rows.push_back(c.row.value());
        return json_response(200, {{"preview", true}, {"count", changes.size()}, {"rows", std::move(rows)}});
    }
    return json_response(201, correction_json(correct_values(s, view, attr, value_field(body, "old"),
                                                             value_field(body, "new"), actor)));
}

Response undo_route(Session& s, const Request& r, const Args& a) {
    json body = parse_body(r);
    std::optional<std::string> actor;
    if (body.contains("actor")) actor = string_field(body, "actor");
    auto entry = to_json(undo(s, AuditId(parse_int(a[0], "entry")), actor));
    return json_response(200, {{"entry", std::move(entry)}});
}

Response history_route(Session& s, const Request& r, const Args&) {
    HistoryFilter f;
    f.table = query_value(r, "table");
    f.attribute = query_value(r, "attr");
    if (auto v = query_value(r, "view")) f.view = ViewId(parse_int(*v, "view"));
    json out = json::array();
    for (const auto& e : history(s, f)) out.push_back(to_json(e));
    return json_response(200, {{"entries", std::move(out)}});
}

Response fd_check(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    auto [table, rows] = detector_rows(s, body);
    return json_response(200, report_json(check_fd(*table, rows, parse_fd(string_field(body, "fd")))));
}

Response fd_discover(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    auto [table, rows] = detector_rows(s, body);
    auto max_lhs = body.value("max_lhs", 2);
    if (max_lhs < 1) throw Error(ErrorCode::validation, "max_lhs must be at least 1");
    json fds = json::array();
    for (const auto& fd : discover_fds(*table, rows, static_cast<std::size_t>(max_lhs))) {
        fds.push_back({{"lhs", fd.lhs}, {"rhs", fd.rhs}, {"text", to_string(fd)}});
    }
    return json_response(200, {{"table", table->name()}, {"max_lhs", max_lhs}, {"fds", std::move(fds)}});
}

Response fd_removal(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    auto [table, rows] = detector_rows(s, body);
    std::vector<FD> fds;
    if (body.contains("fd")) fds.push_back(parse_fd(string_field(body, "fd")));
    if (body.contains("fds")) {
        for (const auto& f : body.at("fds")) fds.push_back(parse_fd(f.get<std::string>()));
    }
    if (fds.empty()) throw Error(ErrorCode::validation, "missing field 'fd' or 'fds'");
    auto result = minimal_removal(*table, rows, fds);
    json remove = json::array();
    for (auto id : result.remove) remove.push_back(id.value());
    return json_response(200, {{"remove", std::move(remove)}, {"certified_optimal", result.certified_optimal}});
}

Response cfd_check(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    auto [table, rows] = detector_rows(s, body);
    return json_response(200, report_json(check_cfd(*table, rows, parse_cfd(string_field(body, "cfd")))));
}

Response detect_variants(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    auto [table, rows] = detector_rows(s, body);
    auto policy = policy_from(body.value("policy", json(nullptr)));
    auto strategy = ProposalStrategy::all_members;
    if (body.contains("strategy")) {
        auto text = string_field(body, "strategy");
        auto parsed = parse_proposal_strategy(text);
        if (!parsed) throw Error(ErrorCode::validation, "unknown strategy '" + text + "'");
        strategy = *parsed;
    }
    auto attr = string_field(body, "attr");
    auto groups = find_variant_groups(*table, rows, attr, policy);
    return json_response(200, {{"table", table->name()},
                               {"attribute", attr},
                               {"groups", variant_groups_json(groups)},
                               {"strategy", to_string(strategy)},
                               {"proposed_marks", cells_json(propose_marks(groups, strategy))}});
}

Response suggest_views_route(Session& s, const Request& r, const Args&) {
    json body = parse_body(r);
    std::set<CellRef> cells;
    if (body.contains("mark_set")) {
        cells = s.mark_set(MarkSetId(id_from(body, "mark_set"))).cells;
    } else {
        std::string table = body.contains("table") ? string_field(body, "table") : table_name(s, body);
        for (auto& c : cells_from(body.value("cells", json::array()), table)) cells.insert(std::move(c));
    }
    const Table& table = marked_table(s, cells);
    auto params = params_from(body.value("params", json(nullptr)));
    json out = json::array();
    for (const auto& c : suggest_views(table, cells, params)) out.push_back(suggestion_json(c));
    json atoms = json::array();
    for (const auto& a : candidate_atoms(table, cells, params.ops_allowed)) atoms.push_back(to_json(a));
    return json_response(200, {{"table", table.name()},
                               {"candidate_atoms", std::move(atoms)},
                               {"suggestions", std::move(out)}});
}

Response suggest_corrections(Session& s, const Request& r, const Args&) {
    auto attr = query_value(r, "attr");
    auto value = query_value(r, "value");
    if (!attr || !value) throw Error(ErrorCode::validation, "query parameters 'attr' and 'value' are required");
    std::string table = query_value(r, "table").value_or(s.tables().size() == 1 ? s.tables().begin()->first : "");
    s.table(table);
    json rules = json::array();
    for (const auto& rule : suggest_from_history(s, table, *attr, *value)) {
        rules.push_back({{"attr", rule.attribute},
                         {"old", rule.old_value},
                         {"new", rule.new_value},
                         {"support", rule.support},
                         {"last_applied", rule.last_applied.value()}});
    }
    return json_response(200, {{"table", table}, {"rules", std::move(rules)}});
}

Response changelog_route(Session& s, const Request&, const Args&) {
    return {200, changelog_jsonl(s.changelog()), "application/x-ndjson"};
}

Response snapshot_route(Session& s, const Request&, const Args&) { return {200, snapshot(s), "application/json"}; }

Response session_info(Session& s, const Request&, const Args&) {
    return json_response(200, {{"id", s.id()},
                               {"created_at", s.created_at()},
                               {"tables", s.tables().size()},
                               {"mark_sets", s.mark_sets().size()},
                               {"views", s.views().size()},
                               {"audit_entries", s.audit().size()},
                               {"changelog", s.changelog().size()}});
}

const std::vector<Route>& routes() {
    static const std::vector<Route> table = {
        {"GET", {}, false, session_info},
        {"POST", {"tables"}, true, upload_table},
        {"GET", {"tables"}, false, list_tables},
        {"GET", {"tables", "*", "rows"}, false, table_rows},
        {"GET", {"tables", "*", "export"}, false, export_table},
        {"POST", {"marks"}, true, create_marks},
        {"GET", {"marks"}, false, list_marks},
        {"GET", {"marks", "*"}, false, get_marks},
        {"DELETE", {"marks", "*", "cells"}, true, delete_mark_cells},
        {"POST", {"views"}, true, create_view_route},
        {"GET", {"views"}, false, list_views},
        {"GET", {"views", "*"}, false, get_view},
        {"GET", {"views", "*", "rows"}, false, view_rows},
        {"GET", {"views", "*", "lineage"}, false, view_lineage_route},
        {"GET", {"views", "*", "marks"}, false, view_marks},
        {"POST", {"corrections"}, true, create_correction},
        {"POST", {"corrections", "*", "undo"}, true, undo_route},
        {"GET", {"history"}, false, history_route},
        {"POST", {"detect", "fd", "check"}, false, fd_check},
        {"POST", {"detect", "fd", "discover"}, false, fd_discover},
        {"POST", {"detect", "fd", "minimal-removal"}, false, fd_removal},
        {"POST", {"detect", "cfd", "check"}, false, cfd_check},
        {"POST", {"detect", "variants"}, false, detect_variants},
        {"POST", {"suggest", "views"}, false, suggest_views_route},
        {"GET", {"suggest", "corrections"}, false, suggest_corrections},
        {"GET", {"changelog"}, false, changelog_route},
        {"GET", {"snapshot"}, false, snapshot_route},
    };
    return table;
}

bool match(const std::vector<std::string>& pattern, const std::vector<std::string>& parts, Args& args) {
    if (pattern.size() != parts.size()) return false;
    args.clear();
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] == "*") {
            args.push_back(parts[i]);
        } else if (pattern[i] != parts[i]) {
            return false;
        }
    }
    return true;
}

}  // namespace

Request Request::make(std::string method, std::string_view target, std::string body, std::string content_type) {
    Request r;
    r.method = std::move(method);
    r.body = std::move(body);
    r.content_type = std::move(content_type);
    auto q = target.find('?');
    r.path = std::string(target.substr(0, q));
    if (q != std::string_view::npos) {
        std::string_view rest = target.substr(q + 1);
        while (!rest.empty()) {
            auto amp = rest.find('&');
            auto pair = rest.substr(0, amp);
            auto eq = pair.find('=');
            if (!pair.empty()) {
                r.query[percent_decode(pair.substr(0, eq))] =
                    eq == std::string_view::npos ? std::string{} : percent_decode(pair.substr(eq + 1));
            }
            if (amp == std::string_view::npos) break;
            rest.remove_prefix(amp + 1);
        }
    }
    return r;
}

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::scope:
        case ErrorCode::conflict:
        case ErrorCode::state: return 409;
        default: return 400;
    }
}

std::string error_body(const Error& error) {
    json body = {{"error",
                  {{"code", to_string(error.code())},
                   {"message", error.what()},
                   {"detail", error.detail()}}}};
    return body.dump();
}

Service::Service(Session::Clock clock) : clock_(std::move(clock)) {}

std::string Service::adopt(Session session) {
    std::lock_guard lock(registry_mutex_);
    std::string id = session.id();
    auto slot = std::make_shared<Slot>();
    slot->session = std::move(session);
    sessions_[id] = std::move(slot);
    return id;
}

std::optional<Session> Service::copy_session(const std::string& id) const {
    auto slot = find(id);
    if (!slot) return std::nullopt;
    std::shared_lock lock(slot->mutex);
    return slot->session;
}

std::shared_ptr<Service::Slot> Service::find(const std::string& id) const {
    std::lock_guard lock(registry_mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

std::shared_ptr<Service::Slot> Service::resolve(const Request& request, const std::string& prefixed_id) const {
    std::string id = prefixed_id;
    if (id.empty()) {
        if (auto it = request.query.find("session"); it != request.query.end()) {
            id = it->second;
        } else {
            std::lock_guard lock(registry_mutex_);
            if (sessions_.size() == 1) return sessions_.begin()->second;
            throw Error(ErrorCode::validation, "session id required (prefix /sessions/{id} or ?session=)");
        }
    }
    if (auto slot = find(id)) return slot;
    throw Error(ErrorCode::not_found, "unknown session '" + id + "'", {{"session", id}});
}

Response Service::handle(const Request& request) {
    try {
        auto parts = split_path(request.path);
        std::string session_id;
        if (!parts.empty() && parts.front() == "sessions") {
            if (parts.size() == 1) {
                if (request.method == "POST") {
                    std::string id;
                    {
                        std::lock_guard lock(registry_mutex_);
                        do {
                            id = "s" + std::to_string(next_session_++);
                        } while (sessions_.contains(id));
                    }
                    Session s(id, clock_);
                    json body = {{"id", s.id()}, {"created_at", s.created_at()}};
                    adopt(std::move(s));
                    return json_response(201, body);
                }
                if (request.method == "GET") {
                    std::lock_guard lock(registry_mutex_);
                    json ids = json::array();
                    for (const auto& [id, _] : sessions_) ids.push_back(id);
                    return json_response(200, {{"sessions", std::move(ids)}});
                }
                return json_response(405, json::parse(error_body(Error(ErrorCode::validation, "method not allowed"))));
            }
            session_id = parts[1];
            parts.erase(parts.begin(), parts.begin() + 2);
        }

        const Route* route = nullptr;
        bool path_known = false;
        Args args;
        for (const auto& r : routes()) {
            if (!match(r.pattern, parts, args)) continue;
            path_known = true;
            if (r.method == request.method) {
                route = &r;
                break;
            }
        }
        if (!route) {
            if (path_known) {
                return {405, error_body(Error(ErrorCode::validation, "method not allowed", {{"path", request.path}})),
                        "application/json"};
            }
            return {404, error_body(Error(ErrorCode::not_found, "no such endpoint", {{"path", request.path}})),
                    "application/json"};
        }
        match(route->pattern, parts, args);

        auto slot = resolve(request, session_id);
        if (route->mutates) {
            std::unique_lock lock(slot->mutex);
            return route->handler(slot->session, request, args);
        }
        std::shared_lock lock(slot->mutex);
        return route->handler(slot->session, request, args);
    } catch (const Error& e) {
        return {http_status(e.code()), error_body(e), "application/json"};
    } catch (const nlohmann::json::exception& e) {
        return {400, error_body(Error(ErrorCode::validation, std::string("malformed request: ") + e.what())),
                "application/json"};
    }
}

}  // namespace viewclean::api

// viewclean: command-line front end. Every subcommand becomes one API
// request against a session persisted as a snapshot file.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "viewclean/api.hpp"
#include "viewclean/serialize.hpp"

namespace fs = std::filesystem;
using viewclean::json;
using viewclean::api::Request;
using viewclean::api::Response;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    auto tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, p);
}

std::string encode(std::string_view s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 15];
        }
    }
    return out;
}

json parse_json_arg(const std::string& text, const char* what) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw CLI::ValidationError(what, "not valid JSON: " + text);
    return j;
}

// Accepts [{"attr","value"},...], {"atoms":[...]} or the shorthand {"NP":"OMORI"}.
json atoms_arg(const std::string& text) {
    json j = parse_json_arg(text, "--cond");
    if (j.is_array()) return j;
    if (j.is_object() && j.contains("atoms")) return j.at("atoms");
    if (j.is_object()) {
        json atoms = json::array();
        for (const auto& [k, v] : j.items()) atoms.push_back({{"attr", k}, {"value", v}});
        return atoms;
    }
    throw CLI::ValidationError("--cond", "expected an atom list or object");
}

json value_arg(const std::string& text, bool is_null) { return is_null ? json(nullptr) : json(text); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"viewclean: view-based data cleaning"};
    app.require_subcommand(1);

    std::string session_path = ".viewclean-session.json";
    if (const char* env = std::getenv("VIEWCLEAN_SESSION")) session_path = env;
    app.add_option("--session", session_path, "Session file (env VIEWCLEAN_SESSION)");

    // Filled by the selected subcommand's callback.
    std::string method, target, body, content_type = "application/json";
    bool jsonl_history = false;
    std::optional<std::string> out_file;

    auto set = [&](std::string m, std::string t, json b = nullptr) {
        method = std::move(m);
        target = std::move(t);
        body = b.is_null() ? std::string{} : b.dump();
    };

    // load
    auto* load = app.add_subcommand("load", "Ingest a CSV file as a table");
    std::string csv_path, id_col, table_name;
    bool no_header = false;
    load->add_option("csv", csv_path, "CSV file")->required()->check(CLI::ExistingFile);
    load->add_option("--id-col", id_col, "Attribute holding integer row ids");
    load->add_option("--name", table_name, "Table name (default: file stem)");
    load->add_flag("--no-header", no_header, "First line is data");
    load->callback([&] {
        if (table_name.empty()) table_name = fs::path(csv_path).stem().string();
        std::string t = "/tables?name=" + encode(table_name);
        if (!id_col.empty()) t += "&id_col=" + encode(id_col);
        if (no_header) t += "&header=false";
        method = "POST";
        target = t;
        body = read_file(csv_path);
        content_type = "text/csv";
    });

    app.add_subcommand("tables", "List tables")->callback([&] { set("GET", "/tables"); });

    // rows
    auto* rows = app.add_subcommand("rows", "Page through a table or view");
    std::string rows_table;
    std::optional<long> rows_view;
    long offset = 0, limit = 100;
    rows->add_option("--table", rows_table, "Table name");
    rows->add_option("--view", rows_view, "View id");
    rows->add_option("--offset", offset)->check(CLI::NonNegativeNumber);
    rows->add_option("--limit", limit)->check(CLI::NonNegativeNumber);
    rows->callback([&] {
        std::string page = "offset=" + std::to_string(offset) + "&limit=" + std::to_string(limit);
        if (rows_view && rows_table.empty()) {
            set("GET", "/views/" + std::to_string(*rows_view) + "/rows?" + page);
        } else if (!rows_table.empty()) {
            std::string t = "/tables/" + encode(rows_table) + "/rows?" + page;
            if (rows_view) t += "&view=" + std::to_string(*rows_view);
            set("GET", t);
        } else {
            throw CLI::ValidationError("rows", "need --table or --view");
        }
    });

    // view
    auto* view = app.add_subcommand("view", "Create a view (root, refine, relax or from marks)");
    std::string cond, view_table, keep, params;
    std::optional<long> refine, relax, from_marks, show;
    view->add_option("--cond", cond, "Atoms as JSON, e.g. '{\"OP\":\"KU\"}'");
    view->add_option("--table", view_table);
    view->add_option("--refine", refine, "Parent view to narrow");
    view->add_option("--relax", relax, "Parent view to widen");
    view->add_option("--keep", keep, "Atoms to keep when relaxing (JSON)");
    view->add_option("--from-marks", from_marks, "Mark set the view must cover");
    view->add_option("--params", params, "Suggestion params when --from-marks has no --cond");
    view->add_option("--id", show, "Show an existing view instead");
    view->add_option("--lineage", show, "Alias of --id with lineage output")->group("");
    view->callback([&] {
        if (show) {
            bool lineage = view->count("--lineage") > 0;
            set("GET", "/views/" + std::to_string(*show) + (lineage ? "/lineage" : ""));
            return;
        }
        json b = json::object();
        if (refine) {
            b["refine"] = *refine;
            b["atoms"] = atoms_arg(cond.empty() ? "[]" : cond);
        } else if (relax) {
            b["relax"] = *relax;
            b["keep"] = atoms_arg(keep.empty() ? (cond.empty() ? "[]" : cond) : keep);
        } else if (from_marks) {
            b["from_marks"] = *from_marks;
            if (!cond.empty()) b["atoms"] = atoms_arg(cond);
            if (!params.empty()) b["params"] = parse_json_arg(params, "--params");
        } else {
            if (!view_table.empty()) b["table"] = view_table;
            b["atoms"] = atoms_arg(cond.empty() ? "[]" : cond);
        }
        set("POST", "/views", b);
    });

    app.add_subcommand("views", "List views")->callback([&] { set("GET", "/views"); });

    // mark / unmark
    auto* mark = app.add_subcommand("mark", "Mark cells as suspicious");
    std::string cells, mark_table, label, origin;
    mark->add_option("--cells", cells, "JSON list of {row, attr}")->required();
    mark->add_option("--table", mark_table);
    mark->add_option("--label", label);
    mark->add_option("--origin", origin);
    mark->callback([&] {
        json b = {{"cells", parse_json_arg(cells, "--cells")}};
        if (!mark_table.empty()) b["table"] = mark_table;
        if (!label.empty()) b["label"] = label;
        if (!origin.empty()) b["origin"] = origin;
        set("POST", "/marks", b);
    });

    auto* unmark = app.add_subcommand("unmark", "Remove cells from a mark set");
    long unmark_set = 0;
    std::string unmark_cells;
    unmark->add_option("--set", unmark_set)->required();
    unmark->add_option("--cells", unmark_cells)->required();
    unmark->callback([&] {
        set("DELETE", "/marks/" + std::to_string(unmark_set) + "/cells",
            {{"cells", parse_json_arg(unmark_cells, "--cells")}});
    });

    app.add_subcommand("marks", "List mark sets")->callback([&] { set("GET", "/marks"); });

    // detect
    auto* detect = app.add_subcommand("detect", "Run a detector");
    detect->require_subcommand(1);
    std::string detect_table, fd_text, cfd_text, attr, policy, strategy;
    std::optional<long> detect_view;
    int max_lhs = 2;
    auto scope = [&](json b) {
        if (!detect_table.empty()) b["table"] = detect_table;
        if (detect_view) b["view"] = *detect_view;
        return b;
    };
    auto add_scope = [&](CLI::App* c) {
        c->add_option("--table", detect_table);
        c->add_option("--view", detect_view, "Restrict to a view's rows");
    };
    auto* fd_check = detect->add_subcommand("fd-check", "Check one FD, e.g. 'NP -> OP'");
    add_scope(fd_check);
    fd_check->add_option("--fd", fd_text)->required();
    fd_check->callback([&] { set("POST", "/detect/fd/check", scope({{"fd", fd_text}})); });
    auto* fd_discover = detect->add_subcommand("fd-discover", "Enumerate minimal FDs");
    add_scope(fd_discover);
    fd_discover->add_option("--max-lhs", max_lhs)->check(CLI::PositiveNumber);
    fd_discover->callback([&] { set("POST", "/detect/fd/discover", scope({{"max_lhs", max_lhs}})); });
    auto* removal = detect->add_subcommand("removal", "Fewest rows to drop so the FDs hold");
    add_scope(removal);
    std::vector<std::string> removal_fds;
    removal->add_option("--fd", removal_fds)->required();
    removal->callback([&] { set("POST", "/detect/fd/minimal-removal", scope({{"fds", removal_fds}})); });
    auto* cfd = detect->add_subcommand("cfd", "Check a CFD, e.g. \"OC -> OP :: ('Yoshikawa Lab.', KU)\"");
    add_scope(cfd);
    cfd->add_option("--cfd", cfd_text)->required();
    cfd->callback([&] { set("POST", "/detect/cfd/check", scope({{"cfd", cfd_text}})); });
    auto* variants = detect->add_subcommand("variants", "Group textual variants");
    add_scope(variants);
    variants->add_option("--attr", attr)->required();
    variants->add_option("--policy", policy, "Normalization policy JSON");
    variants->add_option("--strategy", strategy, "all_members or minority");
    variants->callback([&] {
        json b = {{"attr", attr}};
        if (!policy.empty()) b["policy"] = parse_json_arg(policy, "--policy");
        if (!strategy.empty()) b["strategy"] = strategy;
        set("POST", "/detect/variants", scope(b));
    });

    // suggest
    auto* suggest = app.add_subcommand("suggest", "Suggest views covering a mark set");
    std::string suggest_marks, suggest_params;
    suggest->add_option("--marks", suggest_marks, "Mark set id or JSON list of {row, attr}")->required();
    suggest->add_option("--params", suggest_params, "JSON: max_atoms, min_rows, max_rows, ops_allowed");
    suggest->callback([&] {
        json m = parse_json_arg(suggest_marks, "--marks");
        json b = m.is_array() ? json{{"cells", m}} : json{{"mark_set", m}};
        if (!suggest_params.empty()) b["params"] = parse_json_arg(suggest_params, "--params");
        set("POST", "/suggest/views", b);
    });

    // correct / undo / history
    auto* correct = app.add_subcommand("correct", "Correct values within a view");
    long correct_view = 0;
    std::optional<long> correct_row;
    std::string correct_attr, old_value, new_value, actor;
    bool old_null = false, new_null = false;
    correct->add_option("--view", correct_view)->required();
    correct->add_option("--attr", correct_attr)->required();
    correct->add_option("--row", correct_row, "Single cell instead of a batch");
    correct->add_option("--old", old_value, "Value to replace (batch form)");
    correct->add_flag("--old-null", old_null, "Replace NULL cells");
    correct->add_option("--new", new_value);
    correct->add_flag("--new-null", new_null, "Set cells to NULL");
    correct->add_option("--actor", actor);
    bool preview = false;
    correct->add_flag("--preview", preview, "Report matching rows without changing anything");
    correct->callback([&] {
        if (correct->count("--new") == 0 && !new_null) throw CLI::ValidationError("correct", "need --new or --new-null");
        json b = {{"view", correct_view}};
        if (correct_row) {
            b["cell"] = {{"row", *correct_row}, {"attr", correct_attr}};
        } else {
            if (correct->count("--old") == 0 && !old_null) {
                throw CLI::ValidationError("correct", "batch form needs --old or --old-null");
            }
            b["attr"] = correct_attr;
            b["old"] = value_arg(old_value, old_null);
        }
        b["new"] = value_arg(new_value, new_null);
        if (!actor.empty()) b["actor"] = actor;
        if (preview) b["preview"] = true;
        set("POST", "/corrections", b);
    });

    auto* undo = app.add_subcommand("undo", "Undo a correction");
    long undo_id = 0;
    std::string undo_actor;
    undo->add_option("entry", undo_id)->required();
    undo->add_option("--actor", undo_actor);
    undo->callback([&] {
        json b = json::object();
        if (!undo_actor.empty()) b["actor"] = undo_actor;
        set("POST", "/corrections/" + std::to_string(undo_id) + "/undo", b);
    });

    auto* hist = app.add_subcommand("history", "Correction audit trail");
    std::string hist_table, hist_attr;
    std::optional<long> hist_view;
    hist->add_option("--table", hist_table);
    hist->add_option("--attr", hist_attr);
    hist->add_option("--view", hist_view);
    hist->add_flag("--export", jsonl_history, "One JSON entry per line");
    hist->callback([&] {
        std::string q;
        auto add = [&](const std::string& k, const std::string& v) { q += (q.empty() ? "?" : "&") + k + "=" + encode(v); };
        if (!hist_table.empty()) add("table", hist_table);
        if (!hist_attr.empty()) add("attr", hist_attr);
        if (hist_view) add("view", std::to_string(*hist_view));
        set("GET", "/history" + q);
    });

    auto* rules = app.add_subcommand("rules", "Corrections previously applied to a value");
    std::string rules_table, rules_attr, rules_value;
    rules->add_option("--table", rules_table);
    rules->add_option("--attr", rules_attr)->required();
    rules->add_option("--value", rules_value)->required();
    rules->callback([&] {
        std::string q = "?attr=" + encode(rules_attr) + "&value=" + encode(rules_value);
        if (!rules_table.empty()) q += "&table=" + encode(rules_table);
        set("GET", "/suggest/corrections" + q);
    });

    auto* exp = app.add_subcommand("export", "Write a table as CSV");
    std::string exp_table;
    exp->add_option("--table", exp_table)->required();
    exp->add_option("--out", out_file, "Output file (default stdout)");
    exp->callback([&] { set("GET", "/tables/" + encode(exp_table) + "/export"); });

    app.add_subcommand("changelog", "Print the changelog as JSON lines")->callback([&] { set("GET", "/changelog"); });
    app.add_subcommand("snapshot", "Print the session snapshot")->callback([&] { set("GET", "/snapshot"); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        viewclean::api::Service service;
        std::size_t before = 0;
        std::string sid;
        if (fs::exists(session_path)) {
            auto s = viewclean::restore(read_file(session_path));
            before = s.changelog().size();
            sid = service.adopt(std::move(s));
        } else {
            sid = service.adopt(viewclean::Session("s1"));
        }

        Response r = service.handle(Request::make(method, target, body, content_type));
        if (r.status >= 300) {
            std::cerr << r.body << "\n";
            return 1;
        }

        auto session = *service.copy_session(sid);
        if (session.changelog().size() != before || !fs::exists(session_path)) {
            write_file(session_path, viewclean::snapshot(session));
        }

        std::string output = r.body;
        if (jsonl_history) {
            output.clear();
            json parsed = json::parse(r.body);
            for (const auto& e : parsed.at("entries")) output += e.dump() + "\n";
        } else if (!output.empty() && output.back() != '\n') {
            output += '\n';
        }
        if (out_file) {
            write_file(*out_file, output);
        } else {
            std::cout << output;
        }
        return 0;
    } catch (const viewclean::Error& e) {
        std::cerr << viewclean::api::error_body(e) << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", {{"code", "io_error"}, {"message", e.what()}}}}.dump() << "\n";
        return 1;
    }
}

#include "doctest.h"
#include "support.hpp"
#include "viewclean/api.hpp"
#include "viewclean/serialize.hpp"

#include <atomic>
#include <thread>

using namespace vc_test;
using viewclean::json;
using viewclean::api::Request;
using viewclean::api::Response;
using viewclean::api::Service;

namespace {

struct Client {
    Service service{[] { return std::chrono::system_clock::time_point{}; }};
    std::string sid;

    Response call(const std::string& method, const std::string& target, const json& body = nullptr) {
        return service.handle(Request::make(method, target, body.is_null() ? std::string{} : body.dump()));
    }
    json ok(const std::string& method, const std::string& target, const json& body = nullptr, int status = 200) {
        auto r = call(method, target, body);
        INFO(method << " " << target << " -> " << r.body);
        REQUIRE(r.status == status);
        return json::parse(r.body);
    }
    std::string prefix() const { return "/sessions/" + sid; }
};

void seed(Client& c) {
    c.sid = c.ok("POST", "/sessions", nullptr, 201).at("id").get<std::string>();
    auto r = c.service.handle(Request::make("POST", c.prefix() + "/tables?name=pubs&id_col=ID",
                                            read_data("pubs.csv"), "text/csv"));
    REQUIRE(r.status == 201);
}

std::vector<std::int64_t> row_ids(const json& page) {
    std::vector<std::int64_t> out;
    for (const auto& r : page.at("rows")) out.push_back(r.at("id").get<std::int64_t>());
    return out;
}

json ku_atoms() { return json::array({{{"attr", "OP"}, {"op", "equals"}, {"value", "KU"}}}); }

std::size_t changelog_lines(Client& c) {
    auto r = c.call("GET", c.prefix() + "/changelog");
    return static_cast<std::size_t>(std::count(r.body.begin(), r.body.end(), '\n'));
}

}  // namespace

TEST_CASE("view endpoint returns the OP=KU rows") {
    Client c;
    seed(c);
    auto v = c.ok("POST", c.prefix() + "/views", {{"table", "pubs"}, {"atoms", ku_atoms()}}, 201);
    auto id = v.at("view").at("id").get<std::int64_t>();
    CHECK(v.at("rows") == 7);
    CHECK(v.at("empty") == false);
    auto page = c.ok("GET", c.prefix() + "/views/" + std::to_string(id) + "/rows");
    CHECK(row_ids(page) == std::vector<std::int64_t>{1, 2, 8, 12, 13, 34, 49});
    CHECK(page.at("total") == 7);
    CHECK(page.at("limit") == 100);
    auto two = c.ok("GET", c.prefix() + "/views/" + std::to_string(id) + "/rows?offset=0&limit=2");
    CHECK(row_ids(two) == std::vector<std::int64_t>{1, 2});
    CHECK(two.at("total") == 7);
    CHECK(two.at("rows")[0].at("values").at("OP") == "KU");

    auto via_table = c.ok("GET", c.prefix() + "/tables/pubs/rows?view=" + std::to_string(id));
    CHECK(row_ids(via_table) == row_ids(page));
    CHECK(c.ok("GET", c.prefix() + "/tables/pubs/rows").at("total") == 12);
}

TEST_CASE("unknown ids are 404 and malformed input is 400") {
    Client c;
    seed(c);
    auto r = c.call("GET", c.prefix() + "/views/99/rows");
    CHECK(r.status == 404);
    auto err = json::parse(r.body).at("error");
    CHECK(err.at("code") == "not_found");
    CHECK(err.contains("message"));
    CHECK(err.contains("detail"));

    CHECK(c.call("GET", "/sessions/nope/views").status == 404);
    CHECK(c.call("GET", c.prefix() + "/no/such/route").status == 404);
    CHECK(c.call("POST", c.prefix() + "/views", "not json").status == 400);
    auto bad = c.service.handle(Request::make("POST", c.prefix() + "/views", "{not json"));
    CHECK(bad.status == 400);
    CHECK(c.call("POST", c.prefix() + "/views", {{"table", "pubs"}, {"atoms", {{{"attr", "ZZ"}, {"value", "1"}}}}}).status == 400);
    CHECK(c.call("GET", c.prefix() + "/views/abc/rows").status == 400);
    CHECK(c.call("DELETE", c.prefix() + "/views").status == 405);
}

TEST_CASE("batch correction then undo restores the export") {
    Client c;
    seed(c);
    std::string before = c.call("GET", c.prefix() + "/tables/pubs/export").body;
    auto v = c.ok("POST", c.prefix() + "/views", {{"table", "pubs"}, {"atoms", ku_atoms()}}, 201);
    auto vid = v.at("view").at("id");

    auto preview = c.ok("POST", c.prefix() + "/corrections",
                        {{"view", vid}, {"attr", "OP"}, {"old", "KU"}, {"new", "Kyoto Univ."}, {"preview", true}});
    CHECK(preview.at("count") == 7);

    auto corr = c.ok("POST", c.prefix() + "/corrections",
                     {{"view", vid}, {"attr", "OP"}, {"old", "KU"}, {"new", "Kyoto Univ."}, {"actor", "alice"}}, 201);
    CHECK(corr.at("entry").at("changes").size() == 7);
    CHECK(c.call("GET", c.prefix() + "/tables/pubs/export").body != before);
    auto hist = c.ok("GET", c.prefix() + "/history");
    REQUIRE(hist.at("entries").size() == 1);
    CHECK(hist.at("entries")[0].at("changes").size() == 7);

    auto eid = corr.at("entry").at("id").get<std::int64_t>();
    auto u = c.ok("POST", c.prefix() + "/corrections/" + std::to_string(eid) + "/undo");
    CHECK(u.at("entry").at("undo_of") == eid);
    CHECK(c.call("GET", c.prefix() + "/tables/pubs/export").body == before);
    CHECK(c.call("GET", c.prefix() + "/tables/pubs/export").content_type == "text/csv");

    auto again = c.call("POST", c.prefix() + "/corrections/" + std::to_string(eid) + "/undo");
    CHECK(again.status == 409);
}

TEST_CASE("cell correction, scope errors and conflicts map to 409") {
    Client c;
    seed(c);
    auto v = c.ok("POST", c.prefix() + "/views",
                  {{"table", "pubs"}, {"atoms", {{{"attr", "NP"}, {"value", "OMORI"}}}}}, 201);
    auto vid = v.at("view").at("id");
    auto scope = c.call("POST", c.prefix() + "/corrections",
                        {{"view", vid}, {"cell", {{"row", 3}, {"attr", "OP"}}}, {"new", "x"}});
    CHECK(scope.status == 409);
    CHECK(json::parse(scope.body).at("error").at("code") == "scope_error");

    auto e1 = c.ok("POST", c.prefix() + "/corrections",
                   {{"view", vid}, {"attr", "OP"}, {"old", "KU"}, {"new", "Kyoto Univ."}}, 201);
    c.ok("POST", c.prefix() + "/corrections", {{"view", vid}, {"cell", {{"row", 8}, {"attr", "OP"}}}, {"new", "K"}}, 201);
    auto conflict = c.call("POST", c.prefix() + "/corrections/" + std::to_string(e1.at("entry").at("id").get<int>()) + "/undo");
    CHECK(conflict.status == 409);
    CHECK(json::parse(conflict.body).at("error").at("detail").at("conflicts").size() == 1);
}

TEST_CASE("marks, suggestions and views from marks") {
    Client c;
    seed(c);
    auto m = c.ok("POST", c.prefix() + "/marks",
                  {{"cells", {{{"row", 1}, {"attr", "OP"}}, {{"row", 2}, {"attr", "OP"}}}}, {"label", "KU-ambiguity"}}, 201);
    auto mid = m.at("id");
    CHECK(m.at("cells").size() == 2);

    auto sug = c.ok("POST", c.prefix() + "/suggest/views", {{"mark_set", mid}});
    const auto& top = sug.at("suggestions")[0];
    CHECK(top.at("condition").at("atoms") == json::array({{{"attr", "OP"}, {"op", "equals"}, {"value", "KU"}}}));
    CHECK(top.at("rows") == 7);
    CHECK(top.at("extra") == 5);
    CHECK(top.at("atoms") == 1);
    CHECK(top.at("rank") == 1);

    auto from = c.ok("POST", c.prefix() + "/views", {{"from_marks", mid}}, 201);
    CHECK(from.at("view").at("derivation") == "from_marks");
    CHECK(from.at("rows") == 7);
    auto vid = std::to_string(from.at("view").at("id").get<int>());
    CHECK(c.ok("GET", c.prefix() + "/views/" + vid + "/marks").at("cells").size() == 2);
    CHECK(c.ok("GET", c.prefix() + "/views/" + vid + "/rows").at("marked").size() == 2);

    auto del = c.ok("DELETE", c.prefix() + "/marks/" + std::to_string(mid.get<int>()) + "/cells",
                    {{"cells", {{{"row", 1}, {"attr", "OP"}}}}});
    CHECK(del.at("deleted") == false);
    CHECK(del.at("mark_set").at("cells").size() == 1);
    del = c.ok("DELETE", c.prefix() + "/marks/" + std::to_string(mid.get<int>()) + "/cells",
               {{"cells", {{{"row", 2}, {"attr", "OP"}}}}});
    CHECK(del.at("deleted") == true);
    CHECK(del.at("mark_set").is_null());
    CHECK(c.ok("GET", c.prefix() + "/marks").at("mark_sets").empty());
}

TEST_CASE("refine, relax and lineage over http") {
    Client c;
    seed(c);
    auto root = c.ok("POST", c.prefix() + "/views", {{"table", "pubs"}, {"atoms", ku_atoms()}}, 201);
    auto refined = c.ok("POST", c.prefix() + "/views",
                        {{"refine", root.at("view").at("id")}, {"atoms", {{{"attr", "NP"}, {"value", "OMORI"}}}}}, 201);
    CHECK(refined.at("rows") == 5);
    auto relaxed = c.ok("POST", c.prefix() + "/views",
                        {{"relax", refined.at("view").at("id")}, {"keep", {{{"attr", "NP"}, {"value", "OMORI"}}}}}, 201);
    CHECK(relaxed.at("rows") == 7);
    auto lin = c.ok("GET", c.prefix() + "/views/" + std::to_string(relaxed.at("view").at("id").get<int>()) + "/lineage");
    REQUIRE(lin.at("chain").size() == 3);
    CHECK(lin.at("chain")[1].at("derivation") == "refine");
    CHECK(lin.at("chain")[2].at("derivation") == "relax");
    auto bad = c.call("POST", c.prefix() + "/views",
                      {{"relax", root.at("view").at("id")}, {"keep", {{{"attr", "NP"}, {"value", "OMORI"}}}}});
    CHECK(bad.status == 400);
    CHECK(json::parse(bad.body).at("error").at("code") == "lineage_error");
}

TEST_CASE("detectors over http") {
    Client c;
    seed(c);
    auto check = c.ok("POST", c.prefix() + "/detect/fd/check", {{"table", "pubs"}, {"fd", "OC -> OP"}});
    CHECK(check.at("holds") == false);
    CHECK(check.at("proposed_marks").size() == 2);

    auto removal = c.ok("POST", c.prefix() + "/detect/fd/minimal-removal", {{"table", "pubs"}, {"fd", "OC -> OP"}});
    CHECK(removal.dump() == R"({"remove":[20,21],"certified_optimal":true})");

    auto disc = c.ok("POST", c.prefix() + "/detect/fd/discover", {{"table", "pubs"}, {"max_lhs", 1}});
    CHECK_FALSE(disc.at("fds").empty());

    auto cfd = c.ok("POST", c.prefix() + "/detect/cfd/check", {{"table", "pubs"}, {"cfd", "OP -> OC :: (KU, 'Yoshikawa Lab.')"}});
    CHECK(cfd.at("proposed_marks").size() == 5);

    auto var = c.ok("POST", c.prefix() + "/detect/variants", {{"table", "pubs"}, {"attr", "OP"}});
    CHECK(var.at("groups").size() == 1);
    auto minority = c.ok("POST", c.prefix() + "/detect/variants",
                         {{"table", "pubs"}, {"attr", "OP"}, {"strategy", "minority_members"}});
    CHECK(minority.at("proposed_marks").size() == 1);
    CHECK(c.call("POST", c.prefix() + "/detect/variants", {{"attr", "OP"}, {"strategy", "x"}}).status == 400);
    CHECK(c.call("POST", c.prefix() + "/detect/fd/check", {{"fd", "garbage"}}).status == 400);

    auto v = c.ok("POST", c.prefix() + "/views", {{"table", "pubs"}, {"atoms", ku_atoms()}}, 201);
    auto scoped = c.ok("POST", c.prefix() + "/detect/fd/check", {{"view", v.at("view").at("id")}, {"fd", "OC -> OP"}});
    CHECK(scoped.at("holds") == true);
}

TEST_CASE("correction suggestions over http") {
    Client c;
    seed(c);
    auto v = c.ok("POST", c.prefix() + "/views", {{"table", "pubs"}}, 201);
    for (int row : {1, 2}) {
        c.ok("POST", c.prefix() + "/corrections",
             {{"view", v.at("view").at("id")}, {"cell", {{"row", row}, {"attr", "OP"}}}, {"new", "Kyoto Univ."}}, 201);
    }
    auto rules = c.ok("GET", c.prefix() + "/suggest/corrections?table=pubs&attr=OP&value=KU");
    REQUIRE(rules.at("rules").size() == 1);
    CHECK(rules.at("rules")[0].at("new") == "Kyoto Univ.");
    CHECK(rules.at("rules")[0].at("support") == 2);
    CHECK(c.ok("GET", c.prefix() + "/history?attr=OP").at("entries").size() == 2);
    CHECK(c.ok("GET", c.prefix() + "/history?attr=OC").at("entries").empty());
}

TEST_CASE("mutations append one record, reads and failures append none") {
    Client c;
    seed(c);
    CHECK(changelog_lines(c) == 1);
    std::string snap = c.call("GET", c.prefix() + "/snapshot").body;

    c.ok("GET", c.prefix() + "/views");
    c.ok("POST", c.prefix() + "/detect/fd/check", {{"fd", "OC -> OP"}});
    c.ok("POST", c.prefix() + "/suggest/views", {{"cells", {{{"row", 1}, {"attr", "OP"}}}}});
    CHECK(changelog_lines(c) == 1);

    CHECK(c.call("POST", c.prefix() + "/marks", {{"cells", {{{"row", 999}, {"attr", "OP"}}}}}).status == 400);
    CHECK(c.call("POST", c.prefix() + "/views", {{"table", "pubs"}, {"atoms", {{{"attr", "Q"}, {"value", "1"}}}}}).status == 400);
    CHECK(c.call("POST", c.prefix() + "/corrections", {{"view", 42}, {"attr", "OP"}, {"old", "KU"}, {"new", "x"}}).status == 404);
    auto dup = c.service.handle(Request::make("POST", c.prefix() + "/tables?name=pubs&id_col=ID", "ID\n1\n", "text/csv"));
    CHECK(dup.status == 400);
    CHECK(c.call("GET", c.prefix() + "/snapshot").body == snap);

    c.ok("POST", c.prefix() + "/marks", {{"cells", {{{"row", 1}, {"attr", "OP"}}}}}, 201);
    CHECK(changelog_lines(c) == 2);
    c.ok("POST", c.prefix() + "/views", {{"table", "pubs"}}, 201);
    CHECK(changelog_lines(c) == 3);
}

TEST_CASE("replaying an identical view request gives an identical evaluation") {
    Client c;
    seed(c);
    json body = {{"table", "pubs"}, {"atoms", ku_atoms()}};
    auto a = c.ok("POST", c.prefix() + "/views", body, 201);
    auto b = c.ok("POST", c.prefix() + "/views", body, 201);
    CHECK(a.at("view").at("id") != b.at("view").at("id"));
    auto rows = [&](const json& v) {
        return row_ids(c.ok("GET", c.prefix() + "/views/" + std::to_string(v.at("view").at("id").get<int>()) + "/rows"));
    };
    CHECK(rows(a) == rows(b));
}

TEST_CASE("bare paths resolve to the only session or ?session=") {
    Client c;
    seed(c);
    CHECK(c.call("GET", "/tables").status == 200);
    c.ok("POST", "/sessions", nullptr, 201);
    CHECK(c.call("GET", "/tables").status == 400);
    CHECK(c.call("GET", "/tables?session=" + c.sid).status == 200);
    CHECK(c.ok("GET", "/sessions").at("sessions").size() == 2);
    CHECK(c.ok("GET", c.prefix()).at("tables") == 1);
}

TEST_CASE("percent-encoded query values decode") {
    auto r = Request::make("GET", "/history?attr=O%50&value=Kyoto+Univ.");
    CHECK(r.path == "/history");
    CHECK(r.query.at("attr") == "OP");
    CHECK(r.query.at("value") == "Kyoto Univ.");
}

TEST_CASE("status mapping") {
    using viewclean::api::http_status;
    CHECK(http_status(ErrorCode::not_found) == 404);
    CHECK(http_status(ErrorCode::scope) == 409);
    CHECK(http_status(ErrorCode::conflict) == 409);
    CHECK(http_status(ErrorCode::state) == 409);
    CHECK(http_status(ErrorCode::validation) == 400);
    CHECK(http_status(ErrorCode::parse) == 400);
}

TEST_CASE("concurrent requests on one session are serialized") {
    Client c;
    seed(c);
    auto v = c.ok("POST", c.prefix() + "/views", {{"table", "pubs"}}, 201);
    auto vid = v.at("view").at("id");
    std::vector<std::thread> threads;
    std::atomic<int> created{0};
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            for (int k = 0; k < 10; ++k) {
                auto r = c.call("POST", c.prefix() + "/corrections",
                                {{"view", vid}, {"cell", {{"row", 1}, {"attr", "Y"}}}, {"new", std::to_string(i * 100 + k)}});
                if (r.status == 201) ++created;
                c.call("GET", c.prefix() + "/views/" + std::to_string(vid.get<int>()) + "/rows");
            }
        });
    }
    for (auto& t : threads) t.join();
    CHECK(created == 80);
    auto hist = c.ok("GET", c.prefix() + "/history").at("entries");
    CHECK(hist.size() == 80);
    for (std::size_t i = 0; i < hist.size(); ++i) CHECK(hist[i].at("id") == i + 1);
    auto session = c.service.copy_session(c.sid);
    REQUIRE(session);
    CHECK(Session::replay(session->id(), session->created_at(), session->changelog()) == *session);
}

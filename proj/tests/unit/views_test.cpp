#include "doctest.h"
#include "support.hpp"
#include "viewclean/correction.hpp"
#include "viewclean/marking.hpp"
#include "viewclean/views.hpp"

using namespace vc_test;

namespace {
std::vector<std::int64_t> eval(const Session& s, const ViewDef& v) { return ids(view_row_ids(s, v)); }
}  // namespace

TEST_CASE("pubs walkthrough") {
    Session s = pubs_session();
    auto ku = create_view(s, "pubs", ViewCondition({eq("OP", "KU")}));
    CHECK(eval(s, ku) == std::vector<std::int64_t>{1, 2, 8, 12, 13, 34, 49});
    auto refined = refine_view(s, ku.id, {eq("NP", "OMORI")});
    CHECK(eval(s, refined) == std::vector<std::int64_t>{1, 2, 8, 34, 49});
    auto relaxed = relax_view(s, refined.id, {eq("NP", "OMORI")});
    CHECK(eval(s, relaxed) == std::vector<std::int64_t>{1, 2, 8, 20, 21, 34, 49});

    auto chain = view_lineage(s, relaxed.id);
    REQUIRE(chain.size() == 3);
    CHECK(chain[0].derivation == Derivation::root);
    CHECK(chain[0].condition == ViewCondition({eq("OP", "KU")}));
    CHECK(chain[1].derivation == Derivation::refine);
    CHECK(chain[1].condition == ViewCondition({eq("OP", "KU"), eq("NP", "OMORI")}));
    CHECK(chain[2].derivation == Derivation::relax);
    CHECK(chain[2].condition == ViewCondition({eq("NP", "OMORI")}));
}

TEST_CASE("create_view examples") {
    Session s = pubs_session();
    CHECK(eval(s, create_view(s, "pubs", {})).size() == 12);
    CHECK(eval(s, create_view(s, "pubs", ViewCondition({eq("OP", "KU"), eq("NP", "OMORI")}))) ==
          std::vector<std::int64_t>{1, 2, 8, 34, 49});
    try {
        create_view(s, "pubs", ViewCondition({eq("XX", "1")}));
        FAIL("expected condition error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::condition);
    }
    CHECK_THROWS_AS(create_view(s, "missing", {}), Error);
}

TEST_CASE("refine edge cases") {
    Session s = pubs_session();
    auto ku = create_view(s, "pubs", ViewCondition({eq("OP", "KU")}));
    auto same = refine_view(s, ku.id, {eq("OP", "KU")});
    CHECK(same.condition == ku.condition);
    CHECK(eval(s, same) == eval(s, ku));
    auto empty = refine_view(s, ku.id, {eq("Y", "1900")});
    CHECK(evaluate_view(s, empty.id).empty_view());
}

TEST_CASE("relax edge cases") {
    Session s = pubs_session();
    auto both = create_view(s, "pubs", ViewCondition({eq("OP", "KU"), eq("NP", "OMORI")}));
    CHECK(eval(s, relax_view(s, both.id, both.condition.atoms())) == eval(s, both));
    CHECK(eval(s, relax_view(s, both.id, {})).size() == 12);
    try {
        relax_view(s, both.id, {eq("OC", "ylab")});
        FAIL("expected lineage error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::lineage);
    }
}

TEST_CASE("evaluation is virtual") {
    Session s = pubs_session();
    auto ku = create_view(s, "pubs", ViewCondition({eq("OP", "KU")}));
    correct_cell(s, ku.id, {"pubs", RowId(1), "OP"}, CellValue("Kyoto Univ."), "a");
    auto page = evaluate_view(s, ku.id);
    CHECK(page.total_count == 6);
    CHECK(std::none_of(page.rows.begin(), page.rows.end(), [](const Row& r) { return r.id == RowId(1); }));
}

TEST_CASE("paging") {
    Session s = pubs_session();
    auto ku = create_view(s, "pubs", ViewCondition({eq("OP", "KU")}));
    mark_cells(s, {{"pubs", RowId(2), "OP"}, {"pubs", RowId(8), "OP"}});
    auto page = evaluate_view(s, ku.id, {0, 2});
    CHECK(page.total_count == 7);
    REQUIRE(page.rows.size() == 2);
    CHECK(page.rows[0].id == RowId(1));
    CHECK(page.rows[1].id == RowId(2));
    CHECK(page.marked_cells == std::vector<CellRef>{{"pubs", RowId(2), "OP"}});
    CHECK(evaluate_view(s, ku.id, {6, 10}).rows.size() == 1);
    CHECK(evaluate_view(s, ku.id, {50, 10}).rows.empty());
    CHECK(evaluate_view(s, ku.id).rows.size() == 7);
}

TEST_CASE("case study view shows the affiliation variants") {
    Session s;
    add_table(s, load_fixture("case_study.csv", "cs"));
    auto v = create_view(s, "cs", ViewCondition({eq("NA", "Hiromichi Igarashi")}));
    auto page = evaluate_view(s, v.id);
    std::set<std::string> oa, op;
    const Table& t = s.table("cs");
    for (const auto& r : page.rows) {
        if (auto x = r.values[*t.attribute_index("OA")]) oa.insert(*x);
        if (auto x = r.values[*t.attribute_index("OP")]) op.insert(*x);
    }
    CHECK(oa.contains("JAMSTEC/DrC"));
    CHECK(oa.contains("DrC/JAMSTEC"));
    CHECK(op.contains("JAMSTEC/DRC"));
}

TEST_CASE("lineage of nested refinements") {
    Session s = pubs_session();
    auto v = create_view(s, "pubs", {});
    CHECK(view_lineage(s, v.id).size() == 1);
    for (int i = 0; i < 10; ++i) v = refine_view(s, v.id, {eq("Y", std::to_string(2010 + i))});
    auto chain = view_lineage(s, v.id);
    CHECK(chain.size() == 11);
    std::set<ViewId> seen;
    for (const auto& step : chain) CHECK(seen.insert(step.view).second);
}

TEST_CASE("view from marks must cover the marked rows") {
    Session s = pubs_session();
    auto m = mark_cells(s, {{"pubs", RowId(1), "OP"}, {"pubs", RowId(2), "OP"}});
    auto v = create_view_from_marks(s, m.id, ViewCondition({eq("OP", "KU")}));
    CHECK(v.derivation == Derivation::from_marks);
    CHECK(v.source_marks == m.id);
    CHECK_THROWS_AS(create_view_from_marks(s, m.id, ViewCondition({eq("Y", "2018")})), Error);
}

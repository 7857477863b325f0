// Randomized checks against brute-force oracles. Seeds are fixed so
// failures reproduce.

#include "doctest.h"
#include "support.hpp"
#include "viewclean/correction.hpp"
#include "viewclean/marking.hpp"
#include "viewclean/serialize.hpp"
#include "viewclean/suggest.hpp"
#include "viewclean/variants.hpp"
#include "viewclean/views.hpp"

using namespace vc_test;

namespace {

using GroupMap = std::map<std::vector<std::string>, std::map<std::string, std::vector<RowId>>>;

GroupMap naive_violations(const Table& t, const FD& fd) {
    std::vector<std::size_t> lhs;
    for (const auto& a : fd.lhs) lhs.push_back(*t.attribute_index(a));
    std::size_t rhs = *t.attribute_index(fd.rhs);
    auto deps = lhs;
    deps.push_back(rhs);
    GroupMap all;
    for (auto id : evaluable_rows(t, deps)) {
        const Row& row = t.row(id);
        std::vector<std::string> key;
        for (auto k : lhs) key.push_back(*row.values[k]);
        all[key][*row.values[rhs]].push_back(id);
    }
    GroupMap out;
    for (auto& [k, parts] : all) {
        if (parts.size() > 1) out[k] = parts;
    }
    return out;
}

GroupMap as_map(const ViolationReport& r) {
    GroupMap out;
    for (const auto& g : r.groups) {
        for (const auto& p : g.partitions) out[g.lhs_values][p.value] = p.rows;
    }
    return out;
}

}  // namespace

TEST_CASE("check_fd agrees with the pairwise checker on tables up to 200 rows") {
    std::mt19937 rng(11);
    for (int i = 0; i < 60; ++i) {
        RandomTableSpec spec;
        spec.max_rows = 200;
        spec.alphabet = 4;
        spec.null_rate = i % 3 == 0 ? 0.1 : 0.0;
        Table t = random_table(rng, spec);
        FD fd = random_fd(rng, t);
        auto report = check_fd(t, fd);
        CHECK(as_map(report) == naive_violations(t, fd));
        std::vector<std::size_t> deps;
        for (const auto& a : fd.lhs) deps.push_back(*t.attribute_index(a));
        deps.push_back(*t.attribute_index(fd.rhs));
        CHECK(report.rows_checked == evaluable_rows(t, deps).size());
        CHECK(report.rows_checked + report.not_evaluated == t.size());
    }
}

TEST_CASE("discovered fds are valid and minimal") {
    std::mt19937 rng(12);
    for (int i = 0; i < 80; ++i) {
        RandomTableSpec spec;
        spec.max_rows = 12;
        spec.max_attrs = 6;
        Table t = random_table(rng, spec);
        for (std::size_t k = 1; k <= 3; ++k) {
            auto fds = discover_fds(t, k);
            std::set<FdKey> got;
            for (const auto& fd : fds) {
                got.insert(fd_key(fd));
                CHECK(check_fd(t, fd).holds());
                for (std::size_t drop = 0; drop < fd.lhs.size() && fd.lhs.size() > 1; ++drop) {
                    FD smaller = fd;
                    smaller.lhs.erase(smaller.lhs.begin() + static_cast<std::ptrdiff_t>(drop));
                    CHECK_FALSE(check_fd(t, smaller).holds());
                }
            }
            CHECK(got == naive_discover(t, k));
        }
    }
}

TEST_CASE("single-fd removal is optimal on tables up to 10 rows") {
    std::mt19937 rng(13);
    for (int i = 0; i < 150; ++i) {
        RandomTableSpec spec;
        spec.max_rows = 10;
        spec.null_rate = i % 4 == 0 ? 0.1 : 0.0;
        Table t = random_table(rng, spec);
        FD fd = random_fd(rng, t);
        auto r = minimal_removal(t, t.row_ids(), std::vector<FD>{fd});
        CHECK(r.certified_optimal);
        CHECK(r.remove.size() == brute_force_removal(t, fd));
        CHECK(holds_after_removal(t, fd, r.remove));
    }
}

TEST_CASE("multi-fd removal always repairs") {
    std::mt19937 rng(14);
    for (int i = 0; i < 100; ++i) {
        Table t = random_table(rng, {.max_rows = 20, .max_attrs = 5, .alphabet = 3, .min_attrs = 3});
        std::vector<FD> fds{random_fd(rng, t), random_fd(rng, t), random_fd(rng, t)};
        auto r = minimal_removal(t, t.row_ids(), fds);
        for (const auto& fd : fds) CHECK(holds_after_removal(t, fd, r.remove));
    }
}

TEST_CASE("all-wildcard cfd equals the embedded fd") {
    std::mt19937 rng(15);
    for (int i = 0; i < 100; ++i) {
        Table t = random_table(rng, {.max_rows = 30, .max_attrs = 5, .alphabet = 3, .null_rate = 0.05});
        FD fd = random_fd(rng, t);
        CFD cfd{fd, {std::vector<PatternValue>(fd.lhs.size() + 1, std::nullopt)}};
        auto a = check_fd(t, fd);
        auto b = check_cfd(t, cfd);
        CHECK(as_map(a) == as_map(b));
        CHECK(violations_to_marks(a) == violations_to_marks(b));
    }
}

TEST_CASE("constant cfd rows are exactly the contradicting rows") {
    std::mt19937 rng(16);
    for (int i = 0; i < 100; ++i) {
        Table t = random_table(rng, {.max_rows = 20, .max_attrs = 4, .alphabet = 3});
        FD fd = random_fd(rng, t, 1);
        std::string lhs_const = "x", rhs_const = "y";
        CFD cfd{fd, {{PatternValue(lhs_const), PatternValue(rhs_const)}}};
        std::set<RowId> expected;
        auto li = *t.attribute_index(fd.lhs[0]);
        auto ri = *t.attribute_index(fd.rhs);
        for (const auto& [id, row] : t.rows()) {
            if (row.values[li] == CellValue(lhs_const) && row.values[ri] != CellValue(rhs_const)) expected.insert(id);
        }
        std::set<RowId> got;
        for (const auto& c : violations_to_marks(check_cfd(t, cfd))) got.insert(c.row);
        CHECK(got == expected);
    }
}

TEST_CASE("variant groups partition values by key") {
    std::mt19937 rng(17);
    const std::vector<std::string> pool = {"Kyoto Univ.", "kyoto univ", "Univ. Kyoto", "KU", "ku", "K-U", "Kobe",
                                           "a/b",         "b/a",        "A B",         "c"};
    for (int i = 0; i < 50; ++i) {
        Table t("v", {"x"});
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        for (int r = 0; r < 15; ++r) t.insert({t.allocate_row_id(), {CellValue(pool[pick(rng)])}});
        auto groups = find_variant_groups(t, "x");
        std::set<std::string> seen;
        for (const auto& g : groups) {
            CHECK(g.members.size() >= 2);
            for (const auto& m : g.members) {
                CHECK(normalize(m.value) == g.key);
                CHECK(seen.insert(m.value).second);
            }
        }
        // Any two distinct raw values sharing a key must be grouped.
        std::map<std::string, std::set<std::string>> by_key;
        for (const auto& [id, row] : t.rows()) by_key[normalize(*row.values[0])].insert(*row.values[0]);
        std::size_t expected = 0;
        for (const auto& [k, vals] : by_key) expected += vals.size() > 1;
        CHECK(groups.size() == expected);
    }
}

TEST_CASE("snapshot and replay survive random sessions") {
    std::mt19937 rng(18);
    for (int i = 0; i < 30; ++i) {
        Session s("p", [] { return std::chrono::system_clock::time_point{}; });
        Table src = random_table(rng, {.max_rows = 15, .max_attrs = 4, .alphabet = 3, .null_rate = 0.1});
        add_table(s, src);
        auto all = create_view(s, "r", {});
        for (int k = 0; k < 6; ++k) {
            auto marks = random_marks(rng, src);
            mark_cells(s, std::vector<CellRef>(marks.begin(), marks.end()));
            const auto& attr = src.attributes()[static_cast<std::size_t>(k) % src.attributes().size()];
            correct_values(s, all.id, attr, CellValue("x"), CellValue("z"), "bot");
        }
        undo(s, AuditId(1 + static_cast<std::int64_t>(rng() % s.audit().size())));
        Session back = restore(snapshot(s));
        CHECK(back == s);
        CHECK(Session::replay(s.id(), s.created_at(), s.changelog()) == s);
    }
}

#pragma once
// Shared fixtures, random generators and brute-force oracles for the unit,
// property and acceptance suites.

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "viewclean/condition.hpp"
#include "viewclean/fd.hpp"
#include "viewclean/session.hpp"
#include "viewclean/table.hpp"

namespace vc_test {

using namespace viewclean;

inline std::string data_path(const std::string& file) { return std::string(VIEWCLEAN_TEST_DATA) + "/" + file; }

inline std::string read_data(const std::string& file) {
    std::ifstream in(data_path(file), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Table load_fixture(const std::string& file, const std::string& name, const std::string& id = "ID") {
    CsvOptions opts;
    opts.id_attribute = id;
    return load_csv_text(read_data(file), name, opts);
}

/// Session with the 12-row fixture loaded as table "pubs" and a fixed clock.
inline Session pubs_session() {
    Session s("s1", [] { return std::chrono::system_clock::time_point{}; });
    add_table(s, load_fixture("pubs.csv", "pubs"));
    return s;
}

inline std::vector<std::int64_t> ids(const std::vector<RowId>& rows) {
    std::vector<std::int64_t> out;
    for (auto r : rows) out.push_back(r.value());
    return out;
}

inline ConditionAtom eq(std::string attr, std::string value) { return {std::move(attr), AtomOp::equals, std::move(value)}; }

// ---------------------------------------------------------------------------
// Random tables

struct RandomTableSpec {
    std::size_t max_rows = 8;
    std::size_t max_attrs = 5;
    std::size_t alphabet = 3;
    double null_rate = 0.0;
    std::size_t min_rows = 1;
    std::size_t min_attrs = 2;
};

inline Table random_table(std::mt19937& rng, const RandomTableSpec& spec = {}) {
    std::uniform_int_distribution<std::size_t> nrows(spec.min_rows, spec.max_rows);
    std::uniform_int_distribution<std::size_t> nattrs(spec.min_attrs, spec.max_attrs);
    std::uniform_int_distribution<std::size_t> sym(0, spec.alphabet - 1);
    std::bernoulli_distribution is_null(spec.null_rate);
    std::vector<std::string> attrs;
    std::size_t m = nattrs(rng);
    for (std::size_t i = 0; i < m; ++i) attrs.push_back(std::string(1, static_cast<char>('A' + i)));
    Table t("r", attrs);
    std::size_t n = nrows(rng);
    for (std::size_t r = 0; r < n; ++r) {
        Row row;
        row.id = t.allocate_row_id();
        for (std::size_t a = 0; a < m; ++a) {
            if (spec.null_rate > 0 && is_null(rng)) {
                row.values.push_back(std::nullopt);
            } else {
                row.values.push_back(std::string(1, static_cast<char>('x' + sym(rng))));
            }
        }
        t.insert(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// FD oracles

/// Pairwise check of X -> a on the given rows. NULL compares equal to NULL,
/// matching the partition semantics used by discovery.
inline bool naive_holds(const Table& t, const std::vector<RowId>& rows, const std::vector<std::size_t>& lhs,
                        std::size_t rhs) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            const Row& a = t.row(rows[i]);
            const Row& b = t.row(rows[j]);
            bool agree = std::all_of(lhs.begin(), lhs.end(), [&](std::size_t k) { return a.values[k] == b.values[k]; });
            if (agree && a.values[rhs] != b.values[rhs]) return false;
        }
    }
    return true;
}

using FdKey = std::pair<std::vector<std::string>, std::string>;  // sorted lhs, rhs

inline FdKey fd_key(const FD& fd) {
    auto lhs = fd.lhs;
    std::sort(lhs.begin(), lhs.end());
    return {lhs, fd.rhs};
}

/// Every minimal non-trivial X -> a with 1 <= |X| <= max_lhs, by subset enumeration.
inline std::set<FdKey> naive_discover(const Table& t, std::size_t max_lhs) {
    auto rows = t.row_ids();
    const auto& attrs = t.attributes();
    std::size_t m = attrs.size();
    std::set<FdKey> out;
    for (std::size_t rhs = 0; rhs < m; ++rhs) {
        std::vector<unsigned> holding;
        for (unsigned mask = 1; mask < (1u << m); ++mask) {
            if (mask & (1u << rhs)) continue;
            if (static_cast<std::size_t>(__builtin_popcount(mask)) > max_lhs) continue;
            std::vector<std::size_t> lhs;
            for (std::size_t k = 0; k < m; ++k) {
                if (mask & (1u << k)) lhs.push_back(k);
            }
            if (naive_holds(t, rows, lhs, rhs)) holding.push_back(mask);
        }
        for (unsigned mask : holding) {
            bool minimal = std::none_of(holding.begin(), holding.end(),
                                        [&](unsigned o) { return o != mask && (o & mask) == o; });
            if (!minimal) continue;
            FdKey key;
            for (std::size_t k = 0; k < m; ++k) {
                if (mask & (1u << k)) key.first.push_back(attrs[k]);
            }
            std::sort(key.first.begin(), key.first.end());
            key.second = attrs[rhs];
            out.insert(key);
        }
    }
    return out;
}

/// Rows with no NULL in the dependency, as check_fd evaluates them.
inline std::vector<RowId> evaluable_rows(const Table& t, const std::vector<std::size_t>& deps) {
    std::vector<RowId> out;
    for (const auto& [id, row] : t.rows()) {
        if (std::all_of(deps.begin(), deps.end(), [&](std::size_t k) { return row.values[k].has_value(); })) {
            out.push_back(id);
        }
    }
    return out;
}

/// Smallest number of rows whose removal makes fd hold (exhaustive).
inline std::size_t brute_force_removal(const Table& t, const FD& fd) {
    std::vector<std::size_t> lhs;
    for (const auto& a : fd.lhs) lhs.push_back(*t.attribute_index(a));
    std::size_t rhs = *t.attribute_index(fd.rhs);
    auto deps = lhs;
    deps.push_back(rhs);
    auto rows = evaluable_rows(t, deps);
    std::size_t n = rows.size();
    std::size_t best = n;
    for (unsigned keep = 0; keep < (1u << n); ++keep) {
        std::size_t removed = n - static_cast<std::size_t>(__builtin_popcount(keep));
        if (removed >= best) continue;
        std::vector<RowId> kept;
        for (std::size_t i = 0; i < n; ++i) {
            if (keep & (1u << i)) kept.push_back(rows[i]);
        }
        if (naive_holds(t, kept, lhs, rhs)) best = removed;
    }
    return best;
}

/// True when the rows of `t` outside `removed` satisfy fd.
inline bool holds_after_removal(const Table& t, const FD& fd, const std::vector<RowId>& removed) {
    std::vector<std::size_t> lhs;
    for (const auto& a : fd.lhs) lhs.push_back(*t.attribute_index(a));
    std::size_t rhs = *t.attribute_index(fd.rhs);
    auto deps = lhs;
    deps.push_back(rhs);
    std::vector<RowId> kept;
    for (auto id : evaluable_rows(t, deps)) {
        if (std::find(removed.begin(), removed.end(), id) == removed.end()) kept.push_back(id);
    }
    return naive_holds(t, kept, lhs, rhs);
}

inline FD random_fd(std::mt19937& rng, const Table& t, std::size_t max_lhs = 2) {
    const auto& attrs = t.attributes();
    std::vector<std::size_t> order(attrs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t k = std::uniform_int_distribution<std::size_t>(1, std::min(max_lhs, attrs.size() - 1))(rng);
    FD fd;
    for (std::size_t i = 0; i < k; ++i) fd.lhs.push_back(attrs[order[i]]);
    fd.rhs = attrs[order[k]];
    return fd;
}

// ---------------------------------------------------------------------------
// Suggestion oracle

/// All non-empty conjunctions of <= max_atoms equality atoms that hold on
/// every marked row, by direct enumeration over row values.
inline std::set<ViewCondition> naive_covering_conditions(const Table& t, const std::set<CellRef>& marked,
                                                         std::size_t max_atoms) {
    std::set<RowId> rows;
    for (const auto& c : marked) rows.insert(c.row);
    std::vector<ConditionAtom> shared;
    for (std::size_t a = 0; a < t.attributes().size(); ++a) {
        std::set<CellValue> values;
        for (auto r : rows) values.insert(t.value(r, a));
        if (values.size() == 1 && values.begin()->has_value()) shared.push_back(eq(t.attributes()[a], **values.begin()));
    }
    std::set<ViewCondition> out;
    std::size_t n = shared.size();
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(__builtin_popcount(mask)) > max_atoms) continue;
        std::vector<ConditionAtom> atoms;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask & (1u << i)) atoms.push_back(shared[i]);
        }
        out.insert(ViewCondition(atoms));
    }
    return out;
}

inline std::set<CellRef> random_marks(std::mt19937& rng, const Table& t, std::size_t max_cells = 3) {
    auto rows = t.row_ids();
    std::uniform_int_distribution<std::size_t> pick_row(0, rows.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_attr(0, t.attributes().size() - 1);
    std::size_t k = std::uniform_int_distribution<std::size_t>(1, max_cells)(rng);
    std::set<CellRef> out;
    for (std::size_t i = 0; i < k; ++i) out.insert({t.name(), rows[pick_row(rng)], t.attributes()[pick_attr(rng)]});
    return out;
}

}  // namespace vc_test

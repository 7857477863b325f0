#include "viewclean/fd.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>

namespace viewclean {

// ---------------------------------------------------------------------------
// Text form

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void syntax(std::string_view text, const std::string& what) {
    throw Error(ErrorCode::parse, "dependency '" + std::string(text) + "': " + what,
                {{"text", text}});
}

FD parse_fd_text(std::string_view text, std::string_view whole) {
    auto arrow = text.find("->");
    if (arrow == std::string_view::npos) syntax(whole, "missing '->'");
    FD fd;
    std::string_view lhs = text.substr(0, arrow);
    fd.rhs = std::string(trim(text.substr(arrow + 2)));
    if (fd.rhs.empty() || fd.rhs.find(',') != std::string::npos) syntax(whole, "need exactly one rhs attribute");
    while (true) {
        auto comma = lhs.find(',');
        auto name = trim(lhs.substr(0, comma));
        if (name.empty()) syntax(whole, "empty lhs attribute");
        if (std::find(fd.lhs.begin(), fd.lhs.end(), name) == fd.lhs.end()) fd.lhs.emplace_back(name);
        if (comma == std::string_view::npos) break;
        lhs.remove_prefix(comma + 1);
    }
    if (std::find(fd.lhs.begin(), fd.lhs.end(), fd.rhs) != fd.lhs.end()) {
        syntax(whole, "rhs attribute also appears on the lhs");
    }
    return fd;
}

// Parses "(a, 'b', _)" tuples. Returns after consuming all tuples.
std::vector<std::vector<PatternValue>> parse_tableau(std::string_view s, std::string_view whole) {
    std::vector<std::vector<PatternValue>> rows;
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    };
    while (true) {
        skip_ws();
        if (i >= s.size()) break;
        if (s[i] == ',' && !rows.empty()) {
            ++i;
            skip_ws();
        }
        if (i >= s.size() || s[i] != '(') syntax(whole, "expected '(' in pattern tableau");
        ++i;
        std::vector<PatternValue> row;
        while (true) {
            skip_ws();
            if (i >= s.size()) syntax(whole, "unterminated pattern tuple");
            if (s[i] == '\'' || s[i] == '"') {
                char q = s[i++];
                std::string value;
                while (true) {
                    if (i >= s.size()) syntax(whole, "unterminated quoted pattern value");
                    if (s[i] == q) {
                        if (i + 1 < s.size() && s[i + 1] == q) {
                            value.push_back(q);
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    value.push_back(s[i++]);
                }
                row.emplace_back(std::move(value));
                skip_ws();
            } else {
                std::size_t start = i;
                while (i < s.size() && s[i] != ',' && s[i] != ')') ++i;
                auto raw = trim(s.substr(start, i - start));
                if (raw.empty()) syntax(whole, "empty pattern value");
                if (raw == "_") {
                    row.emplace_back(std::nullopt);
                } else {
                    row.emplace_back(std::string(raw));
                }
            }
            if (i >= s.size()) syntax(whole, "unterminated pattern tuple");
            if (s[i] == ',') {
                ++i;
                continue;
            }
            if (s[i] == ')') {
                ++i;
                break;
            }
            syntax(whole, "unexpected character in pattern tuple");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) syntax(whole, "empty pattern tableau");
    return rows;
}

std::string quote_pattern(const PatternValue& v) {
    if (!v) return "_";
    bool plain = !v->empty() && *v != "_" && v->find_first_of(",()'\"") == std::string::npos &&
                 trim(*v) == *v;
    if (plain) return *v;
    std::string out = "'";
    for (char c : *v) {
        if (c == '\'') out += '\'';
        out += c;
    }
    return out + "'";
}

}  // namespace

FD parse_fd(std::string_view text) { return parse_fd_text(text, text); }

CFD parse_cfd(std::string_view text) {
    auto sep = text.find("::");
    if (sep == std::string_view::npos) syntax(text, "missing '::' before the pattern tableau");
    CFD cfd;
    cfd.fd = parse_fd_text(text.substr(0, sep), text);
    cfd.tableau = parse_tableau(text.substr(sep + 2), text);
    for (const auto& row : cfd.tableau) {
        if (row.size() != cfd.fd.lhs.size() + 1) {
            syntax(text, "pattern tuple width must be " + std::to_string(cfd.fd.lhs.size() + 1));
        }
    }
    return cfd;
}

std::string to_string(const FD& fd) {
    std::string out;
    for (const auto& a : fd.lhs) {
        if (!out.empty()) out += ", ";
        out += a;
    }
    return out + " -> " + fd.rhs;
}

std::string to_string(const CFD& cfd) {
    std::string out = to_string(cfd.fd) + " ::";
    for (std::size_t r = 0; r < cfd.tableau.size(); ++r) {
        out += r ? ", (" : " (";
        for (std::size_t i = 0; i < cfd.tableau[r].size(); ++i) {
            if (i) out += ", ";
            out += quote_pattern(cfd.tableau[r][i]);
        }
        out += ")";
    }
    return out;
}

void validate(const FD& fd, const Table& table) {
    if (fd.lhs.empty()) throw Error(ErrorCode::validation, "dependency needs at least one lhs attribute");
    for (const auto& a : fd.lhs) {
        table.require_attribute(a, ErrorCode::schema);
        if (a == fd.rhs) {
            throw Error(ErrorCode::validation, "rhs attribute '" + a + "' also appears on the lhs",
                        {{"attribute", a}});
        }
    }
    table.require_attribute(fd.rhs, ErrorCode::schema);
}

void validate(const CFD& cfd, const Table& table) {
    validate(cfd.fd, table);
    if (cfd.tableau.empty()) throw Error(ErrorCode::validation, "CFD tableau is empty");
    for (const auto& row : cfd.tableau) {
        if (row.size() != cfd.fd.lhs.size() + 1) {
            throw Error(ErrorCode::validation, "pattern tuple width does not match the dependency");
        }
    }
}

// ---------------------------------------------------------------------------
// Checking

namespace {

struct Bound {
    std::vector<std::size_t> lhs;
    std::size_t rhs;
};

Bound bind(const Table& table, const FD& fd) {
    validate(fd, table);
    Bound b;
    for (const auto& a : fd.lhs) b.lhs.push_back(*table.attribute_index(a));
    b.rhs = *table.attribute_index(fd.rhs);
    return b;
}

bool has_null(const Row& row, const Bound& b) {
    if (!row.values[b.rhs]) return true;
    return std::any_of(b.lhs.begin(), b.lhs.end(), [&](std::size_t i) { return !row.values[i]; });
}

std::vector<std::string> lhs_key(const Row& row, const Bound& b) {
    std::vector<std::string> key;
    key.reserve(b.lhs.size());
    for (auto i : b.lhs) key.push_back(*row.values[i]);
    return key;
}

// lhs class -> (rhs value -> rows)
using Classes = std::map<std::vector<std::string>, std::map<std::string, std::vector<RowId>>>;

std::vector<RhsPartition> ordered_partitions(const std::map<std::string, std::vector<RowId>>& parts) {
    std::vector<RhsPartition> out;
    for (const auto& [value, rows] : parts) out.push_back({value, rows});
    std::sort(out.begin(), out.end(),
              [](const RhsPartition& a, const RhsPartition& b) { return a.rows.front() < b.rows.front(); });
    return out;
}

RowId first_row(const ViolationGroup& g) {
    RowId best = g.partitions.front().rows.front();
    for (const auto& p : g.partitions) best = std::min(best, p.rows.front());
    return best;
}

void sort_groups(std::vector<ViolationGroup>& groups) {
    std::stable_sort(groups.begin(), groups.end(), [](const ViolationGroup& a, const ViolationGroup& b) {
        return first_row(a) < first_row(b);
    });
}

ViolationReport blank_report(const Table& table, const FD& fd, std::string dependency) {
    ViolationReport r;
    r.dependency = std::move(dependency);
    r.table = table.name();
    r.lhs = fd.lhs;
    r.rhs = fd.rhs;
    return r;
}

// Index of the partition kept by the plurality rule. Ties drop the lower
// row-ids, so the removal set is the lexicographically smallest one.
std::size_t plurality(const std::vector<RhsPartition>& parts) {
    std::size_t keep = 0;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto& a = parts[i];
        const auto& k = parts[keep];
        if (a.rows.size() > k.rows.size() ||
            (a.rows.size() == k.rows.size() && a.rows.front() > k.rows.front())) {
            keep = i;
        }
    }
    return keep;
}

}  // namespace

ViolationReport check_fd(const Table& table, std::span<const RowId> rows, const FD& fd) {
    Bound b = bind(table, fd);
    ViolationReport report = blank_report(table, fd, to_string(fd));
    Classes classes;
    for (RowId id : rows) {
        const Row& row = table.row(id);
        if (has_null(row, b)) {
            ++report.not_evaluated;
            continue;
        }
        ++report.rows_checked;
        classes[lhs_key(row, b)][*row.values[b.rhs]].push_back(id);
    }
    for (auto& [key, parts] : classes) {
        if (parts.size() < 2) continue;
        report.groups.push_back({key, ordered_partitions(parts), std::nullopt, std::nullopt});
    }
    sort_groups(report.groups);
    return report;
}

ViolationReport check_fd(const Table& table, const FD& fd) {
    auto ids = table.row_ids();
    return check_fd(table, ids, fd);
}

ViolationReport check_cfd(const Table& table, std::span<const RowId> rows, const CFD& cfd) {
    validate(cfd, table);
    Bound b = bind(table, cfd.fd);
    ViolationReport report = blank_report(table, cfd.fd, to_string(cfd));

    std::vector<const Row*> evaluated;
    for (RowId id : rows) {
        const Row& row = table.row(id);
        if (has_null(row, b)) {
            ++report.not_evaluated;
        } else {
            ++report.rows_checked;
            evaluated.push_back(&row);
        }
    }

    for (std::size_t p = 0; p < cfd.tableau.size(); ++p) {
        const auto& pattern = cfd.tableau[p];
        const PatternValue& rhs_pattern = pattern.back();
        Classes classes;
        for (const Row* row : evaluated) {
            bool match = true;
            for (std::size_t i = 0; i < b.lhs.size() && match; ++i) {
                if (pattern[i] && *row->values[b.lhs[i]] != *pattern[i]) match = false;
            }
            if (!match) continue;
            const std::string& rhs = *row->values[b.rhs];
            if (rhs_pattern && rhs == *rhs_pattern) continue;  // consistent with the constant
            classes[lhs_key(*row, b)][rhs].push_back(row->id);
        }
        for (auto& [key, parts] : classes) {
            if (rhs_pattern) {
                report.groups.push_back({key, ordered_partitions(parts), p, *rhs_pattern});
            } else if (parts.size() >= 2) {
                report.groups.push_back({key, ordered_partitions(parts), p, std::nullopt});
            }
        }
    }
    sort_groups(report.groups);
    return report;
}

ViolationReport check_cfd(const Table& table, const CFD& cfd) {
    auto ids = table.row_ids();
    return check_cfd(table, ids, cfd);
}

std::set<CellRef> violations_to_marks(const ViolationReport& report) {
    std::set<CellRef> out;
    auto add = [&](const RhsPartition& p) {
        for (RowId id : p.rows) out.insert({report.table, id, report.rhs});
    };
    for (const auto& g : report.groups) {
        if (g.expected) {
            for (const auto& p : g.partitions) add(p);
            continue;
        }
        std::size_t largest = 0;
        for (const auto& p : g.partitions) largest = std::max(largest, p.rows.size());
        auto at_max = std::count_if(g.partitions.begin(), g.partitions.end(),
                                    [&](const RhsPartition& p) { return p.rows.size() == largest; });
        for (const auto& p : g.partitions) {
            if (at_max > 1 || p.rows.size() != largest) add(p);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Repair

RemovalSuggestion minimal_removal(const Table& table, std::span<const RowId> rows, std::span<const FD> fds) {
    for (const auto& fd : fds) validate(fd, table);
    RemovalSuggestion result;
    result.certified_optimal = fds.size() <= 1;

    std::vector<RowId> current(rows.begin(), rows.end());
    std::set<RowId> removed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& fd : fds) {
            ViolationReport report = check_fd(table, current, fd);
            if (report.holds()) continue;
            std::set<RowId> drop;
            for (const auto& g : report.groups) {
                std::size_t keep = plurality(g.partitions);
                for (std::size_t i = 0; i < g.partitions.size(); ++i) {
                    if (i != keep) drop.insert(g.partitions[i].rows.begin(), g.partitions[i].rows.end());
                }
            }
            std::erase_if(current, [&](RowId id) { return drop.contains(id); });
            removed.insert(drop.begin(), drop.end());
            changed = true;
        }
    }
    result.remove.assign(removed.begin(), removed.end());
    return result;
}

// ---------------------------------------------------------------------------
// Discovery

namespace {

using AttrSet = std::uint64_t;

struct StrippedPartition {
    std::vector<std::vector<std::uint32_t>> classes;

    std::size_t error() const {
        std::size_t total = 0;
        for (const auto& c : classes) total += c.size();
        return total - classes.size();
    }
};

StrippedPartition partition_of(const std::vector<std::uint32_t>& codes) {
    std::map<std::uint32_t, std::vector<std::uint32_t>> by_code;
    for (std::uint32_t t = 0; t < codes.size(); ++t) by_code[codes[t]].push_back(t);
    StrippedPartition p;
    for (auto& [_, cls] : by_code) {
        if (cls.size() >= 2) p.classes.push_back(std::move(cls));
    }
    return p;
}

// Product of two stripped partitions; `owner` and `buckets` are scratch of
// size n / |a.classes| reused across calls.
StrippedPartition product(const StrippedPartition& a, const StrippedPartition& b,
                          std::vector<std::int32_t>& owner,
                          std::vector<std::vector<std::uint32_t>>& buckets) {
    for (std::size_t i = 0; i < a.classes.size(); ++i) {
        for (auto t : a.classes[i]) owner[t] = static_cast<std::int32_t>(i);
    }
    if (buckets.size() < a.classes.size()) buckets.resize(a.classes.size());
    StrippedPartition out;
    for (const auto& cls : b.classes) {
        for (auto t : cls) {
            if (owner[t] >= 0) buckets[owner[t]].push_back(t);
        }
        for (auto t : cls) {
            if (owner[t] < 0) continue;
            auto& bucket = buckets[owner[t]];
            if (bucket.size() >= 2) out.classes.push_back(bucket);
            bucket.clear();
        }
    }
    for (const auto& cls : a.classes) {
        for (auto t : cls) owner[t] = -1;
    }
    return out;
}

struct Node {
    StrippedPartition partition;
    std::size_t error = 0;
    AttrSet cplus = 0;
};

AttrSet highest_bit(AttrSet x) { return AttrSet{1} << (63 - std::countl_zero(x)); }

}  // namespace

std::vector<FD> discover_fds(const Table& table, std::span<const RowId> rows, std::size_t max_lhs_size) {
    if (max_lhs_size < 1) throw Error(ErrorCode::validation, "max_lhs_size must be at least 1");
    const std::size_t m = table.attributes().size();
    if (m > 64) throw Error(ErrorCode::validation, "FD discovery supports at most 64 attributes");
    const std::size_t n = rows.size();
    if (m < 2) return {};

    const AttrSet all = m == 64 ? ~AttrSet{0} : (AttrSet{1} << m) - 1;
    std::map<AttrSet, Node> level;
    for (std::size_t a = 0; a < m; ++a) {
        std::map<CellValue, std::uint32_t> dict;
        std::vector<std::uint32_t> codes(n);
        for (std::size_t t = 0; t < n; ++t) {
            const CellValue& v = table.value(rows[t], a);
            codes[t] = dict.try_emplace(v, static_cast<std::uint32_t>(dict.size())).first->second;
        }
        Node node;
        node.partition = partition_of(codes);
        node.error = node.partition.error();
        node.cplus = all;
        level.emplace(AttrSet{1} << a, std::move(node));
    }

    std::vector<std::pair<AttrSet, std::size_t>> found;  // (lhs, rhs)
    std::vector<std::int32_t> owner(n, -1);
    std::vector<std::vector<std::uint32_t>> buckets;
    std::map<AttrSet, Node> previous;

    for (std::size_t size = 1; !level.empty() && size <= max_lhs_size + 1; ++size) {
        // Dependencies X\{A} -> A for X in this level. Single attributes
        // would test the empty lhs, which is not reported.
        if (size >= 2) {
            for (auto& [x, node] : level) {
                AttrSet cplus = all;
                for (AttrSet rest = x; rest; rest &= rest - 1) {
                    AttrSet a = rest & (~rest + 1);
                    cplus &= previous.at(x & ~a).cplus;
                }
                node.cplus = cplus;
                for (AttrSet cand = x & cplus; cand; cand &= cand - 1) {
                    AttrSet a = cand & (~cand + 1);
                    if (previous.at(x & ~a).error == node.error) {
                        found.emplace_back(x & ~a, std::countr_zero(a));
                        node.cplus &= ~a;
                        node.cplus &= x;  // drop every B outside X
                    }
                }
            }
            std::erase_if(level, [](const auto& kv) { return kv.second.cplus == 0; });
        }
        if (size == max_lhs_size + 1) break;

        // Next level from pairs sharing all but their highest attribute.
        std::map<AttrSet, Node> next;
        std::map<AttrSet, std::vector<AttrSet>> blocks;
        for (const auto& [x, _] : level) blocks[x & ~highest_bit(x)].push_back(x);
        for (const auto& [_, members] : blocks) {
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (std::size_t j = i + 1; j < members.size(); ++j) {
                    AttrSet z = members[i] | members[j];
                    bool subsets_present = true;
                    for (AttrSet rest = z; rest && subsets_present; rest &= rest - 1) {
                        subsets_present = level.contains(z & ~(rest & (~rest + 1)));
                    }
                    if (!subsets_present) continue;
                    Node node;
                    node.partition = product(level.at(members[i]).partition,
                                             level.at(members[j]).partition, owner, buckets);
                    node.error = node.partition.error();
                    next.emplace(z, std::move(node));
                }
            }
        }
        previous = std::move(level);
        level = std::move(next);
    }

    std::sort(found.begin(), found.end(), [](const auto& p, const auto& q) {
        if (p.second != q.second) return p.second < q.second;
        if (std::popcount(p.first) != std::popcount(q.first)) return std::popcount(p.first) < std::popcount(q.first);
        return p.first < q.first;
    });
    std::vector<FD> out;
    for (const auto& [lhs, rhs] : found) {
        FD fd;
        for (std::size_t a = 0; a < m; ++a) {
            if (lhs & (AttrSet{1} << a)) fd.lhs.push_back(table.attributes()[a]);
        }
        fd.rhs = table.attributes()[rhs];
        out.push_back(std::move(fd));
    }
    return out;
}

std::vector<FD> discover_fds(const Table& table, std::size_t max_lhs_size) {
    auto ids = table.row_ids();
    return discover_fds(table, ids, max_lhs_size);
}

}  // namespace viewclean

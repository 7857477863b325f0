#include "viewclean/suggest.hpp"

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <tuple>

#include "viewclean/text.hpp"
#include "viewclean/views.hpp"

namespace viewclean {

void SuggestionParams::validate(std::size_t marked_rows) const {
    if (max_atoms < 1) throw Error(ErrorCode::validation, "max_atoms must be at least 1");
    if (ops_allowed.empty()) throw Error(ErrorCode::validation, "ops_allowed must not be empty");
    if (effective_min_rows(marked_rows) > max_rows) {
        throw Error(ErrorCode::validation, "min_rows exceeds max_rows",
                    {{"min_rows", effective_min_rows(marked_rows)}, {"max_rows", max_rows}});
    }
}

namespace {

std::vector<RowId> marked_rows(const Table& table, const std::set<CellRef>& marked) {
    std::set<RowId> ids;
    for (const auto& c : marked) {
        if (!table.resolves(c)) {
            throw Error(ErrorCode::mark, "unresolvable marked cell " + describe(c));
        }
        ids.insert(c.row);
    }
    return {ids.begin(), ids.end()};
}

std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Row membership of one atom as a bitmap over the table's row order.
using Bitmap = std::vector<std::uint64_t>;

}  // namespace

std::vector<ConditionAtom> candidate_atoms(const Table& table, const std::set<CellRef>& marked,
                                           const std::set<AtomOp>& ops) {
    auto rows = marked_rows(table, marked);
    std::vector<ConditionAtom> atoms;
    if (rows.empty()) return atoms;

    for (std::size_t a = 0; a < table.attributes().size(); ++a) {
        const std::string& attr = table.attributes()[a];
        std::vector<const CellValue*> values;
        for (RowId id : rows) values.push_back(&table.value(id, a));
        if (std::any_of(values.begin(), values.end(), [](const CellValue* v) { return !*v; })) {
            continue;  // NULL satisfies no atom
        }
        const std::string& first = **values.front();

        if (ops.contains(AtomOp::equals) &&
            std::all_of(values.begin(), values.end(), [&](const CellValue* v) { return **v == first; })) {
            atoms.push_back({attr, AtomOp::equals, first});
        }
        if (ops.contains(AtomOp::equals_ci) &&
            std::all_of(values.begin(), values.end(),
                        [&](const CellValue* v) { return ascii_iequals(**v, first); })) {
            atoms.push_back({attr, AtomOp::equals_ci, ascii_lower(first)});
        }
        if (ops.contains(AtomOp::contains)) {
            for (const auto& token : whitespace_tokens(first)) {
                if (std::all_of(values.begin(), values.end(), [&](const CellValue* v) {
                        return (*v)->find(token) != std::string::npos;
                    })) {
                    atoms.push_back({attr, AtomOp::contains, token});
                }
            }
        }
    }
    std::sort(atoms.begin(), atoms.end());
    atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
    return atoms;
}

std::vector<ConditionAtom> candidate_atoms(const Session& session, const MarkSet& marks,
                                           const std::set<AtomOp>& ops) {
    return candidate_atoms(marked_table(session, marks.cells), marks.cells, ops);
}

std::vector<SuggestionCandidate> suggest_views(const Table& table, const std::set<CellRef>& marked,
                                               const SuggestionParams& params) {
    auto rows = marked_rows(table, marked);
    if (rows.empty()) throw Error(ErrorCode::validation, "suggestions need at least one marked cell");
    params.validate(rows.size());
    auto atoms = candidate_atoms(table, marked, params.ops_allowed);

    std::set<std::string> marked_attrs;
    for (const auto& c : marked) marked_attrs.insert(c.attribute);

    // Bitmaps over the table's rows; marked rows get their own mask so the
    // extra-row count is a popcount of (view & ~marked).
    const auto ids = table.row_ids();
    const std::size_t words = (ids.size() + 63) / 64;
    Bitmap marked_mask(words, 0);
    {
        std::size_t j = 0;
        for (std::size_t i = 0; i < ids.size() && j < rows.size(); ++i) {
            if (ids[i] == rows[j]) {
                marked_mask[i / 64] |= std::uint64_t{1} << (i % 64);
                ++j;
            }
        }
    }
    std::vector<Bitmap> atom_rows;
    for (const auto& atom : atoms) {
        std::size_t idx = *table.attribute_index(atom.attribute);
        Bitmap bits(words, 0);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (atom_holds(atom.op, atom.value, table.value(ids[i], idx))) {
                bits[i / 64] |= std::uint64_t{1} << (i % 64);
            }
        }
        atom_rows.push_back(std::move(bits));
    }

    const std::size_t min_rows = params.effective_min_rows(rows.size());
    std::vector<SuggestionCandidate> out;
    std::vector<std::size_t> pick;
    Bitmap acc(words);

    // Depth-first over index combinations of size 1..max_atoms.
    auto emit = [&] {
        std::fill(acc.begin(), acc.end(), ~std::uint64_t{0});
        std::vector<ConditionAtom> chosen;
        std::size_t on_marked = 0;
        for (auto k : pick) {
            for (std::size_t w = 0; w < words; ++w) acc[w] &= atom_rows[k][w];
            chosen.push_back(atoms[k]);
            if (marked_attrs.contains(atoms[k].attribute)) ++on_marked;
        }
        SuggestionCandidate c;
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t valid = (w + 1 == words && ids.size() % 64) ? (std::uint64_t{1} << (ids.size() % 64)) - 1
                                                                      : ~std::uint64_t{0};
            c.row_count += static_cast<std::size_t>(std::popcount(acc[w] & valid));
            c.extra_rows += static_cast<std::size_t>(std::popcount(acc[w] & valid & ~marked_mask[w]));
        }
        c.condition = ViewCondition(std::move(chosen));
        c.in_window = c.row_count >= min_rows && c.row_count <= params.max_rows;
        c.marked_attribute_atoms = on_marked;
        out.push_back(std::move(c));
    };
    auto recurse = [&](auto&& self, std::size_t start) -> void {
        for (std::size_t k = start; k < atoms.size(); ++k) {
            pick.push_back(k);
            emit();
            if (pick.size() < params.max_atoms) self(self, k + 1);
            pick.pop_back();
        }
    };
    recurse(recurse, 0);

    const bool any_extra =
        std::any_of(out.begin(), out.end(), [](const SuggestionCandidate& c) { return c.extra_rows > 0; });
    const std::size_t window_sum = min_rows + params.max_rows;
    auto key = [&](const SuggestionCandidate& c) {
        std::size_t twice = 2 * c.row_count;
        std::size_t distance = twice > window_sum ? twice - window_sum : window_sum - twice;
        return std::make_tuple(any_extra && c.extra_rows == 0, !c.in_window, c.condition.size(), distance,
                               -static_cast<std::ptrdiff_t>(c.marked_attribute_atoms), c.condition.text());
    };
    std::sort(out.begin(), out.end(),
              [&](const SuggestionCandidate& a, const SuggestionCandidate& b) { return key(a) < key(b); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
    return out;
}

std::vector<SuggestionCandidate> suggest_views(const Session& session, const MarkSet& marks,
                                               const SuggestionParams& params) {
    return suggest_views(marked_table(session, marks.cells), marks.cells, params);
}

ViewDef create_view_from_suggestion(Session& session, MarkSetId marks, const SuggestionParams& params) {
    auto suggestions = suggest_views(session, session.mark_set(marks), params);
    if (suggestions.empty()) {
        throw Error(ErrorCode::validation, "no condition covers the marked rows",
                    {{"mark_set", marks.value()}});
    }
    return create_view_from_marks(session, marks, suggestions.front().condition);
}

const Table& marked_table(const Session& session, const std::set<CellRef>& cells) {
    if (cells.empty()) throw Error(ErrorCode::validation, "no marked cells");
    const std::string& name = cells.begin()->table;
    for (const auto& c : cells) {
        if (c.table != name) throw Error(ErrorCode::validation, "marked cells span several tables");
    }
    return session.table(name);
}

}  // namespace viewclean

#include "viewclean/variants.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "viewclean/text.hpp"

namespace viewclean {

std::string_view to_string(CompareAs mode) noexcept {
    switch (mode) {
        case CompareAs::token_multiset: return "token_multiset";
        case CompareAs::token_set: return "token_set";
        case CompareAs::joined_sorted: return "joined_sorted";
    }
    return "token_multiset";
}

std::optional<CompareAs> parse_compare_as(std::string_view text) noexcept {
    if (text == "token_multiset") return CompareAs::token_multiset;
    if (text == "token_set") return CompareAs::token_set;
    if (text == "joined_sorted") return CompareAs::joined_sorted;
    return std::nullopt;
}

std::string_view to_string(ProposalStrategy s) noexcept {
    return s == ProposalStrategy::all_members ? "all_members" : "minority_members";
}

std::optional<ProposalStrategy> parse_proposal_strategy(std::string_view text) noexcept {
    if (text == "all_members") return ProposalStrategy::all_members;
    if (text == "minority_members") return ProposalStrategy::minority_members;
    return std::nullopt;
}

void NormalizationPolicy::validate() const {
    if (separators.empty() && compare_as != CompareAs::joined_sorted) {
        throw Error(ErrorCode::validation, "separators must be non-empty unless compare_as is joined_sorted");
    }
}

std::string normalize(std::string_view value, const NormalizationPolicy& policy) {
    std::string folded = policy.case_fold ? ascii_lower(value) : std::string(value);

    std::vector<std::string> tokens;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= folded.size(); ++i) {
        if (i == folded.size() || policy.separators.find(folded[i]) != std::string::npos) {
            if (i > start) tokens.push_back(folded.substr(start, i - start));
            start = i + 1;
        }
    }
    std::sort(tokens.begin(), tokens.end());
    if (policy.compare_as == CompareAs::token_set) {
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    }

    std::string_view glue = policy.compare_as == CompareAs::joined_sorted ? "" : " ";
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) key += glue;
        key += tokens[i];
    }
    return key;
}

std::size_t VariantGroup::occurrences() const {
    return std::accumulate(members.begin(), members.end(), std::size_t{0},
                           [](std::size_t acc, const VariantMember& m) { return acc + m.rows.size(); });
}

std::vector<VariantGroup> find_variant_groups(const Table& table, std::span<const RowId> rows,
                                              std::string_view attribute,
                                              const NormalizationPolicy& policy) {
    policy.validate();
    std::size_t idx = table.require_attribute(attribute, ErrorCode::schema);

    std::map<std::string, std::vector<RowId>> by_value;
    for (RowId id : rows) {
        const CellValue& v = table.value(id, idx);
        if (v) by_value[*v].push_back(id);
    }
    std::map<std::string, std::vector<VariantMember>> by_key;
    for (auto& [value, ids] : by_value) {
        std::sort(ids.begin(), ids.end());
        by_key[normalize(value, policy)].push_back({value, std::move(ids)});
    }

    std::vector<VariantGroup> groups;
    for (auto& [key, members] : by_key) {
        if (members.size() < 2) continue;
        std::sort(members.begin(), members.end(), [](const VariantMember& a, const VariantMember& b) {
            if (a.rows.size() != b.rows.size()) return a.rows.size() > b.rows.size();
            return a.value < b.value;
        });
        groups.push_back({table.name(), std::string(attribute), key, std::move(members)});
    }
    std::stable_sort(groups.begin(), groups.end(), [](const VariantGroup& a, const VariantGroup& b) {
        return a.occurrences() > b.occurrences();
    });
    return groups;
}

std::vector<VariantGroup> find_variant_groups(const Table& table, std::string_view attribute,
                                              const NormalizationPolicy& policy) {
    auto ids = table.row_ids();
    return find_variant_groups(table, ids, attribute, policy);
}

std::set<CellRef> propose_marks(std::span<const VariantGroup> groups, ProposalStrategy strategy) {
    std::set<CellRef> out;
    for (const auto& g : groups) {
        // Members are already ordered by count desc then value, so the
        // majority is the first one.
        std::size_t skip = strategy == ProposalStrategy::minority_members ? 1 : 0;
        for (std::size_t i = skip; i < g.members.size(); ++i) {
            for (RowId id : g.members[i].rows) out.insert({g.table, id, g.attribute});
        }
    }
    return out;
}

}  // namespace viewclean

#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewclean/table.hpp"

namespace viewclean {

enum class CompareAs {
    token_multiset,  // sorted tokens, duplicates kept, joined by one space
    token_set,       // sorted unique tokens, joined by one space
    joined_sorted,   // sorted tokens concatenated with no delimiter
};

std::string_view to_string(CompareAs mode) noexcept;
std::optional<CompareAs> parse_compare_as(std::string_view text) noexcept;

struct NormalizationPolicy {
    bool case_fold = true;
    std::string separators = " \t\r\n/-_,.";
    CompareAs compare_as = CompareAs::token_multiset;

    /// Throws validation_error when separators are empty for a token mode.
    void validate() const;
};

/// Canonical key: optional ASCII case fold, split on separator characters
/// (empty tokens dropped), sort, then join per compare_as.
std::string normalize(std::string_view value, const NormalizationPolicy& policy = {});

struct VariantMember {
    std::string value;
    std::vector<RowId> rows;  // ascending

    friend bool operator==(const VariantMember&, const VariantMember&) = default;
};

struct VariantGroup {
    std::string table;
    std::string attribute;
    std::string key;
    std::vector<VariantMember> members;  // by occurrence count desc, then value

    std::size_t occurrences() const;
    friend bool operator==(const VariantGroup&, const VariantGroup&) = default;
};

/// Distinct non-NULL values of `attribute` among `rows` that share a key
/// with at least one other distinct value. Groups are ordered by total
/// occurrence count (desc), then key.
std::vector<VariantGroup> find_variant_groups(const Table& table, std::span<const RowId> rows,
                                              std::string_view attribute,
                                              const NormalizationPolicy& policy = {});
std::vector<VariantGroup> find_variant_groups(const Table& table, std::string_view attribute,
                                              const NormalizationPolicy& policy = {});

enum class ProposalStrategy { all_members, minority_members };

std::string_view to_string(ProposalStrategy s) noexcept;
std::optional<ProposalStrategy> parse_proposal_strategy(std::string_view text) noexcept;

/// Candidate cells only; nothing is marked. minority_members skips the most
/// frequent raw value of each group (ties: lexicographically smallest value
/// is treated as the majority).
std::set<CellRef> propose_marks(std::span<const VariantGroup> groups, ProposalStrategy strategy);

}  // namespace viewclean

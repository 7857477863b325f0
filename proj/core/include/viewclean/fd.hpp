#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewclean/table.hpp"

namespace viewclean {

/// X -> Y. `lhs` keeps the written order (CFD patterns are positional) but is
/// duplicate-free and never contains `rhs`.
struct FD {
    std::vector<std::string> lhs;
    std::string rhs;

    friend bool operator==(const FD&, const FD&) = default;
};

/// Pattern entry: a constant, or nullopt for the wildcard '_'.
using PatternValue = std::optional<std::string>;

/// Each tableau row has lhs.size() + 1 entries, rhs last.
struct CFD {
    FD fd;
    std::vector<std::vector<PatternValue>> tableau;

    friend bool operator==(const CFD&, const CFD&) = default;
};

/// "A, B -> C"
FD parse_fd(std::string_view text);
/// "OP -> OC :: (KU, _), ('Kyoto Univ.', _)". Quote a value to keep commas,
/// surrounding blanks or a literal underscore.
CFD parse_cfd(std::string_view text);
std::string to_string(const FD& fd);
std::string to_string(const CFD& cfd);

/// Throws schema_error for unknown attributes, validation_error when rhs is
/// on the lhs or a tableau row has the wrong width.
void validate(const FD& fd, const Table& table);
void validate(const CFD& cfd, const Table& table);

struct RhsPartition {
    std::string value;
    std::vector<RowId> rows;  // ascending

    friend bool operator==(const RhsPartition&, const RhsPartition&) = default;
};

struct ViolationGroup {
    std::vector<std::string> lhs_values;
    std::vector<RhsPartition> partitions;  // ordered by lowest row-id
    std::optional<std::size_t> pattern;    // tableau row (CFD only)
    std::optional<std::string> expected;   // constant rhs the rows contradict (CFD only)

    friend bool operator==(const ViolationGroup&, const ViolationGroup&) = default;
};

struct ViolationReport {
    std::string dependency;
    std::string table;
    std::vector<std::string> lhs;
    std::string rhs;
    std::vector<ViolationGroup> groups;  // ordered by lowest row-id
    std::size_t rows_checked = 0;   // rows evaluated
    std::size_t not_evaluated = 0;  // rows with NULL in a dependency attribute

    bool holds() const noexcept { return groups.empty(); }
};

/// Rows with NULL in any dependency attribute are skipped and counted in
/// not_evaluated. One group per lhs class holding more than one rhs value.
ViolationReport check_fd(const Table& table, std::span<const RowId> rows, const FD& fd);
ViolationReport check_fd(const Table& table, const FD& fd);

/// All minimal FDs X -> A with 1 <= |X| <= max_lhs_size that hold exactly on
/// the rows, found by level-wise search over the attribute lattice with
/// stripped-partition refinement. Here NULL equals NULL (the rows are
/// partitioned on raw cell values). Output is sorted by (rhs, lhs) in table
/// attribute order.
std::vector<FD> discover_fds(const Table& table, std::span<const RowId> rows, std::size_t max_lhs_size);
std::vector<FD> discover_fds(const Table& table, std::size_t max_lhs_size);

struct RemovalSuggestion {
    std::vector<RowId> remove;      // ascending
    bool certified_optimal = true;  // exact for one dependency only
};

/// Rows whose removal makes every dependency hold. A single FD is solved
/// exactly by keeping, per lhs class, the largest rhs partition; on a tie the
/// partition holding the lowest row-id is removed. Several FDs iterate that
/// rule to a fixpoint, and the result is then not certified optimal.
RemovalSuggestion minimal_removal(const Table& table, std::span<const RowId> rows, std::span<const FD> fds);

ViolationReport check_cfd(const Table& table, std::span<const RowId> rows, const CFD& cfd);
ViolationReport check_cfd(const Table& table, const CFD& cfd);

/// Candidate marks: rhs cells of violating rows. For FD-style groups only the
/// minority partitions are returned, or every partition when the largest
/// size is shared. Groups with an `expected` constant mark all their rows.
std::set<CellRef> violations_to_marks(const ViolationReport& report);

}  // namespace viewclean

#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "viewclean/error.hpp"
#include "viewclean/ids.hpp"

namespace viewclean {

/// A cell is an exact string or NULL. Nothing is trimmed, case-folded or
/// parsed numerically.
using CellValue = std::optional<std::string>;

struct Row {
    RowId id;
    std::vector<CellValue> values;  // one slot per table attribute, same order

    friend bool operator==(const Row&, const Row&) = default;
};

struct CellRef {
    std::string table;
    RowId row;
    std::string attribute;

    friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

std::string describe(const CellRef& cell);

class Table {
public:
    Table() = default;
    Table(std::string name, std::vector<std::string> attributes,
          std::optional<std::string> id_attribute = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& attributes() const noexcept { return attributes_; }
    const std::optional<std::string>& id_attribute() const noexcept { return id_attribute_; }
    const std::map<RowId, Row>& rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    RowId next_row_id() const noexcept { return next_row_id_; }

    std::optional<std::size_t> attribute_index(std::string_view attribute) const;
    /// Throws `Error{code}` naming the attribute when it does not exist.
    std::size_t require_attribute(std::string_view attribute,
                                  ErrorCode code = ErrorCode::schema) const;

    const Row* find(RowId id) const;
    const Row& row(RowId id) const;  // throws not_found
    const CellValue& value(RowId id, std::size_t attribute) const;
    bool resolves(const CellRef& cell) const;

    /// Appends a row. Ids must be fresh; the generator advances past them so
    /// ids are never reused.
    void insert(Row row);
    RowId allocate_row_id();
    void set_value(RowId id, std::size_t attribute, CellValue value);

    std::vector<RowId> row_ids() const;

    friend bool operator==(const Table&, const Table&) = default;

private:
    std::string name_;
    std::vector<std::string> attributes_;
    std::optional<std::string> id_attribute_;
    std::map<RowId, Row> rows_;
    RowId next_row_id_{1};
};

struct CsvOptions {
    bool has_header = true;
    std::optional<std::string> id_attribute;
};

/// RFC 4180 reader. Unquoted empty fields become NULL; a quoted empty field
/// ("") stays an empty string. Accepts LF or CRLF record terminators.
Table load_csv(std::istream& in, std::string name, const CsvOptions& options = {});
Table load_csv_text(std::string_view text, std::string name, const CsvOptions& options = {});

/// Writes header plus rows in ascending row-id order. NULL is written as an
/// empty unquoted field, the empty string as "".
void write_csv(std::ostream& out, const Table& table);
std::string to_csv(const Table& table);

/// Raw record splitter shared by the loader; exposed for tests.
using CsvRecord = std::vector<CellValue>;
std::vector<CsvRecord> parse_csv(std::string_view text);

}  // namespace viewclean

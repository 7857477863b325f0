#include "viewclean/table.hpp"

#include <charconv>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

namespace viewclean {

std::string describe(const CellRef& cell) {
    std::ostringstream os;
    os << cell.table << "[" << cell.row << "]." << cell.attribute;
    return os.str();
}

Table::Table(std::string name, std::vector<std::string> attributes,
             std::optional<std::string> id_attribute)
    : name_(std::move(name)), attributes_(std::move(attributes)),
      id_attribute_(std::move(id_attribute)) {
    std::set<std::string_view> seen;
    for (const auto& a : attributes_) {
        if (!seen.insert(a).second) {
            throw Error(ErrorCode::ingest, "duplicate attribute name '" + a + "'",
                        {{"attribute", a}});
        }
    }
    if (id_attribute_ && !attribute_index(*id_attribute_)) {
        throw Error(ErrorCode::ingest, "id attribute '" + *id_attribute_ + "' is not a column",
                    {{"attribute", *id_attribute_}});
    }
}

std::optional<std::size_t> Table::attribute_index(std::string_view attribute) const {
    for (std::size_t i = 0; i < attributes_.size(); ++i) {
        if (attributes_[i] == attribute) return i;
    }
    return std::nullopt;
}

std::size_t Table::require_attribute(std::string_view attribute, ErrorCode code) const {
    if (auto idx = attribute_index(attribute)) return *idx;
    throw Error(code, "unknown attribute '" + std::string(attribute) + "' in table '" + name_ + "'",
                {{"attribute", attribute}, {"table", name_}});
}

const Row* Table::find(RowId id) const {
    auto it = rows_.find(id);
    return it == rows_.end() ? nullptr : &it->second;
}

const Row& Table::row(RowId id) const {
    if (const Row* r = find(id)) return *r;
    std::ostringstream os;
    os << "row " << id << " not found in table '" << name_ << "'";
    throw Error(ErrorCode::not_found, os.str(), {{"row", id.value()}, {"table", name_}});
}

const CellValue& Table::value(RowId id, std::size_t attribute) const {
    return row(id).values.at(attribute);
}

bool Table::resolves(const CellRef& cell) const {
    return cell.table == name_ && find(cell.row) != nullptr && attribute_index(cell.attribute);
}

void Table::insert(Row row) {
    if (row.values.size() != attributes_.size()) {
        throw Error(ErrorCode::validation, "row arity does not match table schema");
    }
    if (rows_.contains(row.id)) {
        std::ostringstream os;
        os << "duplicate row id " << row.id;
        throw Error(ErrorCode::ingest, os.str(), {{"row", row.id.value()}});
    }
    if (row.id >= next_row_id_) next_row_id_ = RowId(row.id.value() + 1);
    rows_.emplace(row.id, std::move(row));
}

RowId Table::allocate_row_id() {
    RowId id = next_row_id_;
    next_row_id_ = RowId(id.value() + 1);
    return id;
}

void Table::set_value(RowId id, std::size_t attribute, CellValue value) {
    auto it = rows_.find(id);
    if (it == rows_.end()) row(id);  // throws not_found
    it->second.values.at(attribute) = std::move(value);
}

std::vector<RowId> Table::row_ids() const {
    std::vector<RowId> ids;
    ids.reserve(rows_.size());
    for (const auto& [id, _] : rows_) ids.push_back(id);
    return ids;
}

namespace {

struct LocatedRecord {
    std::size_t line;
    CsvRecord fields;
};

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
    throw Error(ErrorCode::parse, "CSV line " + std::to_string(line) + ": " + what,
                {{"line", line}});
}

std::vector<LocatedRecord> split_records(std::string_view text) {
    std::vector<LocatedRecord> records;
    if (text.empty()) return records;

    std::size_t line = 1;
    std::size_t i = 0;
    const std::size_t n = text.size();

    while (i < n) {
        LocatedRecord rec{line, {}};
        while (true) {
            CellValue field;
            if (i < n && text[i] == '"') {
                std::string buf;
                ++i;
                while (true) {
                    if (i >= n) csv_error(rec.line, "unterminated quoted field");
                    char c = text[i];
                    if (c == '"') {
                        if (i + 1 < n && text[i + 1] == '"') {
                            buf.push_back('"');
                            i += 2;
                            continue;
                        }
                        ++i;
                        break;
                    }
                    if (c == '\n') ++line;
                    buf.push_back(c);
                    ++i;
                }
                if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    csv_error(line, "unexpected character after closing quote");
                }
                field = std::move(buf);
            } else {
                std::size_t start = i;
                while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                    if (text[i] == '"') csv_error(line, "quote inside unquoted field");
                    ++i;
                }
                if (i > start) field = std::string(text.substr(start, i - start));
            }
            rec.fields.push_back(std::move(field));

            if (i >= n) break;
            if (text[i] == ',') {
                ++i;
                continue;
            }
            if (text[i] == '\r') {
                if (i + 1 < n && text[i + 1] == '\n') {
                    ++i;
                } else {
                    csv_error(line, "bare carriage return");
                }
            }
            ++i;  // '\n'
            ++line;
            break;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::optional<RowId> parse_row_id(const std::string& s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return RowId(v);
}

bool needs_quotes(const std::string& s) {
    return s.empty() || s.find_first_of(",\"\r\n") != std::string::npos;
}

void write_field(std::ostream& out, const CellValue& v) {
    if (!v) return;
    if (!needs_quotes(*v)) {
        out << *v;
        return;
    }
    out << '"';
    for (char c : *v) {
        if (c == '"') out << '"';
        out << c;
    }
    out << '"';
}

}  // namespace

std::vector<CsvRecord> parse_csv(std::string_view text) {
    std::vector<CsvRecord> out;
    for (auto& rec : split_records(text)) out.push_back(std::move(rec.fields));
    return out;
}

Table load_csv_text(std::string_view text, std::string name, const CsvOptions& options) {
    if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
    auto records = split_records(text);

    std::vector<std::string> attributes;
    std::size_t first_data = 0;
    if (options.has_header) {
        if (records.empty()) throw Error(ErrorCode::parse, "CSV has no header record", {{"line", 1}});
        for (const auto& f : records.front().fields) {
            if (!f || f->empty()) csv_error(1, "empty attribute name in header");
            attributes.push_back(*f);
        }
        first_data = 1;
    } else if (!records.empty()) {
        for (std::size_t i = 0; i < records.front().fields.size(); ++i) {
            attributes.push_back("c" + std::to_string(i + 1));
        }
    }

    Table table(std::move(name), std::move(attributes), options.id_attribute);
    std::optional<std::size_t> id_index;
    if (options.id_attribute) id_index = table.attribute_index(*options.id_attribute);

    for (std::size_t r = first_data; r < records.size(); ++r) {
        auto& rec = records[r];
        if (rec.fields.size() != table.attributes().size()) {
            csv_error(rec.line, "expected " + std::to_string(table.attributes().size()) +
                                    " fields, found " + std::to_string(rec.fields.size()));
        }
        Row row;
        if (id_index) {
            const CellValue& raw = rec.fields[*id_index];
            auto id = raw ? parse_row_id(*raw) : std::nullopt;
            if (!id) {
                throw Error(ErrorCode::ingest,
                            "line " + std::to_string(rec.line) + ": id value '" + raw.value_or("") +
                                "' is not an integer",
                            {{"line", rec.line}, {"value", raw.value_or("")}});
            }
            if (table.find(*id)) {
                throw Error(ErrorCode::ingest,
                            "line " + std::to_string(rec.line) + ": duplicate id '" + *raw + "'",
                            {{"line", rec.line}, {"duplicate", *raw}});
            }
            row.id = *id;
        } else {
            row.id = table.allocate_row_id();
        }
        row.values = std::move(rec.fields);
        table.insert(std::move(row));
    }
    return table;
}

Table load_csv(std::istream& in, std::string name, const CsvOptions& options) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return load_csv_text(text, std::move(name), options);
}

void write_csv(std::ostream& out, const Table& table) {
    const auto& attrs = table.attributes();
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (i) out << ',';
        write_field(out, attrs[i]);
    }
    out << "\r\n";
    for (const auto& [id, row] : table.rows()) {
        for (std::size_t i = 0; i < row.values.size(); ++i) {
            if (i) out << ',';
            write_field(out, row.values[i]);
        }
        out << "\r\n";
    }
}

std::string to_csv(const Table& table) {
    std::ostringstream os;
    write_csv(os, table);
    return os.str();
}

}  // namespace viewclean

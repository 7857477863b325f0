#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "viewclean/session.hpp"

namespace viewclean {

using json = nlohmann::ordered_json;

// Wire shapes. Decoders throw nlohmann::json::exception on structural
// mismatch and viewclean::Error(validation) on bad enum text; callers at the
// API / restore boundary translate both.

json cell_value_json(const CellValue& v);
CellValue cell_value_from(const json& j);

json to_json(const Table& table);
Table table_from(const json& j);

json to_json(const CellRef& cell);
CellRef cell_ref_from(const json& j, std::string_view default_table = {});

json to_json(const ConditionAtom& atom);
ConditionAtom atom_from(const json& j);
json to_json(const ViewCondition& condition);  // {"atoms":[...]}
ViewCondition condition_from(const json& j);
std::vector<ConditionAtom> atoms_from(const json& array);

json to_json(const MarkSet& marks);
MarkSet mark_set_from(const json& j);

json to_json(const ViewDef& view);
ViewDef view_from(const json& j);

json to_json(const AuditEntry& entry);
AuditEntry audit_entry_from(const json& j);

json to_json(const ChangeRecord& record);
ChangeRecord change_record_from(const json& j);

/// One JSON document holding the full session plus its changelog and a
/// content digest. restore() rejects truncated or tampered input and never
/// returns a partially built session.
std::string snapshot(const Session& session);
Session restore(std::string_view document, Session::Clock clock = {});

/// JSON-lines, one {seq, kind, payload, timestamp} record per line.
std::string changelog_jsonl(const std::vector<ChangeRecord>& records);
std::vector<ChangeRecord> parse_changelog_jsonl(std::string_view text);

}  // namespace viewclean

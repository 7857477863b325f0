#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "viewclean/condition.hpp"
#include "viewclean/table.hpp"

namespace viewclean {

enum class MarkOrigin { manual, variant_detector, fd_violation };

struct MarkSet {
    MarkSetId id;
    std::optional<std::string> label;
    std::set<CellRef> cells;
    std::string created_at;
    MarkOrigin origin = MarkOrigin::manual;

    friend bool operator==(const MarkSet&, const MarkSet&) = default;
};

enum class Derivation { root, refine, relax, from_marks };

struct ViewDef {
    ViewId id;
    std::string table;
    ViewCondition condition;
    std::optional<ViewId> parent;
    Derivation derivation = Derivation::root;
    std::optional<MarkSetId> source_marks;  // set for from_marks views
    std::string created_at;

    friend bool operator==(const ViewDef&, const ViewDef&) = default;
};

struct CellChange {
    RowId row;
    std::string attribute;
    CellValue old_value;
    CellValue new_value;

    friend bool operator==(const CellChange&, const CellChange&) = default;
};

/// One correction event. Entries are never edited after being written except
/// for the `undone` flag, which is set when a compensating entry (one with
/// `undo_of`) is appended.
struct AuditEntry {
    AuditId id;
    ViewId view;
    std::string table;
    std::string actor;
    std::string timestamp;
    std::vector<CellChange> changes;
    bool undone = false;
    std::optional<AuditId> undo_of;

    friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

enum class ChangeKind { ingest, mark, unmark, view, correction, undo };

struct ChangeRecord {
    std::int64_t seq = 0;
    ChangeKind kind = ChangeKind::ingest;
    nlohmann::ordered_json payload;
    std::string timestamp;

    friend bool operator==(const ChangeRecord&, const ChangeRecord&) = default;
};

std::string_view to_string(MarkOrigin origin) noexcept;
std::optional<MarkOrigin> parse_mark_origin(std::string_view text) noexcept;
std::string_view to_string(Derivation derivation) noexcept;
std::optional<Derivation> parse_derivation(std::string_view text) noexcept;
std::string_view to_string(ChangeKind kind) noexcept;
std::optional<ChangeKind> parse_change_kind(std::string_view text) noexcept;

/// All state of one cleaning session: tables, mark sets, views, audit log and
/// the changelog that produced them.
///
/// Every mutation is expressed as a ChangeRecord and goes through commit(),
/// so the changelog replayed over an empty session reproduces the current
/// state exactly. Operations validate fully before committing; a thrown
/// Error leaves the session untouched.
///
/// Not synchronized. Callers sharing a session across threads must serialize
/// writers (see api::Service).
class Session {
public:
    using Clock = std::function<std::chrono::system_clock::time_point()>;

    explicit Session(std::string id = "s1", Clock clock = {});

    const std::string& id() const noexcept { return id_; }
    const std::string& created_at() const noexcept { return created_at_; }

    const std::map<std::string, Table, std::less<>>& tables() const noexcept { return tables_; }
    const Table& table(std::string_view name) const;
    const std::map<MarkSetId, MarkSet>& mark_sets() const noexcept { return marks_; }
    const MarkSet& mark_set(MarkSetId id) const;
    const std::map<ViewId, ViewDef>& views() const noexcept { return views_; }
    const ViewDef& view(ViewId id) const;
    const std::vector<AuditEntry>& audit() const noexcept { return audit_; }
    const AuditEntry& audit_entry(AuditId id) const;
    const std::vector<ChangeRecord>& changelog() const noexcept { return changelog_; }

    std::string now() const;
    void set_clock(Clock clock);

    MarkSetId next_mark_set_id() const;
    ViewId next_view_id() const;
    AuditId next_audit_id() const;

    /// Applies and appends one mutation. Payload shapes per kind:
    ///   ingest      {"table": <table>}
    ///   mark        {"mark_set": <mark set>}          (create or replace)
    ///   unmark      {"mark_set": id, "cells": [...]}
    ///   view        {"view": <view>}
    ///   correction  {"entry": <audit entry>}
    ///   undo        {"entry": <audit entry with undo_of>}
    const ChangeRecord& commit(ChangeKind kind, nlohmann::ordered_json payload);

    /// Rebuilds a session from its changelog. Throws restore_error when a
    /// record cannot be applied.
    static Session replay(std::string id, std::string created_at,
                          const std::vector<ChangeRecord>& records, Clock clock = {});

    /// Used by restore(): installs already-validated state wholesale.
    struct State {
        std::string id;
        std::string created_at;
        std::vector<Table> tables;
        std::vector<MarkSet> mark_sets;
        std::vector<ViewDef> views;
        std::vector<AuditEntry> audit;
        std::vector<ChangeRecord> changelog;
    };
    static Session from_state(State state, Clock clock = {});

    friend bool operator==(const Session& a, const Session& b);

private:
    void apply(const ChangeRecord& record);

    std::string id_;
    std::string created_at_;
    Clock clock_;
    std::map<std::string, Table, std::less<>> tables_;
    std::map<MarkSetId, MarkSet> marks_;
    std::map<ViewId, ViewDef> views_;
    std::vector<AuditEntry> audit_;
    std::vector<ChangeRecord> changelog_;
};

/// Adds a loaded table to the session (one ingest record).
const Table& add_table(Session& session, Table table);

}  // namespace viewclean

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace niffler {

// ---------- references ----------

struct TableRef {
  std::uint64_t id = 0;  // stable hash of the path relative to the collection root
  std::string name;      // file stem, display only

  friend bool operator==(const TableRef& a, const TableRef& b) { return a.id == b.id; }
  friend bool operator!=(const TableRef& a, const TableRef& b) { return !(a == b); }
  friend bool operator<(const TableRef& a, const TableRef& b) {
    if (a.name != b.name) return a.name < b.name;
    return a.id < b.id;
  }
};

struct ColumnRef {
  TableRef table;
  std::uint32_t column_index = 0;
  std::optional<std::string> header;  // not part of identity

  friend bool operator==(const ColumnRef& a, const ColumnRef& b) {
    return a.table.id == b.table.id && a.column_index == b.column_index;
  }
  friend bool operator!=(const ColumnRef& a, const ColumnRef& b) { return !(a == b); }
  friend bool operator<(const ColumnRef& a, const ColumnRef& b) {
    if (a.table != b.table) return a.table < b.table;
    return a.column_index < b.column_index;
  }
};

// Canonical display form, also the tie-break key for every "lexicographic on
// refs" ordering in the system.
std::string to_string(const TableRef& t);
std::string to_string(const ColumnRef& c);

// ---------- tables ----------

extern const std::vector<std::string> kDefaultNullTokens;  // "", "null", "na", "n/a"

struct Table {
  TableRef ref;
  std::string rel_path;  // relative to the collection root, '/' separators
  std::string source;    // provenance label
  std::vector<std::optional<std::string>> headers;             // length m >= 1
  std::vector<std::vector<std::optional<std::string>>> rows;   // each padded to m
  std::vector<std::string> null_tokens = kDefaultNullTokens;   // effective at load time

  std::size_t arity() const { return headers.size(); }
};

struct PathlessCollection {
  std::string root;  // absolute path when loaded from disk, empty for synthetic
  std::vector<Table> tables;          // sorted by rel_path
  std::set<std::string> sources;
  std::vector<std::string> load_warnings;
  char delimiter = ',';
  bool has_header = true;
  std::vector<std::string> null_tokens = kDefaultNullTokens;

  const Table* find_table(std::uint64_t id) const;
  const Table* find_table(const TableRef& ref) const { return find_table(ref.id); }
};

struct LoadOptions {
  char delimiter = ',';
  bool has_header = true;
  std::vector<std::string> null_tokens = kDefaultNullTokens;
};

// ---------- profiles ----------

enum class TypeTag { numeric_as_text, categorical, textual };

std::string_view to_string(TypeTag tag);
std::optional<TypeTag> type_tag_from_string(std::string_view s);

struct ColumnProfile {
  ColumnRef column;
  std::vector<std::string> value_set;  // normalized, non-null, sorted unique
  std::size_t distinct_count = 0;
  std::size_t total_count = 0;         // rows including nulls
  double uniqueness = 0.0;             // distinct_count / max(total_count, 1)
  TypeTag type_tag = TypeTag::textual;

  bool contains(std::string_view value) const;
};

// ---------- operations ----------

// Trims, casefolds to lowercase, collapses internal whitespace runs to one
// space; returns nullopt for null tokens (checked after normalization).
// Idempotent.
std::optional<std::string> normalize_cell(std::string_view raw);
std::optional<std::string> normalize_cell(std::string_view raw,
                                          const std::vector<std::string>& null_tokens);

// Loads every regular file under root (recursively, sorted by relative path).
// Unreadable or malformed files produce a warning and are skipped; a root with
// no loadable table throws std::runtime_error("empty collection").
PathlessCollection load_collection(const std::string& root, const LoadOptions& options = {});

ColumnProfile profile_column(const Table& table, std::uint32_t column_index);

ColumnRef make_column_ref(const Table& table, std::uint32_t column_index);

// Table id as used by load_collection: stable hash of the root-relative path.
std::uint64_t table_id_for_path(std::string_view rel_path);

// Synthetic-table helper for the workload generator and tests: cells equal to
// a null token are stored as missing.
Table make_table(const std::string& name, std::vector<std::optional<std::string>> headers,
                 std::vector<std::vector<std::optional<std::string>>> rows);

}  // namespace niffler

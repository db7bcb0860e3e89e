#include "niffler/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include "niffler/csv.hpp"
#include "niffler/hash.hpp"

namespace fs = std::filesystem;

namespace niffler {

const std::vector<std::string> kDefaultNullTokens = {"", "null", "na", "n/a"};

std::string to_string(const TableRef& t) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(t.id));
  return t.name + "#" + buf;
}

std::string to_string(const ColumnRef& c) {
  return to_string(c.table) + "[" + std::to_string(c.column_index) + "]";
}

const Table* PathlessCollection::find_table(std::uint64_t id) const {
  for (const auto& t : tables) {
    if (t.ref.id == id) return &t;
  }
  return nullptr;
}

std::string_view to_string(TypeTag tag) {
  switch (tag) {
    case TypeTag::numeric_as_text: return "numeric-as-text";
    case TypeTag::categorical: return "categorical";
    case TypeTag::textual: return "textual";
  }
  return "textual";
}

std::optional<TypeTag> type_tag_from_string(std::string_view s) {
  if (s == "numeric-as-text") return TypeTag::numeric_as_text;
  if (s == "categorical") return TypeTag::categorical;
  if (s == "textual") return TypeTag::textual;
  return std::nullopt;
}

bool ColumnProfile::contains(std::string_view value) const {
  return std::binary_search(value_set.begin(), value_set.end(), value);
}

// ---------- normalization ----------

namespace {

std::string fold_and_collapse(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      if (!out.empty()) pending_space = true;  // leading whitespace dropped
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(c));
  }
  return out;  // trailing whitespace never emitted
}

bool parses_as_number(const std::string& v) {
  const char* begin = v.c_str();
  char* end = nullptr;
  errno = 0;
  std::strtod(begin, &end);
  return end != begin && *end == '\0' && errno != ERANGE;
}

}  // namespace

std::optional<std::string> normalize_cell(std::string_view raw) {
  return normalize_cell(raw, kDefaultNullTokens);
}

std::optional<std::string> normalize_cell(std::string_view raw,
                                          const std::vector<std::string>& null_tokens) {
  std::string folded = fold_and_collapse(raw);
  if (folded.empty()) return std::nullopt;
  for (const auto& tok : null_tokens) {
    if (folded == fold_and_collapse(tok)) return std::nullopt;
  }
  return folded;
}

// ---------- loading ----------

std::uint64_t table_id_for_path(std::string_view rel_path) { return fnv1a64(rel_path); }

namespace {

Table table_from_cells(std::vector<std::vector<std::string>> cells, const std::string& rel_path,
                       const std::string& name, const LoadOptions& options) {
  Table t;
  t.ref.id = table_id_for_path(rel_path);
  t.ref.name = name;
  t.rel_path = rel_path;
  t.source = rel_path;

  std::size_t arity = cells.front().size();
  if (options.has_header) {
    for (auto& h : cells.front()) {
      auto norm = normalize_cell(h, options.null_tokens);
      t.headers.push_back(norm ? std::optional<std::string>(h) : std::nullopt);
    }
    cells.erase(cells.begin());
  } else {
    t.headers.assign(arity, std::nullopt);
  }

  t.rows.reserve(cells.size());
  for (auto& raw_row : cells) {
    std::vector<std::optional<std::string>> row;
    row.reserve(arity);
    for (std::size_t i = 0; i < arity; ++i) {
      if (i < raw_row.size()) {
        row.emplace_back(std::move(raw_row[i]));
      } else {
        row.emplace_back(std::nullopt);  // short row padded
      }
    }
    t.rows.push_back(std::move(row));  // long row truncated to declared arity
  }
  t.null_tokens = options.null_tokens;
  return t;
}

}  // namespace

PathlessCollection load_collection(const std::string& root, const LoadOptions& options) {
  PathlessCollection col;
  col.root = fs::absolute(root).generic_string();
  col.delimiter = options.delimiter;
  col.has_header = options.has_header;
  col.null_tokens = options.null_tokens;

  if (!fs::is_directory(root)) throw std::runtime_error("empty collection");

  std::vector<std::string> rel_paths;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::string rel = fs::relative(entry.path(), root).generic_string();
    if (!rel.empty() && fs::path(rel).filename().string().front() == '.') continue;
    rel_paths.push_back(std::move(rel));
  }
  std::sort(rel_paths.begin(), rel_paths.end());

  for (const auto& rel : rel_paths) {
    std::string full = (fs::path(root) / rel).string();
    std::vector<std::vector<std::string>> cells;
    try {
      cells = parse_delimited_file(full, options.delimiter);
    } catch (const std::exception& e) {
      col.load_warnings.push_back("skipped " + rel + ": " + e.what());
      continue;
    }
    if (cells.empty() || cells.front().empty()) {
      col.load_warnings.push_back("skipped " + rel + ": no parsable rows");
      continue;
    }
    Table t = table_from_cells(std::move(cells), rel, fs::path(rel).stem().string(), options);
    if (col.find_table(t.ref.id) != nullptr) {
      col.load_warnings.push_back("skipped " + rel + ": table id collision");
      continue;
    }
    col.sources.insert(t.source);
    col.tables.push_back(std::move(t));
  }

  if (col.tables.empty()) throw std::runtime_error("empty collection");
  return col;
}

// ---------- profiling ----------

ColumnRef make_column_ref(const Table& table, std::uint32_t column_index) {
  ColumnRef ref;
  ref.table = table.ref;
  ref.column_index = column_index;
  if (column_index < table.headers.size()) ref.header = table.headers[column_index];
  return ref;
}

ColumnProfile profile_column(const Table& table, std::uint32_t column_index) {
  if (column_index >= table.arity()) throw std::out_of_range("column index out of range");
  ColumnProfile p;
  p.column = make_column_ref(table, column_index);
  p.total_count = table.rows.size();

  std::size_t non_null = 0;
  std::size_t numeric = 0;
  for (const auto& row : table.rows) {
    const auto& cell = row[column_index];
    if (!cell) continue;
    auto norm = normalize_cell(*cell, table.null_tokens);
    if (!norm) continue;
    ++non_null;
    if (parses_as_number(*norm)) ++numeric;
    p.value_set.push_back(std::move(*norm));
  }
  std::sort(p.value_set.begin(), p.value_set.end());
  p.value_set.erase(std::unique(p.value_set.begin(), p.value_set.end()), p.value_set.end());
  p.distinct_count = p.value_set.size();
  p.uniqueness = static_cast<double>(p.distinct_count) /
                 static_cast<double>(std::max<std::size_t>(p.total_count, 1));

  double categorical_cap =
      std::max(10.0, 0.01 * static_cast<double>(p.total_count));
  if (non_null > 0 && static_cast<double>(numeric) >= 0.9 * static_cast<double>(non_null)) {
    p.type_tag = TypeTag::numeric_as_text;
  } else if (static_cast<double>(p.distinct_count) <= categorical_cap) {
    p.type_tag = TypeTag::categorical;
  } else {
    p.type_tag = TypeTag::textual;
  }
  return p;
}

Table make_table(const std::string& name, std::vector<std::optional<std::string>> headers,
                 std::vector<std::vector<std::optional<std::string>>> rows) {
  Table t;
  t.rel_path = name + ".csv";
  t.ref.id = table_id_for_path(t.rel_path);
  t.ref.name = name;
  t.source = t.rel_path;
  t.headers = std::move(headers);
  for (auto& row : rows) {
    row.resize(t.headers.size());
    for (auto& cell : row) {
      if (cell && !normalize_cell(*cell, t.null_tokens)) cell = std::nullopt;
    }
  }
  t.rows = std::move(rows);
  return t;
}

}  // namespace niffler

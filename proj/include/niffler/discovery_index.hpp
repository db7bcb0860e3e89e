#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "niffler/corpus.hpp"

namespace niffler {

enum class EdgeKind { inclusion_dependency, content_similarity };

// Directed: weight is |src ∩ dst| / |src| for inclusion dependencies and the
// (symmetric) Jaccard similarity for content similarity. Both qualifying
// directions are stored separately.
struct ColumnEdge {
  ColumnRef src;
  ColumnRef dst;
  EdgeKind kind = EdgeKind::inclusion_dependency;
  double weight = 0.0;
};

struct JoinHop {
  ColumnRef left;
  ColumnRef right;
  double weight = 0.0;  // max of the two directed containments
};

// Consecutive hops chain through shared tables: hops[i].right.table ==
// hops[i+1].left.table (the two columns need not be equal). tables_touched is
// ordered from the first table to the last.
struct JoinPath {
  std::vector<JoinHop> hops;
  std::vector<TableRef> tables_touched;

  double min_weight() const;
  std::string canonical_key() const;
};

enum class SearchTarget { attribute, content, both };

class DiscoveryIndex {
 public:
  // threshold must lie in (0, 1]; throws std::invalid_argument otherwise.
  // Columns with fewer than 2 distinct values emit no edges.
  static DiscoveryIndex build(const PathlessCollection& collection, double threshold);

  double build_threshold() const { return threshold_; }
  const std::vector<ColumnProfile>& profiles() const { return profiles_; }
  const ColumnProfile* profile(const ColumnRef& col) const;
  const std::vector<ColumnEdge>& edges() const { return edges_; }
  const std::vector<TableRef>& tables() const { return table_refs_; }

  // Exact mode matches the normalized term against value sets (content) and/or
  // header tokens (attribute); fuzzy mode additionally admits entries within
  // the given Levenshtein distance. A term that normalizes to null yields an
  // empty result plus a warning.
  std::vector<ColumnRef> search_keyword(std::string_view term, SearchTarget target,
                                        std::optional<int> fuzzy = std::nullopt,
                                        std::vector<std::string>* warnings = nullptr) const;

  // Inclusion-dependency neighbors at the given threshold, weight = max of the
  // two directed containments. threshold below the build threshold throws
  // std::invalid_argument("threshold below index resolution").
  std::vector<std::pair<ColumnRef, double>> neighbors(const ColumnRef& col,
                                                      double threshold) const;

  // All simple paths of at most max_hops inclusion-dependency edges between
  // distinct tables, ordered by descending min edge weight, then fewer hops,
  // then lexicographic on refs. t1 == t2 throws
  // std::invalid_argument("self-join paths not supported").
  std::vector<JoinPath> generate_join_paths(const TableRef& t1, const TableRef& t2,
                                            int max_hops = 2) const;

  // Round-trips through a versioned JSON file; the root path and load options
  // are recorded so the collection can be reloaded next to the index.
  void save(const std::string& path) const;
  static DiscoveryIndex load(const std::string& path);

  const std::string& collection_root() const { return root_; }
  LoadOptions collection_options() const;

  // Reloads the collection recorded at build time and verifies the table
  // catalog still matches; throws std::runtime_error on drift.
  PathlessCollection reload_collection() const;

 private:
  struct TableMeta {
    TableRef ref;
    std::string rel_path;
    std::uint32_t arity = 0;
  };

  int column_id(const ColumnRef& col) const;  // -1 when unknown

  double threshold_ = 0.8;
  std::string root_;
  char delimiter_ = ',';
  bool has_header_ = true;
  std::vector<std::string> null_tokens_ = kDefaultNullTokens;

  std::vector<TableMeta> table_meta_;
  std::vector<TableRef> table_refs_;
  std::vector<ColumnProfile> profiles_;            // dense column ids
  std::map<std::pair<std::uint64_t, std::uint32_t>, int> column_ids_;
  std::map<std::string, std::vector<int>> value_postings_;
  std::map<std::string, std::vector<int>> name_postings_;
  std::vector<ColumnEdge> edges_;

  // Derived lookups, rebuilt after build/load.
  std::map<std::uint64_t, std::vector<int>> table_cols_;
  std::vector<std::vector<std::pair<int, double>>> incl_adj_;  // undirected, max weight

  void rebuild_lookups();
  void build_edges();
};

DiscoveryIndex build_index(const PathlessCollection& collection, double threshold = 0.8);

// Exposed for tests: edit distance used by fuzzy search.
int levenshtein_distance(std::string_view a, std::string_view b);

// Header tokens. The full normalized header is always included alongside its
// alphanumeric fragments, so "facility name" is found by "facility", "name"
// and "facility name".
std::vector<std::string> header_tokens(std::string_view header);

}  // namespace niffler

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "niffler/discovery_index.hpp"

namespace niffler {

// One query attribute: a name (display only) and its example values,
// normalized and deduplicated on ingestion with first-seen order kept.
struct QueryColumn {
  std::string name;
  std::vector<std::string> examples;
};

struct ExampleQuery {
  std::vector<QueryColumn> columns;

  std::size_t width() const { return columns.size(); }   // τ
  std::size_t depth() const;                             // l = max examples per column
};

ExampleQuery make_query(std::vector<std::pair<std::string, std::vector<std::string>>> columns);

// Accepts .json ({"columns":[{"name":...,"examples":[...]}]}) or delimited
// text (header row of attribute names, one example per cell; blank cells
// skipped). A column with no usable example throws std::invalid_argument.
ExampleQuery load_query_file(const std::string& path, char delimiter = ',');

struct ColumnCluster {
  std::vector<ColumnRef> members;   // sorted; may include non-seed neighbors
  ColumnRef representative;         // member attaining the score, ties lexicographic
  int score = 0;                    // max member overlap with the attribute's examples
};

enum class SelectionStrategy { cluster_top, select_all, select_best };

std::string_view to_string(SelectionStrategy s);
std::optional<SelectionStrategy> strategy_from_string(std::string_view s);

// Candidate columns for one query attribute.
struct CandidateSet {
  SelectionStrategy strategy = SelectionStrategy::cluster_top;
  std::vector<ColumnRef> columns;       // sorted
  std::map<ColumnRef, int> overlap;     // per candidate, distinct examples matched
  std::vector<ColumnCluster> clusters;  // the clustering that produced the set
  std::optional<std::string> warning;

  bool empty() const { return columns.empty(); }
};

// Seeds with exact content search over the examples, clusters seeds together
// with their direct containment neighbors at cluster_threshold (intersecting
// clusters merge), scores each cluster by its best member overlap and keeps
// the union of the top-theta clusters; ties at the boundary are all included.
// Only seed columns enter the candidate set. No seed at all yields an empty
// set with warning "ill-specified query column".
CandidateSet column_selection(const QueryColumn& query_col, const DiscoveryIndex& index,
                              std::size_t theta = 1,
                              std::optional<double> cluster_threshold = std::nullopt);

// Baseline: every column matching at least one example.
CandidateSet select_all(const QueryColumn& query_col, const DiscoveryIndex& index);

// Baseline: every column attaining the maximum overlap (plural on ties).
CandidateSet select_best(const QueryColumn& query_col, const DiscoveryIndex& index);

CandidateSet candidates_for(SelectionStrategy strategy, const QueryColumn& query_col,
                            const DiscoveryIndex& index, std::size_t theta,
                            std::optional<double> cluster_threshold = std::nullopt);

}  // namespace niffler

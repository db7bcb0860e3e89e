#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "niffler/selection.hpp"

namespace niffler {

struct JoinEdgeSpec {
  ColumnRef left;
  ColumnRef right;
  double weight = 0.0;

  std::string canonical_key() const;  // orientation-insensitive
};

// A joinable group: a tree over the touched tables (intermediate tables from
// multi-hop paths included) plus the ordered projection columns, one per query
// attribute. Single-table groups have no edges.
struct JoinGraph {
  std::vector<TableRef> nodes;         // sorted
  std::vector<JoinEdgeSpec> edges;     // sorted by canonical key; |edges| == |nodes| - 1
  std::vector<ColumnRef> projections;  // query-attribute order
  double score = 0.0;

  std::string canonical_key() const;
};

struct EnumerationStats {
  std::size_t combinations = 0;       // candidate combinations visited
  std::size_t candidate_groups = 0;   // distinct (table set, column set) groups
  std::size_t path_queries = 0;       // generate_join_paths invocations
  std::size_t pruned_combinations = 0;
};

// Cartesian product of per-attribute candidates; each combination becomes zero
// or more join graphs. Table pairs with no path are memoized so any other
// combination touching the pair is pruned without re-querying the index.
std::vector<JoinGraph> enumerate_join_graphs(const std::vector<CandidateSet>& candidates,
                                             const DiscoveryIndex& index, int max_hops = 2,
                                             EnumerationStats* stats = nullptr,
                                             bool use_prune_cache = true);

// Average per-edge max(uniqueness(left), uniqueness(right)), damped by
// 1 + ln(1 + ln(#tables)). Single-table graphs score exactly 1.0.
double score_join_graph(const JoinGraph& graph, const DiscoveryIndex& index);

// Assigns scores and sorts descending; ties broken by fewer tables, then by
// the lexicographic edge list.
void rank_join_graphs(std::vector<JoinGraph>& graphs, const DiscoveryIndex& index);

// Cells hold normalized values; the empty string encodes a null projection
// cell (normalized values are never empty). Rows are deduplicated and sorted;
// cardinality keeps the pre-deduplication row count.
struct MaterializedView {
  std::string id;
  std::vector<std::string> schema;               // header or synthesized name
  std::vector<std::vector<std::string>> rows;    // sorted unique
  std::size_t cardinality = 0;
  std::optional<JoinGraph> provenance;           // absent for union views
  std::vector<std::string> constituents;         // union provenance (view ids)
  int overlap = 0;                               // filled against a query

  bool is_empty() const { return rows.empty(); }
};

// Materializes the first gamma graphs in ranked order as inner equi-joins on
// normalized values (null keys never match), joining leaf tables inward.
// Views are produced in batches of batch_size when on_batch is given; empty
// views are kept. View ids are "v0", "v1", ... in ranked order.
std::vector<MaterializedView> materialize(
    const std::vector<JoinGraph>& ranked, const PathlessCollection& collection,
    std::size_t gamma = 50, std::size_t batch_size = 10,
    const std::function<void(const std::vector<MaterializedView>&)>& on_batch = {});

// Distinct query example values found in the corresponding view column,
// summed over attributes; bounded by τ * l.
int overlap_score(const MaterializedView& view, const ExampleQuery& query);

}  // namespace niffler

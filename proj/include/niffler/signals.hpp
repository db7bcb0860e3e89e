#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "niffler/join_search.hpp"

namespace niffler {

// Order-insensitive row fingerprint: per-cell hashes of (attribute position,
// normalized value) combined by sum modulo 2^64. Stable across runs.
std::uint64_t row_hash(const std::vector<std::string>& row);

// Sum of row hashes over the deduplicated row set, modulo 2^64.
std::uint64_t view_hash(const MaterializedView& view);

// Relations are asserted only between views with identical output schemas
// (attribute lists compared in order). Views in a group are handled in input
// order; the representative of a compatible group is the member with the
// largest pre-dedup cardinality, ties broken by input position.
struct CompatibleGroup {
  std::vector<std::string> view_ids;
  std::string representative;
};

struct ContainedPair {
  std::string container;
  std::string containee;
};

// Pair complementary on one shared candidate key: no contradictions on the
// key and each view holds key values the other lacks.
struct ComplementaryRelation {
  std::vector<std::size_t> key;  // attribute positions, ascending
  std::string view_a;
  std::string view_b;
  std::vector<std::vector<std::string>> a_only_key_values;  // sorted
  std::vector<std::vector<std::string>> b_only_key_values;
};

// Pair disagreeing on at least one shared key value.
struct ContradictoryRelation {
  std::vector<std::size_t> key;
  std::string view_a;
  std::string view_b;
  std::vector<std::vector<std::string>> conflicting_key_values;  // sorted
};

struct SchemaGroup {
  std::vector<std::string> schema;
  std::vector<std::string> view_ids;                 // input order
  std::vector<CompatibleGroup> compatible_groups;    // full partition, singletons included
  std::vector<ContainedPair> contained_pairs;        // among representatives
  std::vector<ComplementaryRelation> complementary;  // candidate keys of size <= k_max
  std::vector<ContradictoryRelation> contradictory;
};

struct FourCResult {
  std::size_t k_max = 2;
  std::vector<SchemaGroup> groups;
};

// Hash-bucketed classification with cell-level verification on every hash
// match, so the result is exact. Zero-row views take part in the compatible
// and contained stages only.
FourCResult classify_4c(const std::vector<MaterializedView>& views, std::size_t k_max = 2);

// Single pass: one representative per compatible group, drop views contained
// in a surviving view, then union maximal families of views pairwise
// complementary on a common key (greedy in key order, then input order).
// Contradictory views pass through. Union views get id "u:<id>+<id>+...",
// their constituents list, and cardinality equal to the union's row count.
std::vector<MaterializedView> reduce_view_space(const FourCResult& fourc,
                                                const std::vector<MaterializedView>& views);

struct SignalSample {
  std::vector<std::string> key_value;
  std::vector<std::string> row_a;
  std::vector<std::string> row_b;
};

// One user-facing question: which of two row variants for the same key value
// is right. set_a / set_b list every view (sharing the key) carrying each
// variant, so one answer prunes the opposite side transitively.
struct ContradictorySignal {
  std::vector<std::string> schema;
  std::vector<std::size_t> key;
  std::vector<SignalSample> samples;  // at most sample_size, sorted by key value
  std::vector<std::string> set_a;     // disjoint from set_b
  std::vector<std::string> set_b;
  double discrimination = 0.0;        // 2|A||B| / (|A|+|B|)
};

// Groups contradictions by (key, key value, row-variant pair), builds the two
// view sets by scanning all same-schema views for which the key is valid,
// merges signals with identical (set_a, set_b) partitions, keeps at most
// sample_size sampled key values each, and sorts by discrimination descending
// (ties: smaller |A ∪ B|, then key, then set_a).
std::vector<ContradictorySignal> generate_contradictory_signals(
    const FourCResult& fourc, const std::vector<MaterializedView>& views,
    std::size_t sample_size = 3);

enum class SignalSide { a, b, neither };

// Picking side A removes set_b from the surviving set and vice versa;
// "neither" leaves it unchanged. Idempotent.
std::set<std::string> apply_signal_selection(const ContradictorySignal& signal, SignalSide side,
                                             const std::set<std::string>& surviving);

struct ViewMeta {
  std::string id;
  std::vector<std::string> schema;
  std::vector<std::string> tables;              // node names
  std::vector<std::pair<std::string, std::string>> join_edges;
  int overlap = 0;
  std::size_t cardinality = 0;
  std::size_t row_count = 0;
  bool empty = false;
};

struct SignalBundle {
  std::vector<std::string> query_attributes;
  std::vector<ViewMeta> views;
  FourCResult fourc;
  std::vector<ContradictorySignal> signals;
  std::vector<std::string> reduced_view_ids;
};

SignalBundle build_signal_bundle(const std::vector<MaterializedView>& views,
                                 const ExampleQuery& query, const FourCResult& fourc,
                                 const std::vector<ContradictorySignal>& signals);

nlohmann::json bundle_to_json(const SignalBundle& bundle);
SignalBundle bundle_from_json(const nlohmann::json& j);

}  // namespace niffler

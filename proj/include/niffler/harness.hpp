#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "niffler/signals.hpp"

namespace niffler {

// ---------- engine configuration ----------

struct EngineConfig {
  SelectionStrategy strategy = SelectionStrategy::cluster_top;
  std::size_t theta = 1;
  int max_hops = 2;
  std::size_t gamma = 50;
  std::size_t batch_size = 10;
  std::size_t k = 10;            // views returned to the user
  std::size_t key_max = 2;       // candidate-key size bound
  std::size_t sample_size = 3;   // sampled key values per signal
  std::size_t signal_steps = 10;
  double index_threshold = 0.8;             // used where the harness builds the index itself
  std::optional<double> cluster_threshold;  // defaults to the index build threshold
};

struct QueryResult {
  std::vector<MaterializedView> ranked_views;  // overlap desc, then join score, then id
  SignalBundle bundle;
  EnumerationStats stats;
  std::size_t join_graphs = 0;
  std::vector<std::string> diagnostics;

  std::vector<MaterializedView> top_k(std::size_t k) const;
};

// Full pipeline: per-attribute candidates, join-graph enumeration and ranking,
// materialization, overlap scoring, classification, signal generation. An
// attribute with no candidates or an empty graph set yields an empty result
// with a diagnostic.
QueryResult run_query(const PathlessCollection& collection, const DiscoveryIndex& index,
                      const ExampleQuery& query, const EngineConfig& config);

// ---------- synthetic collections ----------

// Shape of one planted ground truth: a fact table joined to tau-1 dimension
// tables on a shared key, plus per-attribute noise columns (keyless table),
// a stray table seeding the all-columns baseline but kept out of the top
// cluster, and decoy tables whose key-like column hits the join keys at a
// chosen containment.
struct CollectionSpec {
  std::size_t num_truths = 5;
  std::size_t rows_per_table = 60;
  std::size_t tau = 2;  // attributes per ground truth, >= 2
  std::vector<double> decoy_coverages = {0.85, 0.75, 0.65, 0.55};
  bool include_noise = true;
  bool include_stray = true;
  bool adversarial = false;      // noise columns cover every truth value
  double noise_coverage = 0.85;  // must stay > 0.8
  double stray_coverage = 0.7;   // must stay < 0.8
  std::size_t noise_pool = 0;    // extra non-truth values; 0 -> rows_per_table / 2
  std::uint64_t seed = 7;
};

struct GroundTruth {
  std::size_t index = 0;
  JoinGraph pj_query;
  MaterializedView view;                             // expected row set
  std::vector<ColumnRef> truth_columns;              // per attribute
  std::vector<ColumnRef> noise_columns;              // per attribute (may be empty)
  std::vector<std::string> attribute_names;          // per attribute
  std::vector<std::vector<std::string>> truth_values;  // per attribute, sorted
  std::vector<std::vector<std::string>> noise_pools;   // values in noise, not in truth
};

// Deterministic under spec.seed; throws std::runtime_error("generation error:
// ...") when the spec is infeasible or a planted invariant fails post-hoc.
std::pair<PathlessCollection, std::vector<GroundTruth>> generate_collection(
    const CollectionSpec& spec);

// Writes the collection as CSV files under dir/tables and the ground truths to
// dir/ground_truth.json; load_ground_truths reads them back.
void write_collection(const PathlessCollection& collection,
                      const std::vector<GroundTruth>& truths, const std::string& dir);
std::vector<GroundTruth> load_ground_truths(const std::string& path,
                                            const PathlessCollection& collection);

// ---------- noisy queries ----------

enum class NoiseLevel { zero, medium, high };

std::string_view to_string(NoiseLevel level);
std::optional<NoiseLevel> noise_level_from_string(std::string_view s);

// zero: l truth values; medium: ceil(2l/3) truth + floor(l/3) noise; high:
// floor(l/3) truth + ceil(2l/3) noise. Noise values come from the noise pool
// (noise-column values absent from the truth column); sampling is without
// replacement and deterministic under seed. tau_limit > 0 restricts the query
// to the first tau_limit attributes.
ExampleQuery generate_noisy_query(const GroundTruth& truth, NoiseLevel level, std::size_t l,
                                  std::uint64_t seed, std::size_t tau_limit = 0);

// True iff some candidate's row set equals the truth view's rows under a
// column permutation aligning the candidate to the query attribute order.
bool hit_predicate(const std::vector<MaterializedView>& candidates, const GroundTruth& truth,
                   std::size_t tau_limit = 0);

// ---------- signal-pruning curves ----------

// Views surviving the compatible and contained stages; signal simulation
// starts here (complementary unions would invalidate signal id references).
std::set<std::string> pruning_start_set(const FourCResult& fourc);

enum class CurvePolicy { best_case, worst_case };

// Applies the first max_steps signals in order; best case picks the side
// removing the most survivors, worst case the fewest (a side is always
// picked). curve[0] is the starting count.
std::vector<std::size_t> simulate_signal_pruning(const std::vector<ContradictorySignal>& signals,
                                                 const std::set<std::string>& start,
                                                 std::size_t max_steps, CurvePolicy policy);

// User who always defends the target view: picks the side containing it,
// abstains when it is in neither. Returns the curve and whether the target
// survived every step.
std::pair<std::vector<std::size_t>, bool> simulate_consistent_user(
    const std::vector<ContradictorySignal>& signals, const std::set<std::string>& start,
    std::size_t max_steps, const std::string& target);

// ---------- benchmark ----------

struct WorkloadSpec {
  std::size_t queries_per_truth = 5;
  std::vector<NoiseLevel> levels = {NoiseLevel::zero, NoiseLevel::medium, NoiseLevel::high};
  std::size_t l = 3;  // examples per attribute
  std::uint64_t seed = 99;
};

struct BenchRecord {
  std::size_t truth = 0;
  std::size_t query = 0;
  NoiseLevel level = NoiseLevel::zero;
  SelectionStrategy strategy = SelectionStrategy::cluster_top;
  bool hit = false;
  std::size_t candidate_groups = 0;
  std::size_t join_graphs = 0;
  std::size_t views = 0;
  std::size_t reduced_views = 0;
  std::size_t signals = 0;
  double wall_ms = 0.0;  // excluded from the deterministic report files
  std::vector<std::size_t> best_curve;
  std::vector<std::size_t> worst_curve;

  std::string query_id() const;
};

struct BenchmarkReport {
  std::vector<BenchRecord> records;

  double hit_ratio(NoiseLevel level, SelectionStrategy strategy) const;
  double total_wall_ms(SelectionStrategy strategy) const;

  // report.csv, summary.json, curves.csv plus timings.csv (the only file with
  // wall times; the first three are byte-stable under a fixed seed).
  void write_reports(const std::string& dir) const;
};

// Same generated query feeds every strategy, so per-query comparisons are
// meaningful. Query seeds derive from workload.seed, the truth index, the
// query index and the noise level.
BenchmarkReport run_benchmark(const PathlessCollection& collection, const DiscoveryIndex& index,
                              const std::vector<GroundTruth>& truths,
                              const WorkloadSpec& workload,
                              const std::vector<SelectionStrategy>& strategies,
                              const EngineConfig& base_config);

// ---------- sweeps ----------

struct SweepPoint {
  double threshold = 0.0;
  std::size_t tau = 0;
  std::size_t l = 0;
  std::size_t candidate_groups = 0;
  std::size_t join_graphs = 0;
  std::size_t views = 0;
};

// Rebuilds the index per threshold on one fixed collection; zero-noise
// queries, counts summed over the workload.
std::vector<SweepPoint> threshold_sweep(const PathlessCollection& collection,
                                        const std::vector<GroundTruth>& truths,
                                        const WorkloadSpec& workload, const EngineConfig& config,
                                        const std::vector<double>& thresholds);

// One collection generated at max(taus); queries use attribute prefixes.
std::vector<SweepPoint> columns_sweep(CollectionSpec spec, const WorkloadSpec& workload,
                                      const EngineConfig& config,
                                      const std::vector<std::size_t>& taus);

// Varies the number of examples per attribute; recorded, not asserted.
std::vector<SweepPoint> rows_sweep(const PathlessCollection& collection,
                                   const std::vector<GroundTruth>& truths,
                                   const WorkloadSpec& workload, const EngineConfig& config,
                                   const std::vector<std::size_t>& ls);

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path);

// Deterministic seed derivation used by the benchmark and query generator.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c);

}  // namespace niffler

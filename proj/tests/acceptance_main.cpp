// End-to-end acceptance checks. Each numbered check prints one PASS/FAIL line
// with its measured values; the process exits nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "niffler/harness.hpp"
#include "oracles.hpp"

using namespace niffler;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int n, const std::string& name, bool pass, const std::string& detail) {
  std::printf("%s  %2d. %-38s %s\n", pass ? "PASS" : "FAIL", n, name.c_str(), detail.c_str());
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CollectionSpec standard_spec() {
  CollectionSpec spec;  // five truths, four decoys, noise and stray tables
  spec.rows_per_table = 60;
  spec.seed = 7;
  return spec;
}

std::vector<SelectionStrategy> all_strategies() {
  return {SelectionStrategy::cluster_top, SelectionStrategy::select_all,
          SelectionStrategy::select_best};
}

struct BenchSetup {
  PathlessCollection collection;
  std::vector<GroundTruth> truths;
  DiscoveryIndex index;
  BenchmarkReport report;
  double elapsed = 0.0;
};

BenchSetup run_standard_benchmark(const CollectionSpec& spec) {
  auto start = std::chrono::steady_clock::now();
  auto [collection, truths] = generate_collection(spec);
  DiscoveryIndex index = DiscoveryIndex::build(collection, 0.8);
  WorkloadSpec workload;  // 5 queries per truth x 3 noise levels
  EngineConfig config;
  BenchmarkReport report =
      run_benchmark(collection, index, truths, workload, all_strategies(), config);
  return {std::move(collection), std::move(truths), std::move(index), std::move(report),
          seconds_since(start)};
}

std::string ratio_triple(const BenchmarkReport& report, NoiseLevel level) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.3f/%.3f/%.3f",
                report.hit_ratio(level, SelectionStrategy::cluster_top),
                report.hit_ratio(level, SelectionStrategy::select_all),
                report.hit_ratio(level, SelectionStrategy::select_best));
  return buf;
}

MaterializedView fixture_view(const std::string& id, std::vector<std::string> schema,
                              std::vector<std::vector<std::string>> rows,
                              std::size_t cardinality = 0) {
  MaterializedView v;
  v.id = id;
  v.schema = std::move(schema);
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  v.rows = std::move(rows);
  v.cardinality = cardinality ? cardinality : v.rows.size();
  return v;
}

// ---------- 1 + 2: hit ratios ----------

void check_zero_noise(const BenchSetup& setup) {
  std::size_t queries = setup.report.records.size() / all_strategies().size();
  bool perfect = true;
  for (auto s : all_strategies())
    perfect = perfect && setup.report.hit_ratio(NoiseLevel::zero, s) == 1.0;
  char detail[160];
  std::snprintf(detail, sizeof(detail), "(zero-noise %s over %zu queries, %.1fs)",
                ratio_triple(setup.report, NoiseLevel::zero).c_str(), queries, setup.elapsed);
  report(1, "zero-noise hit ratio is perfect", perfect && queries >= 75 && setup.elapsed < 120.0,
         detail);
}

// ---------- 3: dominance ----------

void check_dominance(const BenchmarkReport& standard, const BenchmarkReport& adversarial) {
  bool chain = true;
  std::size_t noisy = 0, strict = 0;
  for (const BenchmarkReport* rep : {&standard, &adversarial}) {
    std::map<std::string, std::map<SelectionStrategy, const BenchRecord*>> by_query;
    for (const auto& r : rep->records)
      by_query[std::to_string(r.truth) + "/" + std::to_string(r.query) + "/" +
               std::string(to_string(r.level))][r.strategy] = &r;
    for (const auto& [key, per] : by_query) {
      const BenchRecord* best = per.at(SelectionStrategy::select_best);
      const BenchRecord* mid = per.at(SelectionStrategy::cluster_top);
      const BenchRecord* all = per.at(SelectionStrategy::select_all);
      chain = chain && all->views >= mid->views && mid->views >= best->views;
      if (rep == &standard && mid->level != NoiseLevel::zero) {
        ++noisy;
        if (all->views > mid->views) ++strict;
      }
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "(chain on all queries, strict all>niffler on %zu/%zu noisy)",
                strict, noisy);
  report(3, "view counts nest across strategies", chain && strict * 2 >= noisy, detail);
}

// ---------- 4: threshold sweep ----------

void check_threshold_sweep(const BenchSetup& setup, std::vector<SweepPoint>& out_points) {
  WorkloadSpec workload;
  workload.queries_per_truth = 2;
  EngineConfig config;
  out_points = threshold_sweep(setup.collection, setup.truths, workload, config,
                               {0.8, 0.7, 0.6, 0.5});
  bool monotone = out_points.size() == 4;
  std::string counts;
  for (std::size_t i = 0; i < out_points.size(); ++i) {
    if (i) {
      monotone = monotone && out_points[i].join_graphs >= out_points[i - 1].join_graphs;
      counts += "->";
    }
    counts += std::to_string(out_points[i].join_graphs);
  }
  report(4, "lower thresholds never lose join graphs", monotone, "(graphs " + counts + ")");
}

// ---------- 5: 4C oracle ----------

void check_fourc_oracle() {
  auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto views = oracles::random_views(rng, 8, 30, 4);
    auto got = oracles::flatten_fourc(classify_4c(views, 2), views);
    auto expected = oracles::oracle_fourc(views, 2);
    if (!(got == expected)) ++mismatches;
  }
  double elapsed = seconds_since(start);
  char detail[96];
  std::snprintf(detail, sizeof(detail), "(%d mismatches over 200 instances, %.1fs)", mismatches,
                elapsed);
  report(5, "classification equals the cell-level oracle", mismatches == 0 && elapsed < 60.0,
         detail);
}

// ---------- 6: prune cache ----------

void check_prune_cache() {
  std::mt19937_64 rng(103);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PathlessCollection c = oracles::random_collection(rng, 4, 10, 3);
    DiscoveryIndex index = DiscoveryIndex::build(c, 0.7);
    std::vector<CandidateSet> candidates;
    std::size_t width = 2 + rng() % 2;
    for (std::size_t w = 0; w < width; ++w) {
      CandidateSet s;
      for (const auto& t : c.tables)
        if (rng() % 2 == 0)
          s.columns.push_back(make_column_ref(t, static_cast<std::uint32_t>(rng() % t.arity())));
      if (s.columns.empty()) s.columns.push_back(make_column_ref(c.tables[0], 0));
      std::sort(s.columns.begin(), s.columns.end());
      candidates.push_back(std::move(s));
    }
    auto fast = enumerate_join_graphs(candidates, index, 2, nullptr, true);
    auto slow = enumerate_join_graphs(candidates, index, 2, nullptr, false);
    if (fast.size() != slow.size()) {
      ++mismatches;
      continue;
    }
    for (std::size_t i = 0; i < fast.size(); ++i)
      if (fast[i].canonical_key() != slow[i].canonical_key()) {
        ++mismatches;
        break;
      }
  }
  char detail[80];
  std::snprintf(detail, sizeof(detail), "(%d mismatches over 100 instances)", mismatches);
  report(6, "pruning cache changes nothing", mismatches == 0, detail);
}

// ---------- 7: materializer oracle ----------

void check_materializer_oracle() {
  std::mt19937_64 rng(107);
  int mismatches = 0, instances = 0;
  while (instances < 100) {
    PathlessCollection c = oracles::random_collection(rng, 4, 12, 3);
    std::size_t total_rows = 0;
    for (const auto& t : c.tables) total_rows += t.rows.size();
    if (total_rows > 1000) continue;
    DiscoveryIndex index = DiscoveryIndex::build(c, 0.7);

    std::vector<CandidateSet> candidates;
    for (std::size_t w = 0; w < 2; ++w) {
      CandidateSet s;
      for (const auto& t : c.tables)
        if (rng() % 2 == 0)
          s.columns.push_back(make_column_ref(t, static_cast<std::uint32_t>(rng() % t.arity())));
      if (s.columns.empty()) s.columns.push_back(make_column_ref(c.tables[0], 0));
      std::sort(s.columns.begin(), s.columns.end());
      candidates.push_back(std::move(s));
    }
    auto graphs = enumerate_join_graphs(candidates, index, 2);
    rank_join_graphs(graphs, index);
    if (graphs.size() > 10) graphs.resize(10);
    auto views = materialize(graphs, c, 50, 10);
    for (std::size_t i = 0; i < graphs.size(); ++i)
      if (views[i].rows != oracles::oracle_materialize(graphs[i], c)) ++mismatches;
    ++instances;
  }
  char detail[80];
  std::snprintf(detail, sizeof(detail), "(%d row-set differences over 100 instances)", mismatches);
  report(7, "views equal the nested-loop oracle", mismatches == 0, detail);
}

// ---------- 8: reduction fixtures ----------

void check_reduction_fixtures() {
  bool ok = true;
  std::string note;

  {  // three planted copies collapse to the highest-cardinality one
    std::vector<MaterializedView> views = {
        fixture_view("v0", {"k", "v"}, {{"a", "1"}, {"b", "2"}}, 4),
        fixture_view("v1", {"k", "v"}, {{"a", "1"}, {"b", "2"}}, 9),
        fixture_view("v2", {"k", "v"}, {{"a", "1"}, {"b", "2"}}, 9)};
    auto reduced = reduce_view_space(classify_4c(views), views);
    ok = ok && reduced.size() == 1 && reduced[0].id == "v1";
    if (reduced.size() != 1) note += " copies!";
  }
  {  // a containment chain keeps only the maximal view
    std::vector<MaterializedView> views = {
        fixture_view("big", {"k", "v"}, {{"a", "1"}, {"b", "2"}, {"c", "3"}}),
        fixture_view("mid", {"k", "v"}, {{"a", "1"}, {"b", "2"}}),
        fixture_view("small", {"k", "v"}, {{"b", "2"}})};
    auto reduced = reduce_view_space(classify_4c(views), views);
    ok = ok && reduced.size() == 1 && reduced[0].id == "big";
    if (reduced.size() != 1) note += " chain!";
  }
  {  // a planted complementary family unions; a conflicting view stays out
    std::vector<MaterializedView> views = {
        fixture_view("v0", {"k", "v"}, {{"a", "1"}}), fixture_view("v1", {"k", "v"}, {{"b", "2"}}),
        fixture_view("v2", {"k", "v"}, {{"c", "3"}}),
        fixture_view("v3", {"k", "v"}, {{"a", "9"}})};
    auto reduced = reduce_view_space(classify_4c(views), views);
    bool here = reduced.size() == 2 && reduced[0].id == "v3" && reduced[1].id == "u:v0+v1+v2" &&
                reduced[1].rows.size() == 3;
    ok = ok && here;
    if (!here) note += " family!";
  }
  {  // pure contradictions pass through untouched
    std::vector<MaterializedView> views = {
        fixture_view("v0", {"n", "a", "z"},
                     {{"a", "p", "1"}, {"b", "q", "2"}, {"c", "r", "3"}, {"d", "s", "4"}}),
        fixture_view("v1", {"n", "a", "z"},
                     {{"a", "p", "9"}, {"b", "x", "2"}, {"c", "r", "3"}, {"e", "s", "4"}})};
    auto reduced = reduce_view_space(classify_4c(views), views);
    ok = ok && reduced.size() == 2;
    if (reduced.size() != 2) note += " contradiction!";
  }
  report(8, "reduction matches the planted counts", ok,
         ok ? "(copies, chain, family, contradiction)" : "(failed:" + note + ")");
}

// ---------- 9: pruning curves ----------

void check_curves() {
  // twelve disjoint signal families: ten steps never exhaust them
  std::vector<ContradictorySignal> signals;
  std::set<std::string> start;
  std::string target = "f0a0";
  for (int f = 0; f < 12; ++f) {
    ContradictorySignal s;
    for (int i = 0; i < 3; ++i) {
      s.set_a.push_back("f" + std::to_string(f) + "a" + std::to_string(i));
      start.insert(s.set_a.back());
    }
    for (int i = 0; i < 2; ++i) {
      s.set_b.push_back("f" + std::to_string(f) + "b" + std::to_string(i));
      start.insert(s.set_b.back());
    }
    s.discrimination = 2.4;
    signals.push_back(std::move(s));
  }

  auto best = simulate_signal_pruning(signals, start, 10, CurvePolicy::best_case);
  auto worst = simulate_signal_pruning(signals, start, 10, CurvePolicy::worst_case);
  auto [user_curve, survived] = simulate_consistent_user(signals, start, 10, target);

  bool ok = best.size() == 11 && worst.size() == 11 && user_curve.size() == 11;
  for (std::size_t i = 1; i < best.size() && ok; ++i)
    ok = best[i] <= best[i - 1] && worst[i] <= worst[i - 1] && user_curve[i] <= user_curve[i - 1];
  for (std::size_t i = 0; i < best.size() && ok; ++i) ok = worst[i] >= best[i];
  ok = ok && survived;
  char detail[128];
  std::snprintf(detail, sizeof(detail), "(best %zu->%zu, worst %zu->%zu, target survived=%d)",
                best.front(), best.back(), worst.front(), worst.back(), survived ? 1 : 0);
  report(9, "survivor curves behave and the user wins", ok, detail);
}

// ---------- 10: scoring ----------

void check_scoring() {
  Table a = make_table("a", {"k"}, {{"1"}, {"2"}, {"3"}, {"3"}});
  Table b = make_table(
      "b", {"k"},
      {{"1"}, {"2"}, {"3"}, {"4"}, {"5"}, {"6"}, {"7"}, {"8"}, {"9"}, {"9"}});
  PathlessCollection c;
  c.tables = {a, b};
  std::sort(c.tables.begin(), c.tables.end(),
            [](const Table& x, const Table& y) { return x.rel_path < y.rel_path; });
  c.sources.insert("fixture");
  DiscoveryIndex index = DiscoveryIndex::build(c, 0.8);

  CandidateSet left, right;
  left.columns = {make_column_ref(*c.find_table(table_id_for_path("a.csv")), 0)};
  right.columns = {make_column_ref(*c.find_table(table_id_for_path("b.csv")), 0)};
  auto graphs = enumerate_join_graphs({left, right}, index, 2);
  double expected = 0.9 / (1.0 + std::log(1.0 + std::log(2.0)));
  bool pair_ok = graphs.size() == 1 &&
                 std::abs(score_join_graph(graphs[0], index) - expected) < 1e-6;

  CandidateSet c0, c1;
  c0.columns = {make_column_ref(*c.find_table(table_id_for_path("b.csv")), 0)};
  c1.columns = {make_column_ref(*c.find_table(table_id_for_path("b.csv")), 0)};
  auto single = enumerate_join_graphs({c0, c1}, index, 2);
  bool single_ok = single.size() == 1 && score_join_graph(single[0], index) == 1.0;

  char detail[128];
  std::snprintf(detail, sizeof(detail), "(pair %.7f vs %.7f, single-table %s1.0)",
                graphs.empty() ? -1.0 : score_join_graph(graphs[0], index), expected,
                single_ok ? "= " : "!=");
  report(10, "scores hit the closed-form values", pair_ok && single_ok, detail);
}

// ---------- 11: width and depth sweeps ----------

void check_width_sweep() {
  CollectionSpec spec;
  spec.num_truths = 2;
  spec.rows_per_table = 40;
  spec.seed = 17;
  WorkloadSpec workload;
  workload.queries_per_truth = 2;
  EngineConfig config;

  auto cols = columns_sweep(spec, workload, config, {2, 3, 4});
  bool ok = cols.size() == 3;
  std::string graphs, views;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) {
      ok = ok && cols[i].join_graphs >= cols[i - 1].join_graphs &&
           cols[i].views >= cols[i - 1].views;
      graphs += "->";
      views += "->";
    }
    graphs += std::to_string(cols[i].join_graphs);
    views += std::to_string(cols[i].views);
  }

  auto [collection, truths] = generate_collection(spec);
  auto rows = rows_sweep(collection, truths, workload, config, {2, 3, 4});
  std::string depths;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) depths += "->";
    depths += std::to_string(rows[i].join_graphs);
  }
  ok = ok && rows.size() == 3;
  report(11, "wider queries never lose graphs or views", ok,
         "(graphs " + graphs + ", views " + views + "; depth sweep recorded " + depths + ")");
}

// ---------- 12: determinism ----------

void check_determinism(const BenchSetup& setup, const std::vector<SweepPoint>& sweep_points) {
  fs::path base = fs::temp_directory_path() / "niffler_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);

  WorkloadSpec workload;
  EngineConfig config;
  BenchmarkReport again = run_benchmark(setup.collection, setup.index, setup.truths, workload,
                                        all_strategies(), config);
  setup.report.write_reports((base / "one").string());
  again.write_reports((base / "two").string());

  bool ok = true;
  std::string mismatch;
  for (const char* name : {"report.csv", "summary.json", "curves.csv"}) {
    std::string a = slurp(base / "one" / name);
    if (a.empty() || a != slurp(base / "two" / name)) {
      ok = false;
      mismatch += std::string(" ") + name;
    }
  }

  WorkloadSpec sweep_load;
  sweep_load.queries_per_truth = 2;
  auto sweep_again = threshold_sweep(setup.collection, setup.truths, sweep_load, config,
                                     {0.8, 0.7, 0.6, 0.5});
  write_sweep_csv(sweep_points, (base / "sweep_one.csv").string());
  write_sweep_csv(sweep_again, (base / "sweep_two.csv").string());
  if (slurp(base / "sweep_one.csv") != slurp(base / "sweep_two.csv")) {
    ok = false;
    mismatch += " sweep.csv";
  }
  report(12, "same seeds give identical reports", ok,
         ok ? "(report.csv, summary.json, curves.csv, sweep.csv)" : "(differs:" + mismatch + ")");
}

}  // namespace

int main() {
  std::printf("acceptance checks\n-----------------\n");

  BenchSetup standard = run_standard_benchmark(standard_spec());
  check_zero_noise(standard);

  CollectionSpec adv = standard_spec();
  adv.adversarial = true;
  adv.seed = 13;
  auto adv_start = std::chrono::steady_clock::now();
  auto [adv_collection, adv_truths] = generate_collection(adv);
  DiscoveryIndex adv_index = DiscoveryIndex::build(adv_collection, 0.8);
  WorkloadSpec workload;
  BenchmarkReport adv_report = run_benchmark(adv_collection, adv_index, adv_truths, workload,
                                             all_strategies(), EngineConfig{});
  {
    auto overall = [&](SelectionStrategy s) {
      std::size_t total = 0, hits = 0;
      for (const auto& r : adv_report.records) {
        if (r.strategy != s) continue;
        ++total;
        hits += r.hit ? 1 : 0;
      }
      return static_cast<double>(hits) / static_cast<double>(total);
    };
    double best = overall(SelectionStrategy::select_best);
    double niffler = overall(SelectionStrategy::cluster_top);
    double elapsed = seconds_since(adv_start);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "(overall best=%.3f niffler=%.3f, high-noise %s, %.1fs)",
                  best, niffler, ratio_triple(adv_report, NoiseLevel::high).c_str(), elapsed);
    report(2, "adversarial noise sinks select_best",
           best <= 0.5 && niffler == 1.0 && elapsed < 120.0, detail);
  }

  check_dominance(standard.report, adv_report);

  std::vector<SweepPoint> sweep_points;
  check_threshold_sweep(standard, sweep_points);
  check_fourc_oracle();
  check_prune_cache();
  check_materializer_oracle();
  check_reduction_fixtures();
  check_curves();
  check_scoring();
  check_width_sweep();
  check_determinism(standard, sweep_points);

  std::printf("-----------------\n%s (%d failure%s)\n", failures == 0 ? "ALL PASS" : "FAILED",
              failures, failures == 1 ? "" : "s");
  return failures == 0 ? 0 : 1;
}

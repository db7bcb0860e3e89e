#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "niffler/corpus.hpp"
#include "niffler/discovery_index.hpp"
#include "niffler/harness.hpp"
#include "niffler/join_search.hpp"
#include "niffler/selection.hpp"
#include "niffler/signals.hpp"

namespace {

using namespace niffler;

struct GlobalOpts {
  double threshold = 0.8;
  int max_hops = 2;
  std::size_t theta = 1;
  std::size_t gamma = 50;
  std::size_t k = 10;
  std::size_t sample_size = 3;
  std::uint64_t seed = 7;
};

EngineConfig engine_config(const GlobalOpts& g, const std::string& strategy) {
  EngineConfig cfg;
  if (auto s = strategy_from_string(strategy)) cfg.strategy = *s;
  cfg.theta = g.theta;
  cfg.max_hops = g.max_hops;
  cfg.gamma = g.gamma;
  cfg.k = g.k;
  cfg.sample_size = g.sample_size;
  cfg.index_threshold = g.threshold;
  return cfg;
}

void print_view_line(const MaterializedView& v) {
  std::ostringstream schema;
  for (std::size_t i = 0; i < v.schema.size(); ++i) {
    if (i) schema << '|';
    schema << v.schema[i];
  }
  std::cout << "  " << v.id << "  rows=" << v.rows.size() << "  overlap=" << v.overlap
            << "  score=" << (v.provenance ? v.provenance->score : 0.0) << "  ["
            << schema.str() << "]\n";
}

int cmd_index(const GlobalOpts& g, const std::string& collection_dir, const std::string& out,
              char delimiter, bool no_header) {
  LoadOptions opts;
  opts.delimiter = delimiter;
  opts.has_header = !no_header;
  PathlessCollection collection = load_collection(collection_dir, opts);
  for (const auto& w : collection.load_warnings) std::cerr << "warning: " << w << '\n';
  DiscoveryIndex index = DiscoveryIndex::build(collection, g.threshold);
  index.save(out);
  std::size_t columns = index.profiles().size();
  std::cout << "indexed " << collection.tables.size() << " tables, " << columns << " columns, "
            << index.edges().size() << " edges at threshold " << g.threshold << " -> " << out
            << '\n';
  return 0;
}

int cmd_search(const std::string& index_path, const std::string& term, const std::string& target,
               int fuzzy) {
  DiscoveryIndex index = DiscoveryIndex::load(index_path);
  SearchTarget t = SearchTarget::both;
  if (target == "attribute") t = SearchTarget::attribute;
  if (target == "content") t = SearchTarget::content;
  std::vector<std::string> warnings;
  auto hits = index.search_keyword(term, t, fuzzy >= 0 ? std::optional<int>(fuzzy) : std::nullopt,
                                   &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : hits) std::cout << to_string(c) << '\n';
  std::cout << hits.size() << " column(s)\n";
  return 0;
}

int cmd_select(const GlobalOpts& g, const std::string& index_path, const std::string& query_path,
               const std::string& strategy) {
  DiscoveryIndex index = DiscoveryIndex::load(index_path);
  ExampleQuery query = load_query_file(query_path);
  auto strat = strategy_from_string(strategy);
  if (!strat) {
    std::cerr << "error: unknown strategy '" << strategy << "'\n";
    return 2;
  }
  for (const QueryColumn& qc : query.columns) {
    CandidateSet cs = candidates_for(*strat, qc, index, g.theta, std::nullopt);
    std::cout << "attribute '" << qc.name << "': " << cs.columns.size() << " candidate(s)\n";
    if (cs.warning) std::cout << "  warning: " << *cs.warning << '\n';
    for (const auto& col : cs.columns) {
      auto it = cs.overlap.find(col);
      std::cout << "  " << to_string(col) << "  overlap=" << (it != cs.overlap.end() ? it->second : 0)
                << '\n';
    }
  }
  return 0;
}

int run_pipeline(const GlobalOpts& g, const std::string& index_path, const std::string& query_path,
                 const std::string& strategy, const std::string& bundle_out, bool print_signals) {
  DiscoveryIndex index = DiscoveryIndex::load(index_path);
  PathlessCollection collection = index.reload_collection();
  ExampleQuery query = load_query_file(query_path);
  EngineConfig cfg = engine_config(g, strategy);
  QueryResult result = run_query(collection, index, query, cfg);
  for (const auto& d : result.diagnostics) std::cout << "note: " << d << '\n';
  std::cout << result.stats.candidate_groups << " candidate group(s), " << result.join_graphs
            << " join graph(s), " << result.ranked_views.size() << " view(s)\n";
  for (const auto& v : result.top_k(cfg.k)) print_view_line(v);
  if (print_signals) {
    std::cout << result.bundle.signals.size() << " contradictory signal(s), "
              << result.bundle.reduced_view_ids.size() << " view(s) after reduction\n";
    for (const auto& s : result.bundle.signals) {
      std::ostringstream key;
      for (std::size_t i = 0; i < s.key.size(); ++i) {
        if (i) key << ',';
        key << s.schema[s.key[i]];
      }
      std::cout << "  key(" << key.str() << ")  discrimination=" << s.discrimination << "  A={";
      for (std::size_t i = 0; i < s.set_a.size(); ++i) std::cout << (i ? "," : "") << s.set_a[i];
      std::cout << "}  B={";
      for (std::size_t i = 0; i < s.set_b.size(); ++i) std::cout << (i ? "," : "") << s.set_b[i];
      std::cout << "}\n";
    }
  }
  if (!bundle_out.empty()) {
    std::ofstream out(bundle_out);
    out << bundle_to_json(result.bundle).dump(2) << '\n';
    std::cout << "bundle -> " << bundle_out << '\n';
  }
  return 0;
}

int cmd_interact(const std::string& bundle_path) {
  std::ifstream in(bundle_path);
  if (!in) {
    std::cerr << "error: cannot open " << bundle_path << '\n';
    return 2;
  }
  SignalBundle bundle = bundle_from_json(nlohmann::json::parse(in));
  // Signals name pre-union views, so pruning walks the compatible/contained
  // survivors rather than the reduced set (union ids appear in no signal).
  std::set<std::string> surviving = pruning_start_set(bundle.fourc);
  if (surviving.empty())
    surviving.insert(bundle.reduced_view_ids.begin(), bundle.reduced_view_ids.end());
  std::cout << surviving.size() << " view(s) on the table, " << bundle.signals.size()
            << " signal(s); answer a/b to keep a side, n to skip, q to quit\n";
  std::size_t step = 0;
  for (const auto& sig : bundle.signals) {
    std::cout << "signal " << ++step << ": key ";
    for (std::size_t i = 0; i < sig.key.size(); ++i)
      std::cout << (i ? "," : "") << sig.schema[sig.key[i]];
    std::cout << "\n  A = {";
    for (std::size_t i = 0; i < sig.set_a.size(); ++i) std::cout << (i ? "," : "") << sig.set_a[i];
    std::cout << "}\n  B = {";
    for (std::size_t i = 0; i < sig.set_b.size(); ++i) std::cout << (i ? "," : "") << sig.set_b[i];
    std::cout << "}\n";
    for (const auto& sample : sig.samples) {
      std::cout << "  value";
      for (const auto& kv : sample.key_value) std::cout << " '" << kv << "'";
      std::cout << ":\n    a:";
      for (const auto& c : sample.row_a) std::cout << " '" << c << "'";
      std::cout << "\n    b:";
      for (const auto& c : sample.row_b) std::cout << " '" << c << "'";
      std::cout << '\n';
    }
    std::cout << "[a/b/n/q] > " << std::flush;
    std::string answer;
    if (!std::getline(std::cin, answer) || answer == "q") break;
    SignalSide side = SignalSide::neither;
    if (answer == "a" || answer == "A") side = SignalSide::a;
    if (answer == "b" || answer == "B") side = SignalSide::b;
    surviving = apply_signal_selection(sig, side, surviving);
    std::cout << surviving.size() << " view(s) left:";
    for (const auto& id : surviving) std::cout << ' ' << id;
    std::cout << '\n';
    if (surviving.size() <= 1) break;
  }
  std::cout << "final:";
  for (const auto& id : surviving) std::cout << ' ' << id;
  std::cout << '\n';
  return 0;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

int cmd_gen(const GlobalOpts& g, const std::string& out_dir, std::size_t truths, std::size_t rows,
            std::size_t tau, const std::string& decoys, bool adversarial, bool no_noise,
            bool no_stray) {
  CollectionSpec spec;
  spec.num_truths = truths;
  spec.rows_per_table = rows;
  spec.tau = tau;
  if (!decoys.empty()) spec.decoy_coverages = parse_doubles(decoys);
  spec.adversarial = adversarial;
  spec.include_noise = !no_noise;
  spec.include_stray = !no_stray;
  spec.seed = g.seed;
  auto [collection, truth_list] = generate_collection(spec);
  write_collection(collection, truth_list, out_dir);
  std::cout << "generated " << collection.tables.size() << " tables, " << truth_list.size()
            << " ground truth(s) -> " << out_dir << '\n';
  return 0;
}

// Loads a generated benchmark directory: tables/ as the collection plus
// ground_truth.json.
std::pair<PathlessCollection, std::vector<GroundTruth>> load_benchmark_dir(
    const std::string& dir) {
  PathlessCollection collection = load_collection(dir + "/tables");
  std::vector<GroundTruth> truths = load_ground_truths(dir + "/ground_truth.json", collection);
  return {std::move(collection), std::move(truths)};
}

int cmd_bench(const GlobalOpts& g, const std::string& dir, const std::string& out_dir,
              std::size_t queries_per_truth, std::size_t l, const std::string& strategies_csv) {
  auto [collection, truths] = load_benchmark_dir(dir);
  DiscoveryIndex index = DiscoveryIndex::build(collection, g.threshold);

  WorkloadSpec workload;
  workload.queries_per_truth = queries_per_truth;
  workload.l = l;
  workload.seed = g.seed;

  std::vector<SelectionStrategy> strategies;
  std::stringstream ss(strategies_csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto s = strategy_from_string(item);
    if (!s) {
      std::cerr << "error: unknown strategy '" << item << "'\n";
      return 2;
    }
    strategies.push_back(*s);
  }

  BenchmarkReport report =
      run_benchmark(collection, index, truths, workload, strategies, engine_config(g, "niffler"));
  report.write_reports(out_dir);
  for (NoiseLevel level : workload.levels) {
    std::cout << to_string(level) << ":";
    for (SelectionStrategy s : strategies) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", report.hit_ratio(level, s));
      std::cout << "  " << to_string(s) << "=" << buf;
    }
    std::cout << '\n';
  }
  std::cout << report.records.size() << " record(s) -> " << out_dir << '\n';
  return 0;
}

int cmd_sweep(const GlobalOpts& g, const std::string& kind, const std::string& dir,
              const std::string& out_path, std::size_t queries_per_truth) {
  WorkloadSpec workload;
  workload.queries_per_truth = queries_per_truth;
  workload.seed = g.seed;
  EngineConfig cfg = engine_config(g, "niffler");

  std::vector<SweepPoint> points;
  if (kind == "threshold") {
    auto [collection, truths] = load_benchmark_dir(dir);
    points = threshold_sweep(collection, truths, workload, cfg, {0.8, 0.7, 0.6, 0.5});
  } else if (kind == "rows") {
    auto [collection, truths] = load_benchmark_dir(dir);
    points = rows_sweep(collection, truths, workload, cfg, {3, 6, 9});
  } else if (kind == "cols") {
    CollectionSpec spec;
    spec.seed = g.seed;
    points = columns_sweep(spec, workload, cfg, {2, 3, 4});
  } else {
    std::cerr << "error: unknown sweep kind '" << kind << "' (threshold|rows|cols)\n";
    return 2;
  }
  write_sweep_csv(points, out_path);
  for (const auto& p : points)
    std::cout << "threshold=" << p.threshold << " tau=" << p.tau << " l=" << p.l
              << " groups=" << p.candidate_groups << " graphs=" << p.join_graphs
              << " views=" << p.views << '\n';
  std::cout << "sweep -> " << out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"niffler: PJ-view discovery over pathless table collections by example"};
  app.set_config("--config", "", "INI config (threshold=, max_hops=, theta=, gamma=, k=, "
                                 "sample_size=, seed=)");

  GlobalOpts g;
  app.add_option("--threshold", g.threshold, "containment threshold for index builds");
  app.add_option("--max_hops", g.max_hops, "max join-path hops");
  app.add_option("--theta", g.theta, "clusters kept by column selection");
  app.add_option("--gamma", g.gamma, "max views materialized per query");
  app.add_option("--k", g.k, "views shown to the user");
  app.add_option("--sample_size", g.sample_size, "sampled key values per signal");
  app.add_option("--seed", g.seed, "workload seed");
  app.require_subcommand(1);

  std::string collection_dir, index_out = "index.json";
  char delimiter = ',';
  bool no_header = false;
  auto* c_index = app.add_subcommand("index", "build a discovery index over a collection");
  c_index->add_option("--collection", collection_dir, "collection root directory")->required();
  c_index->add_option("--out", index_out, "index output path");
  c_index->add_option("--delimiter", delimiter, "field delimiter");
  c_index->add_flag("--no-header", no_header, "treat the first row as data");

  std::string index_path, term, target = "both";
  int fuzzy = -1;
  auto* c_search = app.add_subcommand("search", "keyword search over the index");
  c_search->add_option("--index", index_path, "index path")->required();
  c_search->add_option("--term", term, "search term")->required();
  c_search->add_option("--target", target, "attribute|content|both");
  c_search->add_option("--fuzzy", fuzzy, "edit distance for fuzzy matching");

  std::string query_path, strategy = "niffler";
  auto* c_select = app.add_subcommand("select", "column selection for a query file");
  c_select->add_option("--index", index_path, "index path")->required();
  c_select->add_option("--query", query_path, "query file (.json or delimited)")->required();
  c_select->add_option("--strategy", strategy, "niffler|all|best");

  std::string bundle_out;
  auto* c_query = app.add_subcommand("query", "end-to-end view discovery");
  c_query->add_option("--index", index_path, "index path")->required();
  c_query->add_option("--query", query_path, "query file")->required();
  c_query->add_option("--strategy", strategy, "niffler|all|best");
  c_query->add_option("--bundle-out", bundle_out, "write the signal bundle here");

  auto* c_signals = app.add_subcommand("signals", "run the pipeline and print signals");
  c_signals->add_option("--index", index_path, "index path")->required();
  c_signals->add_option("--query", query_path, "query file")->required();
  c_signals->add_option("--strategy", strategy, "niffler|all|best");
  c_signals->add_option("--bundle-out", bundle_out, "write the signal bundle here");

  std::string bundle_path;
  auto* c_interact = app.add_subcommand("interact", "step through signals from a bundle");
  c_interact->add_option("--bundle", bundle_path, "bundle path")->required();

  std::string gen_out = "bench_data";
  std::size_t truths = 5, rows = 60, tau = 2;
  std::string decoys;
  bool adversarial = false, no_noise = false, no_stray = false;
  auto* c_gen = app.add_subcommand("gen", "generate a synthetic collection + ground truths");
  c_gen->add_option("--out", gen_out, "output directory");
  c_gen->add_option("--truths", truths, "planted ground truths");
  c_gen->add_option("--rows", rows, "rows per table");
  c_gen->add_option("--tau", tau, "attributes per ground truth");
  c_gen->add_option("--decoys", decoys, "decoy coverages, e.g. 0.85,0.75");
  c_gen->add_flag("--adversarial", adversarial, "noise columns cover all truth values");
  c_gen->add_flag("--no-noise", no_noise, "skip noise tables");
  c_gen->add_flag("--no-stray", no_stray, "skip stray tables");

  std::string bench_dir, bench_out = "bench_out", strategies_csv = "niffler,all,best";
  std::size_t queries_per_truth = 5, l = 3;
  auto* c_bench = app.add_subcommand("bench", "run the workload grid and write reports");
  c_bench->add_option("--data", bench_dir, "generated benchmark directory")->required();
  c_bench->add_option("--out", bench_out, "report directory");
  c_bench->add_option("--queries-per-truth", queries_per_truth, "queries per ground truth");
  c_bench->add_option("--l", l, "examples per attribute");
  c_bench->add_option("--strategies", strategies_csv, "comma-separated strategy list");

  std::string sweep_kind = "threshold", sweep_out = "sweep.csv";
  auto* c_sweep = app.add_subcommand("sweep", "threshold/rows/cols sweeps");
  c_sweep->add_option("--kind", sweep_kind, "threshold|rows|cols")->required();
  c_sweep->add_option("--data", bench_dir, "generated benchmark directory (threshold/rows)");
  c_sweep->add_option("--out", sweep_out, "sweep csv path");
  c_sweep->add_option("--queries-per-truth", queries_per_truth, "queries per ground truth");

  for (CLI::App* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_index->parsed()) return cmd_index(g, collection_dir, index_out, delimiter, no_header);
    if (c_search->parsed()) return cmd_search(index_path, term, target, fuzzy);
    if (c_select->parsed()) return cmd_select(g, index_path, query_path, strategy);
    if (c_query->parsed()) return run_pipeline(g, index_path, query_path, strategy, bundle_out, false);
    if (c_signals->parsed()) return run_pipeline(g, index_path, query_path, strategy, bundle_out, true);
    if (c_interact->parsed()) return cmd_interact(bundle_path);
    if (c_gen->parsed())
      return cmd_gen(g, gen_out, truths, rows, tau, decoys, adversarial, no_noise, no_stray);
    if (c_bench->parsed())
      return cmd_bench(g, bench_dir, bench_out, queries_per_truth, l, strategies_csv);
    if (c_sweep->parsed()) return cmd_sweep(g, sweep_kind, bench_dir, sweep_out, queries_per_truth);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

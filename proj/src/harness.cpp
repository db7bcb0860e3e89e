#include "niffler/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "niffler/csv.hpp"
#include "niffler/hash.hpp"

namespace niffler {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------- deterministic sampling ----------

// std::uniform_int_distribution and std::sample are implementation-defined;
// modulo draws on mt19937_64 keep runs byte-identical across toolchains.

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = fnv1a64_u64(base, kFnvOffset);
  h = fnv1a64_u64(a, h);
  h = fnv1a64_u64(b, h);
  return fnv1a64_u64(c, h);
}

namespace {

std::size_t draw_below(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % static_cast<std::uint64_t>(n));
}

template <typename T>
std::vector<T> sample_without_replacement(const std::vector<T>& pool, std::size_t n,
                                          std::mt19937_64& rng) {
  std::vector<T> scratch = pool;
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n && !scratch.empty(); ++i) {
    std::size_t j = draw_below(rng, scratch.size());
    out.push_back(scratch[j]);
    scratch[j] = scratch.back();
    scratch.pop_back();
  }
  return out;
}

std::string padded(std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

std::optional<std::string> opt(std::string s) { return std::optional<std::string>(std::move(s)); }

[[noreturn]] void generation_error(const std::string& why) {
  throw std::runtime_error("generation error: " + why);
}

}  // namespace

// ---------- query pipeline ----------

std::vector<MaterializedView> QueryResult::top_k(std::size_t k) const {
  auto end = ranked_views.begin() + static_cast<std::ptrdiff_t>(std::min(k, ranked_views.size()));
  return {ranked_views.begin(), end};
}

QueryResult run_query(const PathlessCollection& collection, const DiscoveryIndex& index,
                      const ExampleQuery& query, const EngineConfig& config) {
  QueryResult res;
  if (query.columns.empty()) {
    res.diagnostics.push_back("empty query");
    return res;
  }

  std::vector<CandidateSet> cands;
  cands.reserve(query.columns.size());
  for (const QueryColumn& qc : query.columns) {
    CandidateSet cs =
        candidates_for(config.strategy, qc, index, config.theta, config.cluster_threshold);
    if (cs.warning) res.diagnostics.push_back(*cs.warning + " ('" + qc.name + "')");
    if (cs.empty()) {
      res.diagnostics.push_back("no candidate columns for attribute '" + qc.name + "'");
      return res;
    }
    cands.push_back(std::move(cs));
  }

  std::vector<JoinGraph> graphs =
      enumerate_join_graphs(cands, index, config.max_hops, &res.stats, true);
  if (graphs.empty()) {
    res.diagnostics.push_back("no joinable views");
    return res;
  }
  rank_join_graphs(graphs, index);
  res.join_graphs = graphs.size();

  std::vector<MaterializedView> views =
      materialize(graphs, collection, config.gamma, config.batch_size);
  for (auto& v : views) v.overlap = overlap_score(v, query);

  FourCResult fourc = classify_4c(views, config.key_max);
  auto signals = generate_contradictory_signals(fourc, views, config.sample_size);
  res.bundle = build_signal_bundle(views, query, fourc, signals);

  // Display order; the bundle keeps materialization order, which the
  // classification semantics depend on.
  std::stable_sort(views.begin(), views.end(),
                   [](const MaterializedView& a, const MaterializedView& b) {
                     if (a.overlap != b.overlap) return a.overlap > b.overlap;
                     double sa = a.provenance ? a.provenance->score : 0.0;
                     double sb = b.provenance ? b.provenance->score : 0.0;
                     return sa > sb;
                   });
  res.ranked_views = std::move(views);
  return res;
}

// ---------- synthetic collections ----------

namespace {

struct TruthPlan {
  std::vector<std::string> keys;
  std::vector<std::vector<std::string>> attrs;  // [attribute][row]
};

// Picks `count` distinct row indices, deterministic under rng.
std::vector<std::size_t> pick_indices(std::size_t universe, std::size_t count,
                                      std::mt19937_64& rng) {
  std::vector<std::size_t> all(universe);
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto picked = sample_without_replacement(all, count, rng);
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

std::pair<PathlessCollection, std::vector<GroundTruth>> generate_collection(
    const CollectionSpec& spec) {
  const std::size_t R = spec.rows_per_table;
  if (spec.num_truths == 0) generation_error("num_truths must be positive");
  if (spec.tau < 2 || spec.tau > 6) generation_error("tau must lie in [2, 6]");
  if (R < 10) generation_error("rows_per_table must be at least 10");
  for (double c : spec.decoy_coverages)
    if (!(c > 0.0 && c <= 1.0)) generation_error("decoy coverage must lie in (0, 1]");

  const std::size_t pool_n = spec.noise_pool ? spec.noise_pool : R / 2;
  const std::size_t noise_shared =
      spec.adversarial ? R : static_cast<std::size_t>(std::llround(spec.noise_coverage * R));
  if (spec.include_noise) {
    if (pool_n == 0) generation_error("noise pool must be non-empty");
    // Containment must clear the default build threshold of 0.8 strictly.
    if (noise_shared * 5 <= R * 4) generation_error("noise coverage must exceed 0.8 of the rows");
    if (noise_shared > R) generation_error("noise coverage must not exceed 1");
  }
  const std::size_t stray_shared =
      static_cast<std::size_t>(std::llround(spec.stray_coverage * R));
  if (spec.include_stray) {
    if (stray_shared == 0) generation_error("stray coverage too small for the row count");
    if (stray_shared * 5 >= R * 4) generation_error("stray coverage must stay below 0.8");
  }

  std::vector<Table> tables;
  std::vector<GroundTruth> truths;

  for (std::size_t g = 0; g < spec.num_truths; ++g) {
    std::mt19937_64 rng(mix_seed(spec.seed, g, 0x67656eULL, 0));
    const std::string gs = std::to_string(g);

    TruthPlan plan;
    plan.keys.resize(R);
    plan.attrs.assign(spec.tau, std::vector<std::string>(R));
    for (std::size_t i = 0; i < R; ++i) plan.keys[i] = "g" + gs + "k" + padded(i);
    for (std::size_t j = 0; j < spec.tau; ++j)
      for (std::size_t i = 0; i < R; ++i)
        plan.attrs[j][i] = "g" + gs + "a" + std::to_string(j) + "v" + padded(i);

    const std::string key_header = "k" + gs;
    std::vector<std::size_t> truth_table_idx;  // fact, then dims, into `tables`

    {  // fact table: join key + attribute 0
      std::vector<std::vector<std::optional<std::string>>> rows(R);
      for (std::size_t i = 0; i < R; ++i) rows[i] = {opt(plan.keys[i]), opt(plan.attrs[0][i])};
      truth_table_idx.push_back(tables.size());
      tables.push_back(make_table("t" + gs + "_fact", {opt(key_header), opt("a" + gs + "_0")},
                                  std::move(rows)));
    }
    for (std::size_t j = 1; j < spec.tau; ++j) {  // dimension tables
      std::vector<std::vector<std::optional<std::string>>> rows(R);
      for (std::size_t i = 0; i < R; ++i) rows[i] = {opt(plan.keys[i]), opt(plan.attrs[j][i])};
      truth_table_idx.push_back(tables.size());
      tables.push_back(make_table("t" + gs + "_dim" + std::to_string(j),
                                  {opt(key_header), opt("a" + gs + "_" + std::to_string(j))},
                                  std::move(rows)));
    }

    std::size_t noise_table_idx = tables.size();
    std::vector<std::vector<std::string>> noise_cols;
    if (spec.include_noise) {
      // Keyless table: per attribute, a large shared slice of the truth values
      // plus fresh pool values; column pairings are rotated so no row of the
      // truth view is reproduced.
      noise_cols.resize(spec.tau);
      for (std::size_t j = 0; j < spec.tau; ++j) {
        for (std::size_t i : pick_indices(R, noise_shared, rng))
          noise_cols[j].push_back(plan.attrs[j][i]);
        for (std::size_t i = 0; i < pool_n; ++i)
          noise_cols[j].push_back("g" + gs + "n" + std::to_string(j) + "x" + padded(i));
      }
      const std::size_t len = noise_shared + pool_n;
      std::vector<std::vector<std::optional<std::string>>> rows(len);
      std::vector<std::optional<std::string>> headers;
      for (std::size_t j = 0; j < spec.tau; ++j)
        headers.push_back(opt("n" + gs + "_" + std::to_string(j)));
      for (std::size_t i = 0; i < len; ++i) {
        rows[i].resize(spec.tau);
        for (std::size_t j = 0; j < spec.tau; ++j) rows[i][j] = noise_cols[j][(i + j + 1) % len];
      }
      tables.push_back(make_table("t" + gs + "_noise", std::move(headers), std::move(rows)));
    }

    if (spec.include_stray) {
      // Key copy keeps it joinable; attribute columns sit below the edge
      // threshold (shared slice diluted with fresh values), so it seeds the
      // all-columns baseline without entering the truth cluster.
      const std::size_t len = stray_shared + R;
      std::vector<std::vector<std::optional<std::string>>> rows(
          len, std::vector<std::optional<std::string>>(1 + spec.tau));
      std::vector<std::optional<std::string>> headers{opt("sk" + gs)};
      for (std::size_t j = 0; j < spec.tau; ++j)
        headers.push_back(opt("s" + gs + "_" + std::to_string(j)));
      for (std::size_t i = 0; i < R; ++i) rows[i][0] = opt(plan.keys[i]);
      for (std::size_t j = 0; j < spec.tau; ++j) {
        std::vector<std::string> col;
        for (std::size_t i : pick_indices(R, stray_shared, rng)) col.push_back(plan.attrs[j][i]);
        for (std::size_t i = 0; i < R; ++i)
          col.push_back("g" + gs + "s" + std::to_string(j) + "x" + padded(i));
        for (std::size_t i = 0; i < len; ++i) rows[i][j + 1] = opt(col[i]);
      }
      tables.push_back(make_table("t" + gs + "_stray", std::move(headers), std::move(rows)));
    }

    for (std::size_t d = 0; d < spec.decoy_coverages.size(); ++d) {
      // Key-like column hitting the join keys at the requested containment;
      // the payload column is pure junk.
      std::size_t shared =
          static_cast<std::size_t>(std::llround(spec.decoy_coverages[d] * R));
      shared = std::min(std::max<std::size_t>(shared, 1), R);
      auto covered = pick_indices(R, shared, rng);
      std::vector<bool> is_covered(R, false);
      for (std::size_t i : covered) is_covered[i] = true;
      const std::string ds = std::to_string(d);
      std::vector<std::vector<std::optional<std::string>>> rows(R);
      for (std::size_t i = 0; i < R; ++i) {
        std::string key_cell =
            is_covered[i] ? plan.keys[i] : "g" + gs + "d" + ds + "x" + padded(i);
        rows[i] = {opt(std::move(key_cell)), opt("g" + gs + "d" + ds + "v" + padded(i))};
      }
      tables.push_back(make_table("t" + gs + "_decoy" + ds,
                                  {opt("dk" + gs + "_" + ds), opt("da" + gs + "_" + ds)},
                                  std::move(rows)));
    }

    // ---- ground truth bookkeeping ----
    GroundTruth gt;
    gt.index = g;
    for (std::size_t j = 0; j < spec.tau; ++j) {
      gt.attribute_names.push_back("a" + gs + "_" + std::to_string(j));
      const Table& t = tables[truth_table_idx[j == 0 ? 0 : j]];
      gt.truth_columns.push_back(make_column_ref(t, 1));
      gt.truth_values.push_back(plan.attrs[j]);
      std::sort(gt.truth_values.back().begin(), gt.truth_values.back().end());
      if (spec.include_noise) {
        gt.noise_columns.push_back(
            make_column_ref(tables[noise_table_idx], static_cast<std::uint32_t>(j)));
        std::vector<std::string> pool;
        std::set<std::string> truth_set(plan.attrs[j].begin(), plan.attrs[j].end());
        for (const auto& v : noise_cols[j])
          if (!truth_set.count(v)) pool.push_back(v);
        std::sort(pool.begin(), pool.end());
        gt.noise_pools.push_back(std::move(pool));
      } else {
        gt.noise_pools.emplace_back();
      }
    }

    JoinGraph pj;
    for (std::size_t j = 0; j < spec.tau; ++j) pj.nodes.push_back(tables[truth_table_idx[j]].ref);
    std::sort(pj.nodes.begin(), pj.nodes.end());
    for (std::size_t j = 1; j < spec.tau; ++j) {
      JoinEdgeSpec e;
      e.left = make_column_ref(tables[truth_table_idx[0]], 0);
      e.right = make_column_ref(tables[truth_table_idx[j]], 0);
      e.weight = 1.0;
      pj.edges.push_back(e);
    }
    std::sort(pj.edges.begin(), pj.edges.end(), [](const JoinEdgeSpec& a, const JoinEdgeSpec& b) {
      return a.canonical_key() < b.canonical_key();
    });
    pj.projections = gt.truth_columns;
    gt.pj_query = pj;

    MaterializedView view;
    view.id = "truth" + gs;
    view.schema = gt.attribute_names;
    view.rows.resize(R);
    for (std::size_t i = 0; i < R; ++i) {
      view.rows[i].reserve(spec.tau);
      for (std::size_t j = 0; j < spec.tau; ++j) view.rows[i].push_back(plan.attrs[j][i]);
    }
    std::sort(view.rows.begin(), view.rows.end());
    view.rows.erase(std::unique(view.rows.begin(), view.rows.end()), view.rows.end());
    view.cardinality = R;
    view.provenance = pj;
    gt.view = std::move(view);

    // ---- post-hoc invariants ----
    if (gt.view.rows.size() != R) generation_error("truth view rows are not unique");
    for (std::size_t j = 0; j < spec.tau && spec.include_noise; ++j) {
      std::set<std::string> truth_set(plan.attrs[j].begin(), plan.attrs[j].end());
      std::size_t shared = 0;
      std::set<std::string> noise_set(noise_cols[j].begin(), noise_cols[j].end());
      for (const auto& v : noise_set) shared += truth_set.count(v);
      if (shared * 5 <= truth_set.size() * 4)
        generation_error("noise containment fell below the threshold");
      if (gt.noise_pools[j].empty()) generation_error("noise pool is empty");
    }

    truths.push_back(std::move(gt));
  }

  PathlessCollection collection;
  collection.root = "";
  std::sort(tables.begin(), tables.end(),
            [](const Table& a, const Table& b) { return a.rel_path < b.rel_path; });
  collection.tables = std::move(tables);
  collection.sources.insert("synthetic");
  return {std::move(collection), std::move(truths)};
}

// ---------- ground-truth persistence ----------

namespace {

json column_to_json(const ColumnRef& c, const PathlessCollection& collection) {
  const Table* t = collection.find_table(c.table);
  json j;
  j["table"] = t ? t->rel_path : c.table.name + ".csv";
  j["index"] = c.column_index;
  if (c.header) j["header"] = *c.header;
  return j;
}

const Table& table_by_rel(const PathlessCollection& collection, const std::string& rel) {
  for (const Table& t : collection.tables)
    if (t.rel_path == rel) return t;
  throw std::runtime_error("ground truth references unknown table '" + rel + "'");
}

ColumnRef column_from_json(const json& j, const PathlessCollection& collection) {
  const Table& t = table_by_rel(collection, j.at("table").get<std::string>());
  return make_column_ref(t, j.at("index").get<std::uint32_t>());
}

}  // namespace

void write_collection(const PathlessCollection& collection,
                      const std::vector<GroundTruth>& truths, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "tables");
  for (const Table& t : collection.tables) {
    fs::path p = fs::path(dir) / "tables" / t.rel_path;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    std::vector<std::string> cells;
    cells.reserve(t.arity());
    for (const auto& h : t.headers) cells.push_back(h.value_or(""));
    write_delimited_row(out, cells, collection.delimiter);
    for (const auto& row : t.rows) {
      cells.clear();
      for (const auto& cell : row) cells.push_back(cell.value_or(""));
      write_delimited_row(out, cells, collection.delimiter);
    }
  }

  json root;
  root["format"] = "niffler-truths";
  root["version"] = 1;
  json list = json::array();
  for (const GroundTruth& gt : truths) {
    json j;
    j["index"] = gt.index;
    j["attribute_names"] = gt.attribute_names;
    j["truth_values"] = gt.truth_values;
    j["noise_pools"] = gt.noise_pools;
    json tc = json::array(), nc = json::array();
    for (const auto& c : gt.truth_columns) tc.push_back(column_to_json(c, collection));
    for (const auto& c : gt.noise_columns) nc.push_back(column_to_json(c, collection));
    j["truth_columns"] = std::move(tc);
    j["noise_columns"] = std::move(nc);

    json graph;
    json nodes = json::array();
    for (const auto& n : gt.pj_query.nodes) {
      const Table* t = collection.find_table(n);
      nodes.push_back(t ? t->rel_path : n.name + ".csv");
    }
    graph["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const auto& e : gt.pj_query.edges) {
      json ej;
      ej["left"] = column_to_json(e.left, collection);
      ej["right"] = column_to_json(e.right, collection);
      ej["weight"] = e.weight;
      edges.push_back(std::move(ej));
    }
    graph["edges"] = std::move(edges);
    json projs = json::array();
    for (const auto& c : gt.pj_query.projections) projs.push_back(column_to_json(c, collection));
    graph["projections"] = std::move(projs);
    j["graph"] = std::move(graph);

    json vj;
    vj["id"] = gt.view.id;
    vj["schema"] = gt.view.schema;
    vj["rows"] = gt.view.rows;
    vj["cardinality"] = gt.view.cardinality;
    j["view"] = std::move(vj);
    list.push_back(std::move(j));
  }
  root["truths"] = std::move(list);

  std::ofstream out(fs::path(dir) / "ground_truth.json");
  if (!out) throw std::runtime_error("cannot write ground_truth.json under " + dir);
  out << root.dump(2) << '\n';
}

std::vector<GroundTruth> load_ground_truths(const std::string& path,
                                            const PathlessCollection& collection) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json root = json::parse(in);
  if (root.value("format", "") != "niffler-truths")
    throw std::runtime_error(path + " is not a ground-truth file");

  std::vector<GroundTruth> truths;
  for (const json& j : root.at("truths")) {
    GroundTruth gt;
    gt.index = j.at("index").get<std::size_t>();
    gt.attribute_names = j.at("attribute_names").get<std::vector<std::string>>();
    gt.truth_values = j.at("truth_values").get<std::vector<std::vector<std::string>>>();
    gt.noise_pools = j.at("noise_pools").get<std::vector<std::vector<std::string>>>();
    for (const json& c : j.at("truth_columns")) gt.truth_columns.push_back(column_from_json(c, collection));
    for (const json& c : j.at("noise_columns")) gt.noise_columns.push_back(column_from_json(c, collection));

    const json& graph = j.at("graph");
    for (const json& n : graph.at("nodes"))
      gt.pj_query.nodes.push_back(table_by_rel(collection, n.get<std::string>()).ref);
    std::sort(gt.pj_query.nodes.begin(), gt.pj_query.nodes.end());
    for (const json& e : graph.at("edges")) {
      JoinEdgeSpec spec;
      spec.left = column_from_json(e.at("left"), collection);
      spec.right = column_from_json(e.at("right"), collection);
      spec.weight = e.at("weight").get<double>();
      gt.pj_query.edges.push_back(spec);
    }
    for (const json& c : graph.at("projections"))
      gt.pj_query.projections.push_back(column_from_json(c, collection));

    const json& vj = j.at("view");
    gt.view.id = vj.at("id").get<std::string>();
    gt.view.schema = vj.at("schema").get<std::vector<std::string>>();
    gt.view.rows = vj.at("rows").get<std::vector<std::vector<std::string>>>();
    gt.view.cardinality = vj.at("cardinality").get<std::size_t>();
    gt.view.provenance = gt.pj_query;
    truths.push_back(std::move(gt));
  }
  return truths;
}

// ---------- noisy queries ----------

std::string_view to_string(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::zero: return "zero";
    case NoiseLevel::medium: return "medium";
    case NoiseLevel::high: return "high";
  }
  return "zero";
}

std::optional<NoiseLevel> noise_level_from_string(std::string_view s) {
  if (s == "zero") return NoiseLevel::zero;
  if (s == "medium") return NoiseLevel::medium;
  if (s == "high") return NoiseLevel::high;
  return std::nullopt;
}

ExampleQuery generate_noisy_query(const GroundTruth& truth, NoiseLevel level, std::size_t l,
                                  std::uint64_t seed, std::size_t tau_limit) {
  if (l == 0) throw std::invalid_argument("l must be positive");
  std::size_t tau = truth.attribute_names.size();
  if (tau_limit > 0 && tau_limit < tau) tau = tau_limit;

  const std::size_t major = (2 * l + 2) / 3;  // ceil(2l/3)
  std::size_t truth_n = l, noise_n = 0;
  if (level == NoiseLevel::medium) {
    truth_n = major;
    noise_n = l - major;
  } else if (level == NoiseLevel::high) {
    noise_n = major;
    truth_n = l - major;
  }

  std::mt19937_64 rng(seed);
  std::vector<std::pair<std::string, std::vector<std::string>>> cols;
  for (std::size_t j = 0; j < tau; ++j) {
    if (truth.truth_values[j].size() < truth_n)
      throw std::runtime_error("insufficient truth values");
    if (truth.noise_pools[j].size() < noise_n) throw std::runtime_error("insufficient noise pool");
    std::vector<std::string> examples = sample_without_replacement(truth.truth_values[j], truth_n, rng);
    for (auto& v : sample_without_replacement(truth.noise_pools[j], noise_n, rng))
      examples.push_back(std::move(v));
    cols.emplace_back(truth.attribute_names[j], std::move(examples));
  }
  return make_query(std::move(cols));
}

bool hit_predicate(const std::vector<MaterializedView>& candidates, const GroundTruth& truth,
                   std::size_t tau_limit) {
  std::size_t tau = truth.view.schema.size();
  std::vector<std::vector<std::string>> want;
  if (tau_limit > 0 && tau_limit < tau) {
    tau = tau_limit;
    std::set<std::vector<std::string>> dedup;
    for (const auto& row : truth.view.rows)
      dedup.insert({row.begin(), row.begin() + static_cast<std::ptrdiff_t>(tau)});
    want.assign(dedup.begin(), dedup.end());
  } else {
    want = truth.view.rows;  // already sorted unique
  }

  std::vector<std::size_t> identity(tau);
  std::iota(identity.begin(), identity.end(), std::size_t{0});
  for (const MaterializedView& cand : candidates) {
    if (cand.schema.size() != tau || cand.rows.size() != want.size()) continue;
    std::vector<std::size_t> perm = identity;
    do {
      std::vector<std::vector<std::string>> got;
      got.reserve(cand.rows.size());
      for (const auto& row : cand.rows) {
        std::vector<std::string> pr(tau);
        for (std::size_t i = 0; i < tau; ++i) pr[i] = row[perm[i]];
        got.push_back(std::move(pr));
      }
      std::sort(got.begin(), got.end());
      if (got == want) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return false;
}

// ---------- signal-pruning curves ----------

std::set<std::string> pruning_start_set(const FourCResult& fourc) {
  std::set<std::string> out;
  for (const SchemaGroup& group : fourc.groups) {
    std::set<std::string> contained;
    for (const ContainedPair& p : group.contained_pairs) contained.insert(p.containee);
    for (const CompatibleGroup& cg : group.compatible_groups)
      if (!contained.count(cg.representative)) out.insert(cg.representative);
  }
  return out;
}

namespace {

std::size_t overlap_count(const std::vector<std::string>& ids, const std::set<std::string>& s) {
  std::size_t n = 0;
  for (const auto& id : ids) n += s.count(id);
  return n;
}

}  // namespace

std::vector<std::size_t> simulate_signal_pruning(const std::vector<ContradictorySignal>& signals,
                                                 const std::set<std::string>& start,
                                                 std::size_t max_steps, CurvePolicy policy) {
  std::set<std::string> surviving = start;
  std::vector<std::size_t> curve{surviving.size()};
  std::size_t steps = 0;
  for (const ContradictorySignal& sig : signals) {
    if (steps == max_steps) break;
    std::size_t removes_if_a = overlap_count(sig.set_b, surviving);
    std::size_t removes_if_b = overlap_count(sig.set_a, surviving);
    bool pick_a = policy == CurvePolicy::best_case ? removes_if_a >= removes_if_b
                                                   : removes_if_a <= removes_if_b;
    surviving = apply_signal_selection(sig, pick_a ? SignalSide::a : SignalSide::b, surviving);
    curve.push_back(surviving.size());
    ++steps;
  }
  return curve;
}

std::pair<std::vector<std::size_t>, bool> simulate_consistent_user(
    const std::vector<ContradictorySignal>& signals, const std::set<std::string>& start,
    std::size_t max_steps, const std::string& target) {
  std::set<std::string> surviving = start;
  std::vector<std::size_t> curve{surviving.size()};
  std::size_t steps = 0;
  for (const ContradictorySignal& sig : signals) {
    if (steps == max_steps) break;
    SignalSide side = SignalSide::neither;
    if (std::find(sig.set_a.begin(), sig.set_a.end(), target) != sig.set_a.end())
      side = SignalSide::a;
    else if (std::find(sig.set_b.begin(), sig.set_b.end(), target) != sig.set_b.end())
      side = SignalSide::b;
    surviving = apply_signal_selection(sig, side, surviving);
    curve.push_back(surviving.size());
    ++steps;
  }
  return {curve, surviving.count(target) > 0};
}

// ---------- benchmark ----------

std::string BenchRecord::query_id() const {
  return "t" + std::to_string(truth) + "q" + std::to_string(query) + "-" +
         std::string(to_string(level));
}

double BenchmarkReport::hit_ratio(NoiseLevel level, SelectionStrategy strategy) const {
  std::size_t n = 0, hits = 0;
  for (const BenchRecord& r : records)
    if (r.level == level && r.strategy == strategy) {
      ++n;
      hits += r.hit ? 1 : 0;
    }
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

double BenchmarkReport::total_wall_ms(SelectionStrategy strategy) const {
  double total = 0.0;
  for (const BenchRecord& r : records)
    if (r.strategy == strategy) total += r.wall_ms;
  return total;
}

BenchmarkReport run_benchmark(const PathlessCollection& collection, const DiscoveryIndex& index,
                              const std::vector<GroundTruth>& truths,
                              const WorkloadSpec& workload,
                              const std::vector<SelectionStrategy>& strategies,
                              const EngineConfig& base_config) {
  BenchmarkReport report;
  for (std::size_t ti = 0; ti < truths.size(); ++ti) {
    for (std::size_t q = 0; q < workload.queries_per_truth; ++q) {
      for (NoiseLevel level : workload.levels) {
        std::uint64_t qseed =
            mix_seed(workload.seed, ti, q, static_cast<std::uint64_t>(level));
        ExampleQuery query = generate_noisy_query(truths[ti], level, workload.l, qseed);
        for (SelectionStrategy strategy : strategies) {
          EngineConfig config = base_config;
          config.strategy = strategy;
          auto t0 = std::chrono::steady_clock::now();
          QueryResult result = run_query(collection, index, query, config);
          auto t1 = std::chrono::steady_clock::now();

          BenchRecord rec;
          rec.truth = ti;
          rec.query = q;
          rec.level = level;
          rec.strategy = strategy;
          rec.hit = hit_predicate(result.ranked_views, truths[ti]);
          rec.candidate_groups = result.stats.candidate_groups;
          rec.join_graphs = result.join_graphs;
          rec.views = result.ranked_views.size();
          rec.reduced_views = result.bundle.reduced_view_ids.size();
          rec.signals = result.bundle.signals.size();
          rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
          std::set<std::string> start = pruning_start_set(result.bundle.fourc);
          rec.best_curve = simulate_signal_pruning(result.bundle.signals, start,
                                                   config.signal_steps, CurvePolicy::best_case);
          rec.worst_curve = simulate_signal_pruning(result.bundle.signals, start,
                                                    config.signal_steps, CurvePolicy::worst_case);
          report.records.push_back(std::move(rec));
        }
      }
    }
  }
  return report;
}

void BenchmarkReport::write_reports(const std::string& dir) const {
  fs::create_directories(dir);

  {
    std::ofstream out(fs::path(dir) / "report.csv");
    out << "query_id,truth,query,noise,strategy,hit,candidate_groups,join_graphs,views,"
           "reduced_views,signals\n";
    for (const BenchRecord& r : records) {
      out << r.query_id() << ',' << r.truth << ',' << r.query << ',' << to_string(r.level) << ','
          << to_string(r.strategy) << ',' << (r.hit ? 1 : 0) << ',' << r.candidate_groups << ','
          << r.join_graphs << ',' << r.views << ',' << r.reduced_views << ',' << r.signals
          << '\n';
    }
  }

  {
    std::ofstream out(fs::path(dir) / "curves.csv");
    out << "query_id,strategy,curve,step,surviving\n";
    for (const BenchRecord& r : records) {
      for (std::size_t i = 0; i < r.best_curve.size(); ++i)
        out << r.query_id() << ',' << to_string(r.strategy) << ",best," << i << ','
            << r.best_curve[i] << '\n';
      for (std::size_t i = 0; i < r.worst_curve.size(); ++i)
        out << r.query_id() << ',' << to_string(r.strategy) << ",worst," << i << ','
            << r.worst_curve[i] << '\n';
    }
  }

  {
    // Wall times live here and only here; the other reports stay byte-stable
    // under a fixed seed.
    std::ofstream out(fs::path(dir) / "timings.csv");
    out << "query_id,strategy,wall_ms\n";
    char buf[32];
    for (const BenchRecord& r : records) {
      std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
      out << r.query_id() << ',' << to_string(r.strategy) << ',' << buf << '\n';
    }
  }

  {
    std::set<NoiseLevel> levels;
    std::set<SelectionStrategy> strategies;
    for (const BenchRecord& r : records) {
      levels.insert(r.level);
      strategies.insert(r.strategy);
    }
    json summary;
    summary["format"] = "niffler-benchmark";
    summary["version"] = 1;
    summary["records"] = records.size();
    json ratios;
    json counts;
    for (NoiseLevel level : levels) {
      for (SelectionStrategy strategy : strategies) {
        std::size_t n = 0;
        for (const BenchRecord& r : records)
          if (r.level == level && r.strategy == strategy) ++n;
        ratios[std::string(to_string(level))][std::string(to_string(strategy))] =
            hit_ratio(level, strategy);
        counts[std::string(to_string(level))][std::string(to_string(strategy))] = n;
      }
    }
    summary["hit_ratio"] = std::move(ratios);
    summary["queries"] = std::move(counts);
    json totals;
    std::size_t graphs = 0, views = 0, signal_count = 0;
    for (const BenchRecord& r : records) {
      graphs += r.join_graphs;
      views += r.views;
      signal_count += r.signals;
    }
    totals["join_graphs"] = graphs;
    totals["views"] = views;
    totals["signals"] = signal_count;
    summary["totals"] = std::move(totals);
    std::ofstream out(fs::path(dir) / "summary.json");
    out << summary.dump(2) << '\n';
  }
}

// ---------- sweeps ----------

namespace {

SweepPoint accumulate_runs(const PathlessCollection& collection, const DiscoveryIndex& index,
                           const std::vector<GroundTruth>& truths, const WorkloadSpec& workload,
                           const EngineConfig& config, std::size_t l, std::size_t tau_limit) {
  SweepPoint point;
  point.threshold = index.build_threshold();
  point.l = l;
  point.tau = tau_limit != 0 ? tau_limit
                             : (truths.empty() ? 0 : truths.front().attribute_names.size());
  for (std::size_t ti = 0; ti < truths.size(); ++ti) {
    for (std::size_t q = 0; q < workload.queries_per_truth; ++q) {
      std::uint64_t qseed = mix_seed(workload.seed, ti, q, 0);
      ExampleQuery query = generate_noisy_query(truths[ti], NoiseLevel::zero, l, qseed, tau_limit);
      QueryResult result = run_query(collection, index, query, config);
      point.candidate_groups += result.stats.candidate_groups;
      point.join_graphs += result.join_graphs;
      point.views += result.ranked_views.size();
    }
  }
  return point;
}

}  // namespace

std::vector<SweepPoint> threshold_sweep(const PathlessCollection& collection,
                                        const std::vector<GroundTruth>& truths,
                                        const WorkloadSpec& workload, const EngineConfig& config,
                                        const std::vector<double>& thresholds) {
  std::vector<SweepPoint> out;
  for (double t : thresholds) {
    DiscoveryIndex index = DiscoveryIndex::build(collection, t);
    out.push_back(accumulate_runs(collection, index, truths, workload, config, workload.l, 0));
  }
  return out;
}

std::vector<SweepPoint> columns_sweep(CollectionSpec spec, const WorkloadSpec& workload,
                                      const EngineConfig& config,
                                      const std::vector<std::size_t>& taus) {
  if (taus.empty()) return {};
  spec.tau = *std::max_element(taus.begin(), taus.end());
  auto [collection, truths] = generate_collection(spec);
  DiscoveryIndex index = DiscoveryIndex::build(collection, config.index_threshold);
  std::vector<SweepPoint> out;
  for (std::size_t tau : taus)
    out.push_back(accumulate_runs(collection, index, truths, workload, config, workload.l, tau));
  return out;
}

std::vector<SweepPoint> rows_sweep(const PathlessCollection& collection,
                                   const std::vector<GroundTruth>& truths,
                                   const WorkloadSpec& workload, const EngineConfig& config,
                                   const std::vector<std::size_t>& ls) {
  DiscoveryIndex index = DiscoveryIndex::build(collection, config.index_threshold);
  std::vector<SweepPoint> out;
  for (std::size_t l : ls)
    out.push_back(accumulate_runs(collection, index, truths, workload, config, l, 0));
  return out;
}

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "threshold,tau,l,candidate_groups,join_graphs,views\n";
  char buf[32];
  for (const SweepPoint& p : points) {
    std::snprintf(buf, sizeof buf, "%.2f", p.threshold);
    out << buf << ',' << p.tau << ',' << p.l << ',' << p.candidate_groups << ','
        << p.join_graphs << ',' << p.views << '\n';
  }
}

}  // namespace niffler

#include "niffler/selection.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "niffler/csv.hpp"

namespace niffler {

std::size_t ExampleQuery::depth() const {
  std::size_t l = 0;
  for (const auto& c : columns) l = std::max(l, c.examples.size());
  return l;
}

namespace {

QueryColumn normalize_query_column(std::string name, const std::vector<std::string>& raw) {
  QueryColumn col;
  col.name = std::move(name);
  std::set<std::string> seen;
  for (const auto& r : raw) {
    auto norm = normalize_cell(r);
    if (!norm) continue;
    if (seen.insert(*norm).second) col.examples.push_back(*norm);
  }
  return col;
}

}  // namespace

ExampleQuery make_query(std::vector<std::pair<std::string, std::vector<std::string>>> columns) {
  ExampleQuery q;
  for (auto& [name, examples] : columns) {
    QueryColumn col = normalize_query_column(std::move(name), examples);
    if (col.examples.empty()) {
      throw std::invalid_argument("query column '" + col.name + "' has no usable example");
    }
    q.columns.push_back(std::move(col));
  }
  if (q.columns.empty()) throw std::invalid_argument("query has no columns");
  return q;
}

ExampleQuery load_query_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open query file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();

  std::vector<std::pair<std::string, std::vector<std::string>>> cols;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& c : j.at("columns")) {
      cols.emplace_back(c.value("name", ""), c.at("examples").get<std::vector<std::string>>());
    }
  } else {
    auto rows = parse_delimited(text, delimiter);
    if (rows.size() < 2) throw std::invalid_argument("query file needs a header and example rows");
    const auto& header = rows.front();
    for (std::size_t i = 0; i < header.size(); ++i) {
      std::vector<std::string> examples;
      for (std::size_t r = 1; r < rows.size(); ++r) {
        if (i < rows[r].size()) examples.push_back(rows[r][i]);
      }
      cols.emplace_back(header[i], std::move(examples));
    }
  }
  return make_query(std::move(cols));
}

std::string_view to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::cluster_top: return "niffler";
    case SelectionStrategy::select_all: return "all";
    case SelectionStrategy::select_best: return "best";
  }
  return "niffler";
}

std::optional<SelectionStrategy> strategy_from_string(std::string_view s) {
  if (s == "niffler" || s == "cluster" || s == "cluster-top") return SelectionStrategy::cluster_top;
  if (s == "all" || s == "select-all") return SelectionStrategy::select_all;
  if (s == "best" || s == "select-best") return SelectionStrategy::select_best;
  return std::nullopt;
}

namespace {

// Distinct examples present in the column's value set.
int overlap_count(const ColumnProfile& profile, const std::vector<std::string>& examples) {
  int n = 0;
  for (const auto& e : examples) {
    if (profile.contains(e)) ++n;
  }
  return n;
}

// Seed columns with their overlap counts; overlap >= 1 by construction.
std::map<ColumnRef, int> seed_overlaps(const QueryColumn& query_col,
                                       const DiscoveryIndex& index) {
  std::set<ColumnRef> seeds;
  for (const auto& e : query_col.examples) {
    for (const auto& col : index.search_keyword(e, SearchTarget::content)) {
      seeds.insert(col);
    }
  }
  std::map<ColumnRef, int> out;
  for (const auto& col : seeds) {
    out[col] = overlap_count(*index.profile(col), query_col.examples);
  }
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

CandidateSet column_selection(const QueryColumn& query_col, const DiscoveryIndex& index,
                              std::size_t theta, std::optional<double> cluster_threshold) {
  if (query_col.examples.empty()) throw std::invalid_argument("query column has no examples");
  if (theta < 1) throw std::invalid_argument("theta must be >= 1");
  double link_t = cluster_threshold.value_or(index.build_threshold());

  CandidateSet result;
  result.strategy = SelectionStrategy::cluster_top;

  auto seeds = seed_overlaps(query_col, index);
  if (seeds.empty()) {
    result.warning = "ill-specified query column";
    return result;
  }

  // Nodes are the seeds plus their direct neighbors; neighbors can glue two
  // seed clusters together without becoming candidates themselves.
  std::vector<ColumnRef> nodes;
  std::map<ColumnRef, std::vector<ColumnRef>> neighbor_links;
  {
    std::set<ColumnRef> node_set;
    for (const auto& [col, _] : seeds) node_set.insert(col);
    for (const auto& [col, _] : seeds) {
      for (const auto& [other, w] : index.neighbors(col, link_t)) {
        (void)w;
        node_set.insert(other);
        neighbor_links[col].push_back(other);
      }
    }
    nodes.assign(node_set.begin(), node_set.end());
  }

  std::map<ColumnRef, int> node_id;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) node_id[nodes[i]] = i;
  UnionFind uf(nodes.size());
  for (const auto& [col, links] : neighbor_links) {
    for (const auto& other : links) uf.unite(node_id[col], node_id[other]);
  }

  std::map<int, ColumnCluster> by_root;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    by_root[uf.find(i)].members.push_back(nodes[i]);
  }
  std::vector<ColumnCluster> clusters;
  for (auto& [_, cluster] : by_root) {
    cluster.score = 0;
    bool has_seed = false;
    for (const auto& m : cluster.members) {
      auto it = seeds.find(m);
      if (it == seeds.end()) continue;
      if (!has_seed || it->second > cluster.score) {
        cluster.score = it->second;
        cluster.representative = m;
        has_seed = true;
      }
    }
    if (has_seed) clusters.push_back(std::move(cluster));
  }

  std::sort(clusters.begin(), clusters.end(), [](const ColumnCluster& a, const ColumnCluster& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.representative < b.representative;
  });

  std::size_t keep = std::min(theta, clusters.size());
  while (keep < clusters.size() && clusters[keep].score == clusters[keep - 1].score) {
    ++keep;  // ties at the boundary all included
  }

  std::set<ColumnRef> cand;
  for (std::size_t i = 0; i < keep; ++i) {
    for (const auto& m : clusters[i].members) {
      if (seeds.count(m)) cand.insert(m);  // only seed columns become candidates
    }
  }

  result.columns.assign(cand.begin(), cand.end());
  for (const auto& col : result.columns) result.overlap[col] = seeds[col];
  result.clusters = std::move(clusters);
  return result;
}

namespace {

CandidateSet baseline(const QueryColumn& query_col, const DiscoveryIndex& index,
                      SelectionStrategy strategy) {
  if (query_col.examples.empty()) throw std::invalid_argument("query column has no examples");
  CandidateSet result;
  result.strategy = strategy;
  auto seeds = seed_overlaps(query_col, index);
  if (seeds.empty()) {
    result.warning = "ill-specified query column";
    return result;
  }

  int best = 0;
  for (const auto& [_, n] : seeds) best = std::max(best, n);
  for (const auto& [col, n] : seeds) {
    if (strategy == SelectionStrategy::select_best && n < best) continue;
    result.columns.push_back(col);
    result.overlap[col] = n;
  }
  for (const auto& col : result.columns) {
    ColumnCluster c;
    c.members = {col};
    c.representative = col;
    c.score = result.overlap[col];
    result.clusters.push_back(std::move(c));
  }
  return result;
}

}  // namespace

CandidateSet select_all(const QueryColumn& query_col, const DiscoveryIndex& index) {
  return baseline(query_col, index, SelectionStrategy::select_all);
}

CandidateSet select_best(const QueryColumn& query_col, const DiscoveryIndex& index) {
  return baseline(query_col, index, SelectionStrategy::select_best);
}

CandidateSet candidates_for(SelectionStrategy strategy, const QueryColumn& query_col,
                            const DiscoveryIndex& index, std::size_t theta,
                            std::optional<double> cluster_threshold) {
  switch (strategy) {
    case SelectionStrategy::select_all: return select_all(query_col, index);
    case SelectionStrategy::select_best: return select_best(query_col, index);
    case SelectionStrategy::cluster_top:
      return column_selection(query_col, index, theta, cluster_threshold);
  }
  throw std::invalid_argument("unknown selection strategy");
}

}  // namespace niffler

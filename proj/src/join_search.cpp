#include "niffler/join_search.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>
#include <stdexcept>

namespace niffler {

std::string JoinEdgeSpec::canonical_key() const {
  std::string a = to_string(left);
  std::string b = to_string(right);
  if (b < a) std::swap(a, b);
  return a + "~" + b;
}

std::string JoinGraph::canonical_key() const {
  std::string key;
  for (const auto& e : edges) {
    key += e.canonical_key();
    key += ";";
  }
  key += "|";
  for (const auto& p : projections) {
    key += to_string(p);
    key += ",";
  }
  return key;
}

namespace {

// All spanning trees over k labeled nodes, as lists of index pairs: every
// (k-1)-subset of the complete graph's edges that connects all nodes. k is at
// most the query width, so brute force is fine.
std::vector<std::vector<std::pair<int, int>>> spanning_tree_shapes(int k) {
  std::vector<std::pair<int, int>> all_pairs;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) all_pairs.emplace_back(i, j);
  }
  std::vector<std::vector<std::pair<int, int>>> shapes;
  if (k == 1) {
    shapes.push_back({});
    return shapes;
  }
  std::vector<int> choose(k - 1);
  auto connected = [&](const std::vector<std::pair<int, int>>& tree) {
    std::vector<int> parent(k);
    for (int i = 0; i < k; ++i) parent[i] = i;
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    int merges = 0;
    for (auto [a, b] : tree) {
      int ra = find(a), rb = find(b);
      if (ra != rb) {
        parent[ra] = rb;
        ++merges;
      }
    }
    return merges == k - 1;
  };
  std::vector<std::pair<int, int>> current;
  auto rec = [&](auto&& self, std::size_t start, int remaining) -> void {
    if (remaining == 0) {
      if (connected(current)) shapes.push_back(current);
      return;
    }
    for (std::size_t i = start; i + remaining <= all_pairs.size() + 0 && i < all_pairs.size();
         ++i) {
      current.push_back(all_pairs[i]);
      self(self, i + 1, remaining - 1);
      current.pop_back();
    }
  };
  rec(rec, 0, k - 1);
  return shapes;
}

bool edges_form_tree(const std::vector<JoinEdgeSpec>& edges, const std::set<TableRef>& nodes) {
  if (edges.size() + 1 != nodes.size()) return false;
  std::map<std::uint64_t, int> ids;
  for (const auto& n : nodes) ids.emplace(n.id, static_cast<int>(ids.size()));
  std::vector<int> parent(nodes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int merges = 0;
  for (const auto& e : edges) {
    int a = find(ids.at(e.left.table.id));
    int b = find(ids.at(e.right.table.id));
    if (a == b) return false;  // cycle
    parent[a] = b;
    ++merges;
  }
  return merges + 1 == static_cast<int>(nodes.size());
}

std::string group_key(const std::vector<TableRef>& tables,
                      const std::vector<ColumnRef>& combo) {
  std::set<std::string> cols;
  for (const auto& c : combo) cols.insert(to_string(c));
  std::string key;
  for (const auto& t : tables) {
    key += to_string(t);
    key += ",";
  }
  key += "|";
  for (const auto& c : cols) {
    key += c;
    key += ",";
  }
  return key;
}

}  // namespace

std::vector<JoinGraph> enumerate_join_graphs(const std::vector<CandidateSet>& candidates,
                                             const DiscoveryIndex& index, int max_hops,
                                             EnumerationStats* stats, bool use_prune_cache) {
  EnumerationStats local;
  EnumerationStats& st = stats ? *stats : local;

  for (const auto& cs : candidates) {
    if (cs.empty()) return {};
  }

  using TablePair = std::pair<std::uint64_t, std::uint64_t>;
  std::map<TablePair, std::vector<JoinPath>> path_cache;
  std::set<TablePair> unjoinable;
  auto pair_key = [](const TableRef& a, const TableRef& b) {
    return TablePair{std::min(a.id, b.id), std::max(a.id, b.id)};
  };
  auto paths_between = [&](const TableRef& a, const TableRef& b)
      -> const std::vector<JoinPath>& {
    TablePair key = pair_key(a, b);
    if (use_prune_cache) {
      auto it = path_cache.find(key);
      if (it != path_cache.end()) return it->second;
    }
    ++st.path_queries;
    auto paths = index.generate_join_paths(a, b, max_hops);
    auto [it, _] = path_cache.insert_or_assign(key, std::move(paths));
    return it->second;
  };

  std::map<std::string, JoinGraph> graphs;  // canonical key -> graph
  std::set<std::string> groups;

  std::vector<std::size_t> odometer(candidates.size(), 0);
  while (true) {
    std::vector<ColumnRef> combo;
    combo.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      combo.push_back(candidates[i].columns[odometer[i]]);
    }
    ++st.combinations;

    std::set<TableRef> table_set;
    for (const auto& c : combo) table_set.insert(c.table);
    std::vector<TableRef> tables(table_set.begin(), table_set.end());
    groups.insert(group_key(tables, combo));

    if (tables.size() == 1) {
      JoinGraph g;
      g.nodes = tables;
      g.projections = combo;
      graphs.try_emplace(g.canonical_key(), std::move(g));
    } else {
      bool pruned = false;
      if (use_prune_cache) {
        for (std::size_t i = 0; i < tables.size() && !pruned; ++i) {
          for (std::size_t j = i + 1; j < tables.size(); ++j) {
            if (unjoinable.count(pair_key(tables[i], tables[j]))) {
              pruned = true;
              break;
            }
          }
        }
      }
      if (!pruned) {
        for (std::size_t i = 0; i < tables.size() && !pruned; ++i) {
          for (std::size_t j = i + 1; j < tables.size(); ++j) {
            if (paths_between(tables[i], tables[j]).empty()) {
              if (use_prune_cache) unjoinable.insert(pair_key(tables[i], tables[j]));
              pruned = true;
              break;
            }
          }
        }
      }
      if (pruned) {
        ++st.pruned_combinations;
      } else {
        // Compose one path per spanning-tree edge; keep unions that stay trees
        // once intermediate tables enter the node set.
        int k = static_cast<int>(tables.size());
        for (const auto& shape : spanning_tree_shapes(k)) {
          std::vector<const std::vector<JoinPath>*> choices;
          choices.reserve(shape.size());
          for (auto [a, b] : shape) choices.push_back(&paths_between(tables[a], tables[b]));

          std::vector<std::size_t> pick(shape.size(), 0);
          while (true) {
            std::map<std::string, JoinEdgeSpec> edge_set;
            std::set<TableRef> nodes(table_set.begin(), table_set.end());
            for (std::size_t e = 0; e < shape.size(); ++e) {
              const JoinPath& path = (*choices[e])[pick[e]];
              for (const auto& hop : path.hops) {
                edge_set.try_emplace(
                    JoinEdgeSpec{hop.left, hop.right, hop.weight}.canonical_key(),
                    JoinEdgeSpec{hop.left, hop.right, hop.weight});
              }
              for (const auto& t : path.tables_touched) nodes.insert(t);
            }
            std::vector<JoinEdgeSpec> edges;
            edges.reserve(edge_set.size());
            for (auto& [_, e] : edge_set) edges.push_back(e);
            if (edges_form_tree(edges, nodes)) {
              JoinGraph g;
              g.nodes.assign(nodes.begin(), nodes.end());
              g.edges = std::move(edges);
              g.projections = combo;
              graphs.try_emplace(g.canonical_key(), std::move(g));
            }
            std::size_t d = 0;
            while (d < pick.size()) {
              if (++pick[d] < choices[d]->size()) break;
              pick[d] = 0;
              ++d;
            }
            if (d == pick.size()) break;
          }
        }
      }
    }

    std::size_t d = 0;
    while (d < odometer.size()) {
      if (++odometer[d] < candidates[d].columns.size()) break;
      odometer[d] = 0;
      ++d;
    }
    if (d == odometer.size()) break;
  }

  st.candidate_groups = groups.size();
  std::vector<JoinGraph> out;
  out.reserve(graphs.size());
  for (auto& [_, g] : graphs) out.push_back(std::move(g));
  return out;
}

double score_join_graph(const JoinGraph& graph, const DiscoveryIndex& index) {
  double avg = 1.0;
  if (!graph.edges.empty()) {
    double sum = 0.0;
    for (const auto& e : graph.edges) {
      const ColumnProfile* l = index.profile(e.left);
      const ColumnProfile* r = index.profile(e.right);
      sum += std::max(l ? l->uniqueness : 0.0, r ? r->uniqueness : 0.0);
    }
    avg = sum / static_cast<double>(graph.edges.size());
  }
  double tables = static_cast<double>(graph.nodes.size());
  return avg / (1.0 + std::log(1.0 + std::log(tables)));
}

void rank_join_graphs(std::vector<JoinGraph>& graphs, const DiscoveryIndex& index) {
  for (auto& g : graphs) g.score = score_join_graph(g, index);
  std::sort(graphs.begin(), graphs.end(), [](const JoinGraph& a, const JoinGraph& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
    return a.canonical_key() < b.canonical_key();
  });
}

// ---------- materialization ----------

namespace {

struct Relation {
  std::vector<ColumnRef> cols;
  std::vector<std::vector<std::string>> rows;  // normalized; "" = null

  int col_pos(const ColumnRef& c) const {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == c) return static_cast<int>(i);
    }
    return -1;
  }
};

Relation base_relation(const Table& table, const std::vector<ColumnRef>& needed) {
  Relation rel;
  rel.cols = needed;
  rel.rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::vector<std::string> out;
    out.reserve(needed.size());
    for (const auto& c : needed) {
      const auto& cell = row[c.column_index];
      std::optional<std::string> norm =
          cell ? normalize_cell(*cell, table.null_tokens) : std::nullopt;
      out.push_back(norm.value_or(""));
    }
    rel.rows.push_back(std::move(out));
  }
  return rel;
}

// Inner equi-join on normalized keys; null ("") keys never match.
Relation join_relations(const Relation& left, int left_key, const Relation& right,
                        int right_key) {
  Relation out;
  out.cols = left.cols;
  out.cols.insert(out.cols.end(), right.cols.begin(), right.cols.end());

  std::map<std::string, std::vector<std::size_t>> build;
  for (std::size_t i = 0; i < right.rows.size(); ++i) {
    const std::string& key = right.rows[i][right_key];
    if (key.empty()) continue;
    build[key].push_back(i);
  }
  for (const auto& lrow : left.rows) {
    const std::string& key = lrow[left_key];
    if (key.empty()) continue;
    auto it = build.find(key);
    if (it == build.end()) continue;
    for (std::size_t ri : it->second) {
      std::vector<std::string> row = lrow;
      row.insert(row.end(), right.rows[ri].begin(), right.rows[ri].end());
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

std::string synthesized_name(const ColumnRef& c) {
  if (c.header) return *c.header;
  return c.table.name + "[" + std::to_string(c.column_index) + "]";
}

std::optional<MaterializedView> materialize_one(const JoinGraph& graph,
                                                const PathlessCollection& collection,
                                                const std::string& id) {
  // Columns each table must carry: projections plus every join column.
  std::map<std::uint64_t, std::set<ColumnRef>> needed;
  for (const auto& p : graph.projections) needed[p.table.id].insert(p);
  for (const auto& e : graph.edges) {
    needed[e.left.table.id].insert(e.left);
    needed[e.right.table.id].insert(e.right);
  }

  std::map<std::uint64_t, Relation> relations;
  for (const auto& node : graph.nodes) {
    const Table* table = collection.find_table(node);
    if (table == nullptr) {
      std::cerr << "materialize: table missing from collection: " << to_string(node) << "\n";
      return std::nullopt;
    }
    auto it = needed.find(node.id);
    std::vector<ColumnRef> cols;
    if (it != needed.end()) cols.assign(it->second.begin(), it->second.end());
    if (cols.empty()) cols.push_back(make_column_ref(*table, 0));  // keep the node joinable
    relations.emplace(node.id, base_relation(*table, cols));
  }

  // Join leaves inward. Each join merges the leaf's relation into its
  // neighbor; with a tree this touches every edge exactly once.
  struct PendingEdge {
    JoinEdgeSpec spec;
    bool done = false;
  };
  std::vector<PendingEdge> pending;
  for (const auto& e : graph.edges) pending.push_back({e, false});

  std::map<std::uint64_t, int> degree;
  std::map<std::uint64_t, TableRef> node_refs;
  for (const auto& n : graph.nodes) {
    degree[n.id] = 0;
    node_refs[n.id] = n;
  }
  for (const auto& e : graph.edges) {
    ++degree[e.left.table.id];
    ++degree[e.right.table.id];
  }

  std::set<std::uint64_t> alive;
  for (const auto& n : graph.nodes) alive.insert(n.id);

  while (alive.size() > 1) {
    // deterministic leaf choice: smallest canonical ref among degree-1 nodes
    std::optional<TableRef> leaf;
    for (std::uint64_t id : alive) {
      if (degree[id] != 1) continue;
      if (!leaf || node_refs[id] < *leaf) leaf = node_refs[id];
    }
    if (!leaf) {
      std::cerr << "materialize: join graph is not a tree, skipping view " << id << "\n";
      return std::nullopt;
    }
    PendingEdge* edge = nullptr;
    for (auto& pe : pending) {
      if (pe.done) continue;
      if (pe.spec.left.table.id == leaf->id || pe.spec.right.table.id == leaf->id) {
        edge = &pe;
        break;
      }
    }
    if (edge == nullptr) return std::nullopt;

    ColumnRef leaf_col = edge->spec.left.table.id == leaf->id ? edge->spec.left : edge->spec.right;
    ColumnRef other_col = edge->spec.left.table.id == leaf->id ? edge->spec.right : edge->spec.left;
    std::uint64_t other = other_col.table.id;

    Relation& leaf_rel = relations.at(leaf->id);
    Relation& other_rel = relations.at(other);
    int lk = other_rel.col_pos(other_col);
    int rk = leaf_rel.col_pos(leaf_col);
    if (lk < 0 || rk < 0) {
      std::cerr << "materialize: join column missing, skipping view " << id << "\n";
      return std::nullopt;
    }
    relations[other] = join_relations(other_rel, lk, leaf_rel, rk);

    edge->done = true;
    alive.erase(leaf->id);
    --degree[other];
    for (auto& pe : pending) {
      if (pe.done) continue;
      // degrees only shrink via completed edges; nothing else to update
    }
  }

  const Relation& final_rel = relations.at(*alive.begin());
  MaterializedView view;
  view.id = id;
  for (const auto& p : graph.projections) view.schema.push_back(synthesized_name(p));

  std::vector<int> positions;
  for (const auto& p : graph.projections) {
    int pos = final_rel.col_pos(p);
    if (pos < 0) {
      std::cerr << "materialize: projection column lost, skipping view " << id << "\n";
      return std::nullopt;
    }
    positions.push_back(pos);
  }
  view.rows.reserve(final_rel.rows.size());
  for (const auto& row : final_rel.rows) {
    std::vector<std::string> out;
    out.reserve(positions.size());
    for (int pos : positions) out.push_back(row[pos]);
    view.rows.push_back(std::move(out));
  }
  view.cardinality = view.rows.size();
  std::sort(view.rows.begin(), view.rows.end());
  view.rows.erase(std::unique(view.rows.begin(), view.rows.end()), view.rows.end());
  view.provenance = graph;
  view.constituents = {view.id};
  return view;
}

}  // namespace

std::vector<MaterializedView> materialize(
    const std::vector<JoinGraph>& ranked, const PathlessCollection& collection,
    std::size_t gamma, std::size_t batch_size,
    const std::function<void(const std::vector<MaterializedView>&)>& on_batch) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<MaterializedView> views;
  std::vector<MaterializedView> batch;
  std::size_t limit = std::min(gamma, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    auto view = materialize_one(ranked[i], collection, "v" + std::to_string(i));
    if (!view) continue;
    batch.push_back(*view);
    views.push_back(std::move(*view));
    if (batch.size() == batch_size) {
      if (on_batch) on_batch(batch);
      batch.clear();
    }
  }
  if (!batch.empty() && on_batch) on_batch(batch);
  return views;
}

int overlap_score(const MaterializedView& view, const ExampleQuery& query) {
  int total = 0;
  std::size_t width = std::min(view.schema.size(), query.width());
  for (std::size_t i = 0; i < width; ++i) {
    std::set<std::string> present;
    for (const auto& row : view.rows) {
      if (!row[i].empty()) present.insert(row[i]);
    }
    for (const auto& e : query.columns[i].examples) {
      if (present.count(e)) ++total;
    }
  }
  return total;
}

}  // namespace niffler

#include "niffler/discovery_index.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace niffler {

namespace {

constexpr double kEps = 1e-12;

std::string hex_id(std::uint64_t id) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

std::uint64_t parse_hex_id(const std::string& s) {
  return std::strtoull(s.c_str(), nullptr, 16);
}

}  // namespace

double JoinPath::min_weight() const {
  double m = 1.0;
  for (const auto& h : hops) m = std::min(m, h.weight);
  return hops.empty() ? 0.0 : m;
}

std::string JoinPath::canonical_key() const {
  std::string key;
  for (const auto& h : hops) {
    key += to_string(h.left);
    key += "~";
    key += to_string(h.right);
    key += ";";
  }
  return key;
}

int levenshtein_distance(std::string_view a, std::string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  std::vector<int> prev(a.size() + 1), cur(a.size() + 1);
  for (std::size_t i = 0; i <= a.size(); ++i) prev[i] = static_cast<int>(i);
  for (std::size_t j = 1; j <= b.size(); ++j) {
    cur[0] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
      int sub = prev[i - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[i] = std::min({prev[i] + 1, cur[i - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[a.size()];
}

std::vector<std::string> header_tokens(std::string_view header) {
  std::vector<std::string> toks;
  auto norm = normalize_cell(header);
  if (!norm) return toks;
  toks.push_back(*norm);
  std::string frag;
  for (unsigned char c : *norm) {
    if (std::isalnum(c)) {
      frag += static_cast<char>(c);
    } else if (!frag.empty()) {
      toks.push_back(frag);
      frag.clear();
    }
  }
  if (!frag.empty()) toks.push_back(frag);
  std::sort(toks.begin(), toks.end());
  toks.erase(std::unique(toks.begin(), toks.end()), toks.end());
  return toks;
}

// ---------- build ----------

DiscoveryIndex DiscoveryIndex::build(const PathlessCollection& collection, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must be in (0, 1]");
  }
  if (collection.tables.empty()) throw std::runtime_error("empty collection");

  DiscoveryIndex ix;
  ix.threshold_ = threshold;
  ix.root_ = collection.root;
  ix.delimiter_ = collection.delimiter;
  ix.has_header_ = collection.has_header;
  ix.null_tokens_ = collection.null_tokens;

  for (const auto& table : collection.tables) {
    TableMeta meta;
    meta.ref = table.ref;
    meta.rel_path = table.rel_path;
    meta.arity = static_cast<std::uint32_t>(table.arity());
    ix.table_meta_.push_back(meta);
    ix.table_refs_.push_back(table.ref);

    for (std::uint32_t c = 0; c < table.arity(); ++c) {
      ColumnProfile p = profile_column(table, c);
      int id = static_cast<int>(ix.profiles_.size());
      ix.column_ids_[{table.ref.id, c}] = id;
      for (const auto& v : p.value_set) ix.value_postings_[v].push_back(id);
      if (p.column.header) {
        for (const auto& tok : header_tokens(*p.column.header)) {
          ix.name_postings_[tok].push_back(id);
        }
      }
      ix.profiles_.push_back(std::move(p));
    }
  }

  ix.build_edges();
  ix.rebuild_lookups();
  return ix;
}

void DiscoveryIndex::build_edges() {
  const auto n = static_cast<int>(profiles_.size());
  for (int a = 0; a < n; ++a) {
    if (profiles_[a].distinct_count < 2) continue;
    std::map<int, std::size_t> co;
    for (const auto& v : profiles_[a].value_set) {
      auto it = value_postings_.find(v);
      if (it == value_postings_.end()) continue;
      for (int b : it->second) {
        if (b != a) ++co[b];
      }
    }
    for (const auto& [b, shared] : co) {
      if (b < a) continue;  // each unordered pair handled once
      if (profiles_[b].distinct_count < 2) continue;
      if (profiles_[b].column.table.id == profiles_[a].column.table.id) continue;
      double size_a = static_cast<double>(profiles_[a].distinct_count);
      double size_b = static_cast<double>(profiles_[b].distinct_count);
      double cont_ab = static_cast<double>(shared) / size_a;
      double cont_ba = static_cast<double>(shared) / size_b;
      double jaccard = static_cast<double>(shared) / (size_a + size_b - static_cast<double>(shared));
      if (cont_ab >= threshold_ - kEps) {
        edges_.push_back({profiles_[a].column, profiles_[b].column,
                          EdgeKind::inclusion_dependency, cont_ab});
      }
      if (cont_ba >= threshold_ - kEps) {
        edges_.push_back({profiles_[b].column, profiles_[a].column,
                          EdgeKind::inclusion_dependency, cont_ba});
      }
      if (jaccard >= threshold_ - kEps) {
        edges_.push_back({profiles_[a].column, profiles_[b].column,
                          EdgeKind::content_similarity, jaccard});
        edges_.push_back({profiles_[b].column, profiles_[a].column,
                          EdgeKind::content_similarity, jaccard});
      }
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const ColumnEdge& x, const ColumnEdge& y) {
    if (x.src != y.src) return x.src < y.src;
    if (x.dst != y.dst) return x.dst < y.dst;
    return static_cast<int>(x.kind) < static_cast<int>(y.kind);
  });
}

void DiscoveryIndex::rebuild_lookups() {
  table_cols_.clear();
  for (int i = 0; i < static_cast<int>(profiles_.size()); ++i) {
    table_cols_[profiles_[i].column.table.id].push_back(i);
  }
  incl_adj_.assign(profiles_.size(), {});
  std::map<std::pair<int, int>, double> pair_weight;
  for (const auto& e : edges_) {
    if (e.kind != EdgeKind::inclusion_dependency) continue;
    int a = column_id(e.src);
    int b = column_id(e.dst);
    std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    auto [it, inserted] = pair_weight.try_emplace(key, e.weight);
    if (!inserted) it->second = std::max(it->second, e.weight);
  }
  for (const auto& [pair, w] : pair_weight) {
    incl_adj_[pair.first].emplace_back(pair.second, w);
    incl_adj_[pair.second].emplace_back(pair.first, w);
  }
}

int DiscoveryIndex::column_id(const ColumnRef& col) const {
  auto it = column_ids_.find({col.table.id, col.column_index});
  return it == column_ids_.end() ? -1 : it->second;
}

const ColumnProfile* DiscoveryIndex::profile(const ColumnRef& col) const {
  int id = column_id(col);
  return id < 0 ? nullptr : &profiles_[id];
}

// ---------- search ----------

std::vector<ColumnRef> DiscoveryIndex::search_keyword(std::string_view term, SearchTarget target,
                                                      std::optional<int> fuzzy,
                                                      std::vector<std::string>* warnings) const {
  if (fuzzy && *fuzzy < 0) throw std::invalid_argument("fuzzy distance must be >= 0");
  auto norm = normalize_cell(term, null_tokens_);
  if (!norm) {
    if (warnings) warnings->push_back("search term normalizes to null; nothing to search");
    return {};
  }

  std::set<int> hits;
  int dist = fuzzy.value_or(0);
  auto scan = [&](const std::map<std::string, std::vector<int>>& postings) {
    auto it = postings.find(*norm);
    if (it != postings.end()) hits.insert(it->second.begin(), it->second.end());
    if (dist > 0) {
      for (const auto& [key, cols] : postings) {
        auto len_gap = static_cast<int>(std::max(key.size(), norm->size()) -
                                        std::min(key.size(), norm->size()));
        if (len_gap > dist) continue;
        if (levenshtein_distance(key, *norm) <= dist) hits.insert(cols.begin(), cols.end());
      }
    }
  };
  if (target == SearchTarget::content || target == SearchTarget::both) scan(value_postings_);
  if (target == SearchTarget::attribute || target == SearchTarget::both) scan(name_postings_);

  std::vector<ColumnRef> out;
  out.reserve(hits.size());
  for (int id : hits) out.push_back(profiles_[id].column);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<ColumnRef, double>> DiscoveryIndex::neighbors(const ColumnRef& col,
                                                                    double threshold) const {
  if (threshold < threshold_ - kEps) {
    throw std::invalid_argument("threshold below index resolution");
  }
  int id = column_id(col);
  if (id < 0) throw std::invalid_argument("unknown column: " + to_string(col));
  std::vector<std::pair<ColumnRef, double>> out;
  for (const auto& [other, w] : incl_adj_[id]) {
    if (w >= threshold - kEps) out.emplace_back(profiles_[other].column, w);
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

// ---------- join paths ----------

std::vector<JoinPath> DiscoveryIndex::generate_join_paths(const TableRef& t1, const TableRef& t2,
                                                          int max_hops) const {
  if (max_hops < 1) throw std::invalid_argument("max_hops must be >= 1");
  if (t1.id == t2.id) throw std::invalid_argument("self-join paths not supported");
  auto it1 = table_cols_.find(t1.id);
  auto it2 = table_cols_.find(t2.id);
  if (it1 == table_cols_.end()) throw std::invalid_argument("unknown table: " + to_string(t1));
  if (it2 == table_cols_.end()) throw std::invalid_argument("unknown table: " + to_string(t2));

  std::vector<JoinPath> paths;
  std::vector<JoinHop> hops;
  std::vector<TableRef> touched{t1};
  std::set<std::uint64_t> visited{t1.id};

  auto table_ref_of = [&](int col) { return profiles_[col].column.table; };

  // Depth-first over inclusion-dependency links; tables never repeat, so every
  // emitted path is simple and ends at t2.
  auto dfs = [&](auto&& self, std::uint64_t current_table) -> void {
    if (static_cast<int>(hops.size()) >= max_hops) return;
    auto cols_it = table_cols_.find(current_table);
    if (cols_it == table_cols_.end()) return;
    for (int c : cols_it->second) {
      for (const auto& [other, w] : incl_adj_[c]) {
        TableRef next = table_ref_of(other);
        if (next.id == current_table) continue;  // self-join edges unused
        hops.push_back({profiles_[c].column, profiles_[other].column, w});
        touched.push_back(next);
        if (next.id == t2.id) {
          paths.push_back({hops, touched});
        } else if (visited.find(next.id) == visited.end()) {
          visited.insert(next.id);
          self(self, next.id);
          visited.erase(next.id);
        }
        touched.pop_back();
        hops.pop_back();
      }
    }
  };
  dfs(dfs, t1.id);

  std::sort(paths.begin(), paths.end(), [](const JoinPath& a, const JoinPath& b) {
    double wa = a.min_weight(), wb = b.min_weight();
    if (wa != wb) return wa > wb;
    if (a.hops.size() != b.hops.size()) return a.hops.size() < b.hops.size();
    return a.canonical_key() < b.canonical_key();
  });
  return paths;
}

// ---------- persistence ----------

LoadOptions DiscoveryIndex::collection_options() const {
  LoadOptions opts;
  opts.delimiter = delimiter_;
  opts.has_header = has_header_;
  opts.null_tokens = null_tokens_;
  return opts;
}

PathlessCollection DiscoveryIndex::reload_collection() const {
  if (root_.empty()) throw std::runtime_error("index was built from an in-memory collection");
  PathlessCollection col = load_collection(root_, collection_options());
  for (const auto& meta : table_meta_) {
    const Table* t = col.find_table(meta.ref.id);
    if (t == nullptr || t->arity() != meta.arity) {
      throw std::runtime_error("collection does not match index (stale index?)");
    }
  }
  return col;
}

void DiscoveryIndex::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "niffler-index";
  j["version"] = 1;
  j["threshold"] = threshold_;
  j["root"] = root_;
  j["options"] = {{"delimiter", std::string(1, delimiter_)},
                  {"has_header", has_header_},
                  {"null_tokens", null_tokens_}};

  nlohmann::json tables = nlohmann::json::array();
  for (const auto& m : table_meta_) {
    tables.push_back({{"id", hex_id(m.ref.id)},
                      {"name", m.ref.name},
                      {"rel_path", m.rel_path},
                      {"arity", m.arity}});
  }
  j["tables"] = std::move(tables);

  nlohmann::json cols = nlohmann::json::array();
  for (const auto& p : profiles_) {
    nlohmann::json c = {{"table", hex_id(p.column.table.id)},
                        {"index", p.column.column_index},
                        {"total", p.total_count},
                        {"type", std::string(to_string(p.type_tag))}};
    if (p.column.header) c["header"] = *p.column.header;
    cols.push_back(std::move(c));
  }
  j["columns"] = std::move(cols);

  nlohmann::json values = nlohmann::json::array();
  for (const auto& [v, ids] : value_postings_) values.push_back({v, ids});
  j["values"] = std::move(values);

  nlohmann::json names = nlohmann::json::array();
  for (const auto& [tok, ids] : name_postings_) names.push_back({tok, ids});
  j["names"] = std::move(names);

  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : edges_) {
    edges.push_back({column_id(e.src), column_id(e.dst),
                     e.kind == EdgeKind::inclusion_dependency ? "i" : "s", e.weight});
  }
  j["edges"] = std::move(edges);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write index file: " + path);
  out << j.dump() << '\n';
}

DiscoveryIndex DiscoveryIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open index file: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != std::string("niffler-index") || j.value("version", 0) != 1) {
    throw std::runtime_error("unrecognized index file format");
  }

  DiscoveryIndex ix;
  ix.threshold_ = j.at("threshold").get<double>();
  ix.root_ = j.value("root", "");
  const auto& opts = j.at("options");
  ix.delimiter_ = opts.at("delimiter").get<std::string>().at(0);
  ix.has_header_ = opts.at("has_header").get<bool>();
  ix.null_tokens_ = opts.at("null_tokens").get<std::vector<std::string>>();

  std::map<std::uint64_t, TableRef> refs_by_id;
  for (const auto& t : j.at("tables")) {
    TableMeta m;
    m.ref.id = parse_hex_id(t.at("id").get<std::string>());
    m.ref.name = t.at("name").get<std::string>();
    m.rel_path = t.at("rel_path").get<std::string>();
    m.arity = t.at("arity").get<std::uint32_t>();
    refs_by_id[m.ref.id] = m.ref;
    ix.table_meta_.push_back(m);
    ix.table_refs_.push_back(m.ref);
  }

  for (const auto& c : j.at("columns")) {
    ColumnProfile p;
    std::uint64_t tid = parse_hex_id(c.at("table").get<std::string>());
    p.column.table = refs_by_id.at(tid);
    p.column.column_index = c.at("index").get<std::uint32_t>();
    if (c.contains("header")) p.column.header = c.at("header").get<std::string>();
    p.total_count = c.at("total").get<std::size_t>();
    p.type_tag = type_tag_from_string(c.at("type").get<std::string>()).value_or(TypeTag::textual);
    int id = static_cast<int>(ix.profiles_.size());
    ix.column_ids_[{tid, p.column.column_index}] = id;
    ix.profiles_.push_back(std::move(p));
  }

  for (const auto& entry : j.at("values")) {
    std::string v = entry.at(0).get<std::string>();
    auto ids = entry.at(1).get<std::vector<int>>();
    for (int id : ids) ix.profiles_[id].value_set.push_back(v);
    ix.value_postings_[std::move(v)] = std::move(ids);
  }
  for (auto& p : ix.profiles_) {
    // postings are iterated in sorted order, so value sets arrive sorted
    p.distinct_count = p.value_set.size();
    p.uniqueness = static_cast<double>(p.distinct_count) /
                   static_cast<double>(std::max<std::size_t>(p.total_count, 1));
  }

  for (const auto& entry : j.at("names")) {
    ix.name_postings_[entry.at(0).get<std::string>()] = entry.at(1).get<std::vector<int>>();
  }

  for (const auto& e : j.at("edges")) {
    ColumnEdge edge;
    edge.src = ix.profiles_.at(e.at(0).get<int>()).column;
    edge.dst = ix.profiles_.at(e.at(1).get<int>()).column;
    edge.kind = e.at(2).get<std::string>() == "i" ? EdgeKind::inclusion_dependency
                                                  : EdgeKind::content_similarity;
    edge.weight = e.at(3).get<double>();
    ix.edges_.push_back(std::move(edge));
  }

  ix.rebuild_lookups();
  return ix;
}

DiscoveryIndex build_index(const PathlessCollection& collection, double threshold) {
  return DiscoveryIndex::build(collection, threshold);
}

}  // namespace niffler

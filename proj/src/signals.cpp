#include "niffler/signals.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "niffler/hash.hpp"

namespace niffler {

std::uint64_t row_hash(const std::vector<std::string>& row) {
  std::uint64_t sum = 0;
  for (std::size_t pos = 0; pos < row.size(); ++pos) {
    std::uint64_t h = fnv1a64_u64(pos);
    h ^= 0x1f;
    h *= kFnvPrime;
    h = fnv1a64(row[pos], h);
    sum += h;  // wraps mod 2^64
  }
  return sum;
}

std::uint64_t view_hash(const MaterializedView& view) {
  std::uint64_t sum = 0;
  for (const auto& row : view.rows) sum += row_hash(row);
  return sum;
}

namespace {

using Row = std::vector<std::string>;
using KeyValue = std::vector<std::string>;

// Ascending-size, then lexicographic enumeration of attribute subsets.
std::vector<std::vector<std::size_t>> key_subsets(std::size_t width, std::size_t k_max) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> current;
  auto rec = [&](auto&& self, std::size_t start, std::size_t remaining) -> void {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (std::size_t i = start; i < width; ++i) {
      current.push_back(i);
      self(self, i + 1, remaining - 1);
      current.pop_back();
    }
  };
  for (std::size_t size = 1; size <= std::min(width, k_max); ++size) rec(rec, 0, size);
  return out;
}

KeyValue project_key(const Row& row, const std::vector<std::size_t>& key) {
  KeyValue kv;
  kv.reserve(key.size());
  for (std::size_t p : key) kv.push_back(row[p]);
  return kv;
}

// nullopt when the key does not uniquely identify rows in the view.
std::optional<std::map<KeyValue, const Row*>> key_rows(const MaterializedView& view,
                                                       const std::vector<std::size_t>& key) {
  std::map<KeyValue, const Row*> m;
  for (const auto& row : view.rows) {
    auto [it, inserted] = m.try_emplace(project_key(row, key), &row);
    if (!inserted) return std::nullopt;
  }
  return m;
}

}  // namespace

FourCResult classify_4c(const std::vector<MaterializedView>& views, std::size_t k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  FourCResult result;
  result.k_max = k_max;

  std::map<std::vector<std::string>, std::vector<int>> by_schema;
  for (int i = 0; i < static_cast<int>(views.size()); ++i) {
    by_schema[views[i].schema].push_back(i);
  }

  for (const auto& [schema, members] : by_schema) {
    SchemaGroup group;
    group.schema = schema;
    for (int m : members) group.view_ids.push_back(views[m].id);

    // Compatible: bucket by view hash, verify row sets cell-level on equality.
    std::vector<std::vector<int>> classes;
    std::vector<std::uint64_t> hashes;
    for (int m : members) {
      std::uint64_t h = view_hash(views[m]);
      bool placed = false;
      for (std::size_t c = 0; c < classes.size(); ++c) {
        if (hashes[c] != h) continue;
        if (views[classes[c].front()].rows == views[m].rows) {
          classes[c].push_back(m);
          placed = true;
          break;
        }
      }
      if (!placed) {
        classes.push_back({m});
        hashes.push_back(h);
      }
    }
    std::vector<int> reps;
    for (const auto& cls : classes) {
      CompatibleGroup cg;
      int rep = cls.front();
      for (int m : cls) {
        cg.view_ids.push_back(views[m].id);
        if (views[m].cardinality > views[rep].cardinality) rep = m;
      }
      cg.representative = views[rep].id;
      reps.push_back(rep);
      group.compatible_groups.push_back(std::move(cg));
    }

    // Contained: row-hash set containment among representatives, verified on
    // the sorted row vectors. Equal sets cannot appear here.
    std::vector<std::vector<std::uint64_t>> rep_row_hashes(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
      for (const auto& row : views[reps[i]].rows) rep_row_hashes[i].push_back(row_hash(row));
      std::sort(rep_row_hashes[i].begin(), rep_row_hashes[i].end());
    }
    for (std::size_t i = 0; i < reps.size(); ++i) {
      for (std::size_t j = 0; j < reps.size(); ++j) {
        if (i == j) continue;
        const auto& outer = views[reps[i]].rows;
        const auto& inner = views[reps[j]].rows;
        if (inner.size() >= outer.size()) continue;
        if (!std::includes(rep_row_hashes[i].begin(), rep_row_hashes[i].end(),
                           rep_row_hashes[j].begin(), rep_row_hashes[j].end())) {
          continue;
        }
        if (std::includes(outer.begin(), outer.end(), inner.begin(), inner.end())) {
          group.contained_pairs.push_back({views[reps[i]].id, views[reps[j]].id});
        }
      }
    }

    // Complementary / contradictory: representative pairs with mutual
    // differences, related per shared candidate key. Zero-row views excluded.
    auto keys = key_subsets(schema.size(), k_max);
    for (std::size_t i = 0; i < reps.size(); ++i) {
      for (std::size_t j = i + 1; j < reps.size(); ++j) {
        const MaterializedView& va = views[reps[i]];
        const MaterializedView& vb = views[reps[j]];
        if (va.rows.empty() || vb.rows.empty()) continue;
        bool a_minus_b = !std::includes(vb.rows.begin(), vb.rows.end(), va.rows.begin(),
                                        va.rows.end());
        bool b_minus_a = !std::includes(va.rows.begin(), va.rows.end(), vb.rows.begin(),
                                        vb.rows.end());
        if (!a_minus_b || !b_minus_a) continue;

        for (const auto& key : keys) {
          auto rows_a = key_rows(va, key);
          if (!rows_a) continue;
          auto rows_b = key_rows(vb, key);
          if (!rows_b) continue;

          std::vector<KeyValue> conflicts;
          std::vector<KeyValue> a_only;
          std::vector<KeyValue> b_only;
          for (const auto& [kv, row] : *rows_a) {
            auto it = rows_b->find(kv);
            if (it == rows_b->end()) {
              a_only.push_back(kv);
            } else if (*it->second != *row) {
              conflicts.push_back(kv);
            }
          }
          for (const auto& [kv, _] : *rows_b) {
            if (!rows_a->count(kv)) b_only.push_back(kv);
          }

          if (!conflicts.empty()) {
            group.contradictory.push_back({key, va.id, vb.id, std::move(conflicts)});
          } else if (!a_only.empty() && !b_only.empty()) {
            group.complementary.push_back({key, va.id, vb.id, std::move(a_only),
                                           std::move(b_only)});
          }
        }
      }
    }

    result.groups.push_back(std::move(group));
  }
  return result;
}

// ---------- reduction ----------

std::vector<MaterializedView> reduce_view_space(const FourCResult& fourc,
                                                const std::vector<MaterializedView>& views) {
  std::map<std::string, int> position;
  for (int i = 0; i < static_cast<int>(views.size()); ++i) position[views[i].id] = i;

  std::set<std::string> surviving;
  std::vector<MaterializedView> unions;

  for (const auto& group : fourc.groups) {
    std::vector<std::string> reps;
    for (const auto& cg : group.compatible_groups) reps.push_back(cg.representative);

    std::set<std::string> dropped;
    for (const auto& pair : group.contained_pairs) dropped.insert(pair.containee);

    std::vector<std::string> alive;
    for (const auto& rep : reps) {
      if (!dropped.count(rep)) alive.push_back(rep);
    }
    std::sort(alive.begin(), alive.end(),
              [&](const std::string& a, const std::string& b) {
                return position.at(a) < position.at(b);
              });

    // Pairwise-complementary lookup per key.
    std::map<std::vector<std::size_t>, std::set<std::pair<std::string, std::string>>> comp;
    for (const auto& rel : group.complementary) {
      auto ab = std::minmax(rel.view_a, rel.view_b);
      comp[rel.key].insert({ab.first, ab.second});
    }
    auto complementary_on = [&](const std::vector<std::size_t>& key, const std::string& a,
                                const std::string& b) {
      auto it = comp.find(key);
      if (it == comp.end()) return false;
      auto ab = std::minmax(a, b);
      return it->second.count({ab.first, ab.second}) > 0;
    };

    std::set<std::string> consumed;
    for (const auto& [key, _] : comp) {
      for (std::size_t i = 0; i < alive.size(); ++i) {
        if (consumed.count(alive[i])) continue;
        std::vector<std::string> family{alive[i]};
        for (std::size_t j = i + 1; j < alive.size(); ++j) {
          if (consumed.count(alive[j])) continue;
          bool fits = true;
          for (const auto& m : family) {
            if (!complementary_on(key, m, alive[j])) {
              fits = false;
              break;
            }
          }
          if (fits) family.push_back(alive[j]);
        }
        if (family.size() < 2) continue;

        MaterializedView merged;
        merged.id = "u:";
        for (std::size_t f = 0; f < family.size(); ++f) {
          if (f) merged.id += "+";
          merged.id += family[f];
          consumed.insert(family[f]);
        }
        merged.schema = group.schema;
        for (const auto& member : family) {
          const auto& rows = views[position.at(member)].rows;
          merged.rows.insert(merged.rows.end(), rows.begin(), rows.end());
          merged.constituents.push_back(member);
        }
        std::sort(merged.rows.begin(), merged.rows.end());
        merged.rows.erase(std::unique(merged.rows.begin(), merged.rows.end()),
                          merged.rows.end());
        merged.cardinality = merged.rows.size();
        unions.push_back(std::move(merged));
      }
    }

    for (const auto& id : alive) {
      if (!consumed.count(id)) surviving.insert(id);
    }
  }

  std::vector<MaterializedView> out;
  for (const auto& v : views) {
    if (surviving.count(v.id)) out.push_back(v);
  }
  for (auto& u : unions) out.push_back(std::move(u));
  return out;
}

// ---------- signals ----------

std::vector<ContradictorySignal> generate_contradictory_signals(
    const FourCResult& fourc, const std::vector<MaterializedView>& views,
    std::size_t sample_size) {
  std::map<std::string, int> position;
  for (int i = 0; i < static_cast<int>(views.size()); ++i) position[views[i].id] = i;

  std::vector<ContradictorySignal> out;

  for (const auto& group : fourc.groups) {
    // Per-key row lookup for every view in the group; nullopt when the key is
    // not valid for that view.
    std::map<std::vector<std::size_t>,
             std::vector<std::pair<int, std::map<KeyValue, const Row*>>>>
        holders;
    auto holders_for = [&](const std::vector<std::size_t>& key)
        -> const std::vector<std::pair<int, std::map<KeyValue, const Row*>>>& {
      auto it = holders.find(key);
      if (it != holders.end()) return it->second;
      std::vector<std::pair<int, std::map<KeyValue, const Row*>>> list;
      for (const auto& id : group.view_ids) {
        int pos = position.at(id);
        auto rows = key_rows(views[pos], key);
        if (rows) list.emplace_back(pos, std::move(*rows));
      }
      return holders.emplace(key, std::move(list)).first->second;
    };

    // signal identity -> accumulated samples
    struct Accum {
      std::vector<std::size_t> key;
      std::vector<int> set_a;
      std::vector<int> set_b;
      std::map<KeyValue, SignalSample> samples;
    };
    std::map<std::tuple<std::vector<std::size_t>, std::vector<int>, std::vector<int>>, Accum>
        merged;

    for (const auto& rec : group.contradictory) {
      int pa = position.at(rec.view_a);
      int pb = position.at(rec.view_b);
      auto rows_a = key_rows(views[pa], rec.key);
      auto rows_b = key_rows(views[pb], rec.key);
      if (!rows_a || !rows_b) continue;  // cannot happen for classify output

      for (const auto& kv : rec.conflicting_key_values) {
        Row ra = *rows_a->at(kv);
        Row rb = *rows_b->at(kv);
        if (rb < ra) std::swap(ra, rb);  // variant pair is unordered

        std::vector<int> carriers_a;
        std::vector<int> carriers_b;
        for (const auto& [pos, rows] : holders_for(rec.key)) {
          auto it = rows.find(kv);
          if (it == rows.end()) continue;
          if (*it->second == ra) {
            carriers_a.push_back(pos);
          } else if (*it->second == rb) {
            carriers_b.push_back(pos);
          }
        }
        if (carriers_a.empty() || carriers_b.empty()) continue;
        if (carriers_b < carriers_a) {
          std::swap(carriers_a, carriers_b);
          std::swap(ra, rb);
        }

        Accum& acc = merged[{rec.key, carriers_a, carriers_b}];
        acc.key = rec.key;
        acc.set_a = carriers_a;
        acc.set_b = carriers_b;
        acc.samples.try_emplace(kv, SignalSample{kv, ra, rb});
      }
    }

    for (auto& [_, acc] : merged) {
      ContradictorySignal sig;
      sig.schema = group.schema;
      sig.key = acc.key;
      for (int pos : acc.set_a) sig.set_a.push_back(views[pos].id);
      for (int pos : acc.set_b) sig.set_b.push_back(views[pos].id);
      for (const auto& [kv, sample] : acc.samples) {
        if (sig.samples.size() >= sample_size) break;
        sig.samples.push_back(sample);
      }
      double a = static_cast<double>(sig.set_a.size());
      double b = static_cast<double>(sig.set_b.size());
      sig.discrimination = 2.0 * a * b / (a + b);
      out.push_back(std::move(sig));
    }
  }

  std::sort(out.begin(), out.end(), [](const ContradictorySignal& x, const ContradictorySignal& y) {
    if (x.discrimination != y.discrimination) return x.discrimination > y.discrimination;
    std::size_t ux = x.set_a.size() + x.set_b.size();
    std::size_t uy = y.set_a.size() + y.set_b.size();
    if (ux != uy) return ux < uy;
    if (x.key != y.key) return x.key < y.key;
    return x.set_a < y.set_a;
  });
  return out;
}

std::set<std::string> apply_signal_selection(const ContradictorySignal& signal, SignalSide side,
                                             const std::set<std::string>& surviving) {
  std::set<std::string> out = surviving;
  const std::vector<std::string>* losers = nullptr;
  if (side == SignalSide::a) losers = &signal.set_b;
  if (side == SignalSide::b) losers = &signal.set_a;
  if (losers) {
    for (const auto& id : *losers) out.erase(id);
  }
  return out;
}

// ---------- bundle ----------

SignalBundle build_signal_bundle(const std::vector<MaterializedView>& views,
                                 const ExampleQuery& query, const FourCResult& fourc,
                                 const std::vector<ContradictorySignal>& signals) {
  SignalBundle bundle;
  for (const auto& c : query.columns) bundle.query_attributes.push_back(c.name);
  for (const auto& v : views) {
    ViewMeta meta;
    meta.id = v.id;
    meta.schema = v.schema;
    if (v.provenance) {
      for (const auto& n : v.provenance->nodes) meta.tables.push_back(n.name);
      for (const auto& e : v.provenance->edges) {
        meta.join_edges.emplace_back(to_string(e.left), to_string(e.right));
      }
    }
    meta.overlap = v.overlap;
    meta.cardinality = v.cardinality;
    meta.row_count = v.rows.size();
    meta.empty = v.is_empty();
    bundle.views.push_back(std::move(meta));
  }
  bundle.fourc = fourc;
  bundle.signals = signals;

  auto reduced = reduce_view_space(fourc, views);
  for (const auto& v : reduced) bundle.reduced_view_ids.push_back(v.id);
  return bundle;
}

namespace {

nlohmann::json key_to_json(const std::vector<std::size_t>& key) {
  return nlohmann::json(key);
}

nlohmann::json key_values_to_json(const std::vector<KeyValue>& kvs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& kv : kvs) arr.push_back(kv);
  return arr;
}

std::vector<KeyValue> key_values_from_json(const nlohmann::json& arr) {
  std::vector<KeyValue> out;
  for (const auto& kv : arr) out.push_back(kv.get<KeyValue>());
  return out;
}

}  // namespace

nlohmann::json bundle_to_json(const SignalBundle& bundle) {
  nlohmann::json j;
  j["format"] = "niffler-bundle";
  j["version"] = 1;
  j["query_attributes"] = bundle.query_attributes;

  nlohmann::json views = nlohmann::json::array();
  for (const auto& v : bundle.views) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [l, r] : v.join_edges) edges.push_back({l, r});
    views.push_back({{"id", v.id},
                     {"schema", v.schema},
                     {"tables", v.tables},
                     {"join_edges", std::move(edges)},
                     {"overlap", v.overlap},
                     {"cardinality", v.cardinality},
                     {"row_count", v.row_count},
                     {"empty", v.empty}});
  }
  j["views"] = std::move(views);

  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : bundle.fourc.groups) {
    nlohmann::json jg;
    jg["schema"] = g.schema;
    jg["view_ids"] = g.view_ids;
    nlohmann::json compat = nlohmann::json::array();
    for (const auto& cg : g.compatible_groups) {
      compat.push_back({{"views", cg.view_ids}, {"representative", cg.representative}});
    }
    jg["compatible_groups"] = std::move(compat);
    nlohmann::json contained = nlohmann::json::array();
    for (const auto& p : g.contained_pairs) contained.push_back({p.container, p.containee});
    jg["contained_pairs"] = std::move(contained);
    nlohmann::json comp = nlohmann::json::array();
    for (const auto& rel : g.complementary) {
      comp.push_back({{"key", key_to_json(rel.key)},
                      {"view_a", rel.view_a},
                      {"view_b", rel.view_b},
                      {"a_only", key_values_to_json(rel.a_only_key_values)},
                      {"b_only", key_values_to_json(rel.b_only_key_values)}});
    }
    jg["complementary"] = std::move(comp);
    nlohmann::json contra = nlohmann::json::array();
    for (const auto& rel : g.contradictory) {
      contra.push_back({{"key", key_to_json(rel.key)},
                        {"view_a", rel.view_a},
                        {"view_b", rel.view_b},
                        {"conflicts", key_values_to_json(rel.conflicting_key_values)}});
    }
    jg["contradictory"] = std::move(contra);
    groups.push_back(std::move(jg));
  }
  j["fourc"] = {{"k_max", bundle.fourc.k_max}, {"groups", std::move(groups)}};

  nlohmann::json signals = nlohmann::json::array();
  for (const auto& s : bundle.signals) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& sample : s.samples) {
      samples.push_back(
          {{"key_value", sample.key_value}, {"row_a", sample.row_a}, {"row_b", sample.row_b}});
    }
    signals.push_back({{"schema", s.schema},
                       {"key", key_to_json(s.key)},
                       {"samples", std::move(samples)},
                       {"set_a", s.set_a},
                       {"set_b", s.set_b},
                       {"discrimination", s.discrimination}});
  }
  j["signals"] = std::move(signals);
  j["reduced_view_ids"] = bundle.reduced_view_ids;
  return j;
}

SignalBundle bundle_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != std::string("niffler-bundle") || j.value("version", 0) != 1) {
    throw std::runtime_error("unrecognized bundle format");
  }
  SignalBundle bundle;
  bundle.query_attributes = j.at("query_attributes").get<std::vector<std::string>>();

  for (const auto& v : j.at("views")) {
    ViewMeta meta;
    meta.id = v.at("id").get<std::string>();
    meta.schema = v.at("schema").get<std::vector<std::string>>();
    meta.tables = v.at("tables").get<std::vector<std::string>>();
    for (const auto& e : v.at("join_edges")) {
      meta.join_edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    }
    meta.overlap = v.at("overlap").get<int>();
    meta.cardinality = v.at("cardinality").get<std::size_t>();
    meta.row_count = v.at("row_count").get<std::size_t>();
    meta.empty = v.at("empty").get<bool>();
    bundle.views.push_back(std::move(meta));
  }

  const auto& fourc = j.at("fourc");
  bundle.fourc.k_max = fourc.at("k_max").get<std::size_t>();
  for (const auto& g : fourc.at("groups")) {
    SchemaGroup group;
    group.schema = g.at("schema").get<std::vector<std::string>>();
    group.view_ids = g.at("view_ids").get<std::vector<std::string>>();
    for (const auto& cg : g.at("compatible_groups")) {
      group.compatible_groups.push_back({cg.at("views").get<std::vector<std::string>>(),
                                         cg.at("representative").get<std::string>()});
    }
    for (const auto& p : g.at("contained_pairs")) {
      group.contained_pairs.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
    }
    for (const auto& rel : g.at("complementary")) {
      group.complementary.push_back({rel.at("key").get<std::vector<std::size_t>>(),
                                     rel.at("view_a").get<std::string>(),
                                     rel.at("view_b").get<std::string>(),
                                     key_values_from_json(rel.at("a_only")),
                                     key_values_from_json(rel.at("b_only"))});
    }
    for (const auto& rel : g.at("contradictory")) {
      group.contradictory.push_back({rel.at("key").get<std::vector<std::size_t>>(),
                                     rel.at("view_a").get<std::string>(),
                                     rel.at("view_b").get<std::string>(),
                                     key_values_from_json(rel.at("conflicts"))});
    }
    bundle.fourc.groups.push_back(std::move(group));
  }

  for (const auto& s : j.at("signals")) {
    ContradictorySignal sig;
    sig.schema = s.at("schema").get<std::vector<std::string>>();
    sig.key = s.at("key").get<std::vector<std::size_t>>();
    for (const auto& sample : s.at("samples")) {
      sig.samples.push_back({sample.at("key_value").get<std::vector<std::string>>(),
                             sample.at("row_a").get<std::vector<std::string>>(),
                             sample.at("row_b").get<std::vector<std::string>>()});
    }
    sig.set_a = s.at("set_a").get<std::vector<std::string>>();
    sig.set_b = s.at("set_b").get<std::vector<std::string>>();
    sig.discrimination = s.at("discrimination").get<double>();
    bundle.signals.push_back(std::move(sig));
  }

  bundle.reduced_view_ids = j.at("reduced_view_ids").get<std::vector<std::string>>();
  return bundle;
}

}  // namespace niffler

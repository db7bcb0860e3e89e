#include <doctest.h>

#include <random>
#include <set>

#include "niffler/signals.hpp"
#include "oracles.hpp"

using namespace niffler;

namespace {

MaterializedView view_of(const std::string& id, std::vector<std::string> schema,
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

// Two views disagreeing on every valid shared key, so no key offers a
// conflict-free complement: the pair is contradictory and nothing else.
std::vector<MaterializedView> pure_contradiction() {
  return {view_of("v0", {"name", "addr", "zip"},
                  {{"a", "p", "1"}, {"b", "q", "2"}, {"c", "r", "3"}, {"d", "s", "4"}}),
          view_of("v1", {"name", "addr", "zip"},
                  {{"a", "p", "9"}, {"b", "x", "2"}, {"c", "r", "3"}, {"e", "s", "4"}})};
}

const ContradictorySignal* signal_with_key(const std::vector<ContradictorySignal>& signals,
                                           const std::vector<std::size_t>& key) {
  for (const auto& s : signals)
    if (s.key == key) return &s;
  return nullptr;
}

}  // namespace

TEST_SUITE("signals") {

TEST_CASE("row hashes are positional and view hashes are order-free") {
  std::vector<std::string> ab = {"a", "b"};
  std::vector<std::string> ba = {"b", "a"};
  CHECK(row_hash(ab) == row_hash({"a", "b"}));
  CHECK(row_hash(ab) != row_hash(ba));

  MaterializedView v1 = view_of("x", {"c0", "c1"}, {{"a", "b"}, {"c", "d"}});
  MaterializedView v2 = v1;
  std::reverse(v2.rows.begin(), v2.rows.end());
  CHECK(view_hash(v1) == view_hash(v2));
  MaterializedView v3 = view_of("y", {"c0", "c1"}, {{"a", "b"}, {"c", "e"}});
  CHECK(view_hash(v1) != view_hash(v3));
}

TEST_CASE("identical row sets collapse into one compatible group") {
  std::vector<MaterializedView> views = {
      view_of("v0", {"k", "v"}, {{"a", "1"}, {"b", "2"}}, 5),
      view_of("v1", {"k", "v"}, {{"b", "2"}, {"a", "1"}}, 9),
      view_of("v2", {"k", "v"}, {{"a", "1"}, {"b", "2"}}, 9)};
  FourCResult fourc = classify_4c(views);
  REQUIRE(fourc.groups.size() == 1);
  REQUIRE(fourc.groups[0].compatible_groups.size() == 1);
  const CompatibleGroup& g = fourc.groups[0].compatible_groups[0];
  CHECK(g.view_ids == std::vector<std::string>{"v0", "v1", "v2"});
  CHECK(g.representative == "v1");  // largest cardinality, earliest on ties

  auto reduced = reduce_view_space(fourc, views);
  REQUIRE(reduced.size() == 1);
  CHECK(reduced[0].id == "v1");
}

TEST_CASE("proper row subsets become contained pairs") {
  std::vector<MaterializedView> views = {
      view_of("big", {"k", "v"}, {{"a", "1"}, {"b", "2"}, {"c", "3"}}),
      view_of("mid", {"k", "v"}, {{"a", "1"}, {"b", "2"}}),
      view_of("small", {"k", "v"}, {{"a", "1"}})};
  FourCResult fourc = classify_4c(views);
  REQUIRE(fourc.groups.size() == 1);
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& p : fourc.groups[0].contained_pairs)
    pairs.insert({p.container, p.containee});
  CHECK(pairs == std::set<std::pair<std::string, std::string>>{
                     {"big", "mid"}, {"big", "small"}, {"mid", "small"}});

  auto reduced = reduce_view_space(fourc, views);
  REQUIRE(reduced.size() == 1);
  CHECK(reduced[0].id == "big");
}

TEST_CASE("zero-row views count as contained and skip key analysis") {
  std::vector<MaterializedView> views = {
      view_of("full", {"k", "v"}, {{"a", "1"}}),
      view_of("none", {"k", "v"}, {})};
  FourCResult fourc = classify_4c(views);
  REQUIRE(fourc.groups.size() == 1);
  REQUIRE(fourc.groups[0].contained_pairs.size() == 1);
  CHECK(fourc.groups[0].contained_pairs[0].container == "full");
  CHECK(fourc.groups[0].contained_pairs[0].containee == "none");
  CHECK(fourc.groups[0].complementary.empty());
  CHECK(fourc.groups[0].contradictory.empty());
}

TEST_CASE("same key value with different rows is contradictory") {
  std::vector<MaterializedView> views = {
      view_of("v0", {"name", "addr"}, {{"alice", "12 work rd"}}),
      view_of("v1", {"name", "addr"}, {{"alice", "34 home ave"}})};
  FourCResult fourc = classify_4c(views);
  REQUIRE(fourc.groups.size() == 1);
  const SchemaGroup& g = fourc.groups[0];

  bool on_name = false;
  for (const auto& rel : g.contradictory) {
    if (rel.key == std::vector<std::size_t>{0}) {
      on_name = true;
      REQUIRE(rel.conflicting_key_values.size() == 1);
      CHECK(rel.conflicting_key_values[0] == std::vector<std::string>{"alice"});
    }
  }
  CHECK(on_name);

  // the address columns never share a value, so that key splits them cleanly
  bool addr_complementary = false;
  for (const auto& rel : g.complementary)
    if (rel.key == std::vector<std::size_t>{1}) addr_complementary = true;
  CHECK(addr_complementary);

  auto signals = generate_contradictory_signals(fourc, views);
  REQUIRE(signals.size() == 1);
  const ContradictorySignal& s = signals[0];
  CHECK(s.key == std::vector<std::size_t>{0});
  CHECK(s.set_a == std::vector<std::string>{"v0"});
  CHECK(s.set_b == std::vector<std::string>{"v1"});
  CHECK(s.discrimination == doctest::Approx(1.0));
  REQUIRE(s.samples.size() == 1);
  CHECK(s.samples[0].key_value == std::vector<std::string>{"alice"});
  CHECK(s.samples[0].row_a == std::vector<std::string>{"alice", "12 work rd"});
  CHECK(s.samples[0].row_b == std::vector<std::string>{"alice", "34 home ave"});
}

TEST_CASE("a pair conflicting on every valid key has no complement") {
  auto views = pure_contradiction();
  FourCResult fourc = classify_4c(views);
  REQUIRE(fourc.groups.size() == 1);
  CHECK(fourc.groups[0].complementary.empty());
  CHECK(fourc.groups[0].contradictory.size() == 6);  // every size-1 and size-2 key

  auto reduced = reduce_view_space(fourc, views);
  REQUIRE(reduced.size() == 2);  // contradictions pass through untouched
  CHECK(reduced[0].id == "v0");
  CHECK(reduced[1].id == "v1");

  // reducing again changes nothing
  auto again = reduce_view_space(classify_4c(reduced), reduced);
  REQUIRE(again.size() == 2);
  CHECK(again[0].id == "v0");
}

TEST_CASE("disjoint key ranges union into one view") {
  std::vector<MaterializedView> views = {
      view_of("v0", {"k", "v"}, {{"a", "1"}, {"b", "2"}}),
      view_of("v1", {"k", "v"}, {{"c", "3"}})};
  FourCResult fourc = classify_4c(views);
  bool comp_on_key = false;
  for (const auto& rel : fourc.groups[0].complementary) {
    if (rel.key == std::vector<std::size_t>{0}) {
      comp_on_key = true;
      CHECK(rel.a_only_key_values.size() == 2);
      CHECK(rel.b_only_key_values.size() == 1);
    }
  }
  CHECK(comp_on_key);

  auto reduced = reduce_view_space(fourc, views);
  REQUIRE(reduced.size() == 1);
  CHECK(reduced[0].id == "u:v0+v1");
  CHECK(reduced[0].constituents == std::vector<std::string>{"v0", "v1"});
  std::vector<std::vector<std::string>> expected = {{"a", "1"}, {"b", "2"}, {"c", "3"}};
  CHECK(reduced[0].rows == expected);
  CHECK(reduced[0].cardinality == 3);

  // a second pass over the union alone is a fixed point
  auto again = reduce_view_space(classify_4c(reduced), reduced);
  REQUIRE(again.size() == 1);
  CHECK(again[0].id == "u:v0+v1");
}

TEST_CASE("families grow greedily and conflicting members stay out") {
  std::vector<MaterializedView> views = {
      view_of("v0", {"k", "v"}, {{"a", "1"}}), view_of("v1", {"k", "v"}, {{"b", "2"}}),
      view_of("v2", {"k", "v"}, {{"c", "3"}}),
      view_of("v3", {"k", "v"}, {{"a", "9"}})};  // conflicts with v0 on k=a
  FourCResult fourc = classify_4c(views);
  auto reduced = reduce_view_space(fourc, views);

  REQUIRE(reduced.size() == 2);
  CHECK(reduced[0].id == "v3");  // survivors keep input order, unions follow
  CHECK(reduced[1].id == "u:v0+v1+v2");
  std::vector<std::vector<std::string>> expected = {{"a", "1"}, {"b", "2"}, {"c", "3"}};
  CHECK(reduced[1].rows == expected);
}

TEST_CASE("reduction preserves every input row on random instances") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 120; ++trial) {
    auto views = oracles::random_views(rng, 6, 12, 3);
    FourCResult fourc = classify_4c(views);
    auto reduced = reduce_view_space(fourc, views);
    CHECK(reduced.size() <= views.size());

    for (const auto& v : views) {
      for (const auto& row : v.rows) {
        bool found = false;
        for (const auto& r : reduced) {
          if (r.schema != v.schema) continue;
          if (std::binary_search(r.rows.begin(), r.rows.end(), row)) {
            found = true;
            break;
          }
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("classification matches the cell-level oracle on random instances") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 60; ++trial) {
    auto views = oracles::random_views(rng, 8, 30, 4);
    FourCResult fourc = classify_4c(views, 2);
    auto got = oracles::flatten_fourc(fourc, views);
    auto expected = oracles::oracle_fourc(views, 2);
    CHECK(got.compatible == expected.compatible);
    CHECK(got.contained == expected.contained);
    CHECK(got.complementary == expected.complementary);
    CHECK(got.contradictory == expected.contradictory);
    CHECK(got.representative == expected.representative);
  }
}

TEST_CASE("carriers accumulate across every view holding the variant") {
  std::vector<MaterializedView> views = {
      view_of("v0", {"k", "v"}, {{"k1", "a"}, {"x1", "u1"}}),
      view_of("v1", {"k", "v"}, {{"k1", "a"}, {"x2", "u2"}}),
      view_of("v2", {"k", "v"}, {{"k1", "a"}, {"x3", "u3"}}),
      view_of("v3", {"k", "v"}, {{"k1", "b"}, {"x4", "u4"}}),
      view_of("v4", {"k", "v"}, {{"k1", "b"}, {"x5", "u5"}})};
  FourCResult fourc = classify_4c(views);
  auto signals = generate_contradictory_signals(fourc, views);

  const ContradictorySignal* s = signal_with_key(signals, {0});
  REQUIRE(s != nullptr);
  CHECK(s->set_a == std::vector<std::string>{"v0", "v1", "v2"});
  CHECK(s->set_b == std::vector<std::string>{"v3", "v4"});
  CHECK(s->discrimination == doctest::Approx(2.4));  // 2*3*2 / 5
  REQUIRE(s->samples.size() == 1);
  CHECK(s->samples[0].row_a == std::vector<std::string>{"k1", "a"});
  CHECK(s->samples[0].row_b == std::vector<std::string>{"k1", "b"});

  // every signal keeps its two sides disjoint
  for (const auto& sig : signals) {
    std::set<std::string> a(sig.set_a.begin(), sig.set_a.end());
    for (const auto& id : sig.set_b) CHECK(!a.count(id));
  }
}

TEST_CASE("contained views still carry their variant") {
  std::vector<MaterializedView> views = {
      view_of("v0", {"k", "v"}, {{"k1", "a"}, {"x1", "u1"}}),
      view_of("v1", {"k", "v"}, {{"k1", "b"}, {"x2", "u2"}}),
      view_of("sub", {"k", "v"}, {{"k1", "a"}})};  // contained in v0
  FourCResult fourc = classify_4c(views);
  bool sub_contained = false;
  for (const auto& p : fourc.groups[0].contained_pairs)
    if (p.container == "v0" && p.containee == "sub") sub_contained = true;
  CHECK(sub_contained);

  auto signals = generate_contradictory_signals(fourc, views);
  const ContradictorySignal* s = signal_with_key(signals, {0});
  REQUIRE(s != nullptr);
  CHECK(s->set_a == std::vector<std::string>{"v0", "sub"});
  CHECK(s->set_b == std::vector<std::string>{"v1"});
}

TEST_CASE("signals sort by discrimination then support then key") {
  auto views = pure_contradiction();
  // add the five-view group under a different schema for a stronger signal
  std::vector<MaterializedView> five = {
      view_of("w0", {"k", "v"}, {{"k1", "a"}, {"x1", "u1"}}),
      view_of("w1", {"k", "v"}, {{"k1", "a"}, {"x2", "u2"}}),
      view_of("w2", {"k", "v"}, {{"k1", "a"}, {"x3", "u3"}}),
      view_of("w3", {"k", "v"}, {{"k1", "b"}, {"x4", "u4"}}),
      view_of("w4", {"k", "v"}, {{"k1", "b"}, {"x5", "u5"}})};
  for (auto& v : five) views.push_back(std::move(v));

  auto signals = generate_contradictory_signals(classify_4c(views), views);
  REQUIRE(signals.size() >= 2);
  CHECK(signals[0].discrimination == doctest::Approx(2.4));
  for (std::size_t i = 1; i < signals.size(); ++i) {
    CHECK(signals[i - 1].discrimination >= signals[i].discrimination - 1e-12);
    if (std::abs(signals[i - 1].discrimination - signals[i].discrimination) < 1e-12) {
      std::size_t u1 = signals[i - 1].set_a.size() + signals[i - 1].set_b.size();
      std::size_t u2 = signals[i].set_a.size() + signals[i].set_b.size();
      CHECK(u1 <= u2);
      if (u1 == u2) CHECK(signals[i - 1].key <= signals[i].key);
    }
  }
  // discrimination never exceeds the larger side
  for (const auto& s : signals) {
    double cap = static_cast<double>(std::max(s.set_a.size(), s.set_b.size()));
    CHECK(s.discrimination <= cap + 1e-12);
    CHECK(s.discrimination > 0.0);
  }
}

TEST_CASE("sample lists cap at sample_size in key order") {
  std::vector<MaterializedView> views = {
      view_of("v0", {"k", "v"},
              {{"k1", "a"}, {"k2", "a"}, {"k3", "a"}, {"k4", "a"}, {"k5", "a"}}),
      view_of("v1", {"k", "v"},
              {{"k1", "b"}, {"k2", "b"}, {"k3", "b"}, {"k4", "b"}, {"k5", "b"}})};
  FourCResult fourc = classify_4c(views);
  auto wide = generate_contradictory_signals(fourc, views, 3);
  const ContradictorySignal* s = signal_with_key(wide, {0});
  REQUIRE(s != nullptr);
  REQUIRE(s->samples.size() == 3);
  CHECK(s->samples[0].key_value == std::vector<std::string>{"k1"});
  CHECK(s->samples[1].key_value == std::vector<std::string>{"k2"});
  CHECK(s->samples[2].key_value == std::vector<std::string>{"k3"});

  auto all = generate_contradictory_signals(fourc, views, 10);
  const ContradictorySignal* sa = signal_with_key(all, {0});
  REQUIRE(sa != nullptr);
  CHECK(sa->samples.size() == 5);
}

TEST_CASE("applying a signal removes the losing side exactly once") {
  ContradictorySignal s;
  s.set_a = {"v0", "v1"};
  s.set_b = {"v2"};
  std::set<std::string> pool = {"v0", "v1", "v2", "v3"};

  auto after_a = apply_signal_selection(s, SignalSide::a, pool);
  CHECK(after_a == std::set<std::string>{"v0", "v1", "v3"});
  CHECK(apply_signal_selection(s, SignalSide::a, after_a) == after_a);

  auto after_b = apply_signal_selection(s, SignalSide::b, pool);
  CHECK(after_b == std::set<std::string>{"v2", "v3"});

  CHECK(apply_signal_selection(s, SignalSide::neither, pool) == pool);
}

TEST_CASE("bundles round-trip through json without loss") {
  auto views = pure_contradiction();
  FourCResult fourc = classify_4c(views);
  auto signals = generate_contradictory_signals(fourc, views);
  ExampleQuery q = make_query({{"name", {"a", "b"}}, {"addr", {"p"}}, {"zip", {"1"}}});
  for (auto& v : views) v.overlap = overlap_score(v, q);

  SignalBundle bundle = build_signal_bundle(views, q, fourc, signals);
  CHECK(bundle.query_attributes == std::vector<std::string>{"name", "addr", "zip"});
  CHECK(bundle.views.size() == 2);
  CHECK(bundle.reduced_view_ids.size() == 2);
  CHECK(bundle.signals.size() == signals.size());

  nlohmann::json j = bundle_to_json(bundle);
  SignalBundle back = bundle_from_json(j);
  CHECK(bundle_to_json(back).dump(2) == j.dump(2));
  CHECK(back.reduced_view_ids == bundle.reduced_view_ids);
  REQUIRE(back.signals.size() == bundle.signals.size());
  for (std::size_t i = 0; i < back.signals.size(); ++i) {
    CHECK(back.signals[i].set_a == bundle.signals[i].set_a);
    CHECK(back.signals[i].discrimination ==
          doctest::Approx(bundle.signals[i].discrimination));
  }
}

}  // TEST_SUITE

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "niffler/corpus.hpp"
#include "niffler/csv.hpp"

using namespace niffler;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("niffler_corpus_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("normalize trims casefolds and collapses whitespace") {
  CHECK(normalize_cell("  Walmart ") == std::optional<std::string>("walmart"));
  CHECK(normalize_cell("UChicago   Hospital") == std::optional<std::string>("uchicago hospital"));
  CHECK(normalize_cell("\tCVS\tPharmacy\n") == std::optional<std::string>("cvs pharmacy"));
  CHECK(normalize_cell("already clean") == std::optional<std::string>("already clean"));
}

TEST_CASE("normalize maps null tokens to missing after folding") {
  CHECK(!normalize_cell(""));
  CHECK(!normalize_cell("   "));
  CHECK(!normalize_cell("NULL"));
  CHECK(!normalize_cell("  N/A "));
  CHECK(!normalize_cell("Na"));
  CHECK(normalize_cell("0") == std::optional<std::string>("0"));
  CHECK(normalize_cell("none") == std::optional<std::string>("none"));
}

TEST_CASE("normalize honors custom null tokens") {
  std::vector<std::string> tokens = {"", "none"};
  CHECK(!normalize_cell(" None ", tokens));
  CHECK(normalize_cell("null", tokens) == std::optional<std::string>("null"));
}

TEST_CASE("normalize is idempotent on random input") {
  std::mt19937_64 rng(11);
  const std::string alphabet = " \tAbZ09 /-_.a  ";
  for (int i = 0; i < 500; ++i) {
    std::string raw;
    std::size_t len = rng() % 24;
    for (std::size_t j = 0; j < len; ++j) raw += alphabet[rng() % alphabet.size()];
    auto once = normalize_cell(raw);
    if (!once) continue;
    auto twice = normalize_cell(*once);
    REQUIRE(twice.has_value());
    CHECK(*twice == *once);
  }
}

TEST_CASE("profile counts distinct values over normalized non-nulls") {
  Table t = make_table("t", {"v"}, {{"1"}, {"2"}, {"2"}, {"3"}});
  ColumnProfile p = profile_column(t, 0);
  CHECK(p.distinct_count == 3);
  CHECK(p.total_count == 4);
  CHECK(p.uniqueness == doctest::Approx(0.75));
  CHECK(p.value_set == std::vector<std::string>{"1", "2", "3"});
}

TEST_CASE("profile of an all-null column is empty with zero uniqueness") {
  Table t = make_table("t", {"v"}, {{"na"}, {""}, {"NULL"}});
  ColumnProfile p = profile_column(t, 0);
  CHECK(p.distinct_count == 0);
  CHECK(p.total_count == 3);
  CHECK(p.uniqueness == 0.0);
  CHECK(p.value_set.empty());
}

TEST_CASE("profile of a fully distinct column has uniqueness one") {
  std::vector<std::vector<std::optional<std::string>>> rows;
  for (int i = 0; i < 1000; ++i) rows.push_back({"row" + std::to_string(i)});
  Table t = make_table("t", {"v"}, std::move(rows));
  ColumnProfile p = profile_column(t, 0);
  CHECK(p.distinct_count == 1000);
  CHECK(p.uniqueness == doctest::Approx(1.0));
}

TEST_CASE("profile uniqueness matches direct set count on random tables") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::optional<std::string>>> rows;
    std::size_t n = 1 + rng() % 40;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 5 == 0)
        rows.push_back({std::optional<std::string>{}});
      else
        rows.push_back({"V " + std::to_string(rng() % 12)});
    }
    Table t = make_table("t", {"v"}, rows);
    ColumnProfile p = profile_column(t, 0);
    std::set<std::string> direct;
    for (const auto& r : rows)
      if (r[0] && normalize_cell(*r[0])) direct.insert(*normalize_cell(*r[0]));
    CHECK(p.distinct_count == direct.size());
    CHECK(p.total_count == n);
    CHECK(p.uniqueness ==
          doctest::Approx(static_cast<double>(direct.size()) / static_cast<double>(n)));
  }
}

TEST_CASE("type tags split numeric categorical and textual columns") {
  Table numeric = make_table(
      "n", {"v"}, {{"1"}, {"2.5"}, {"-3"}, {"4e2"}, {"5"}, {"6"}, {"7"}, {"8"}, {"9"}, {"10"}});
  CHECK(profile_column(numeric, 0).type_tag == TypeTag::numeric_as_text);

  // one non-number among ten values stays above the 90% bar
  Table mostly = make_table(
      "m", {"v"}, {{"1"}, {"2"}, {"3"}, {"4"}, {"5"}, {"6"}, {"7"}, {"8"}, {"9"}, {"ten"}});
  CHECK(profile_column(mostly, 0).type_tag == TypeTag::numeric_as_text);

  std::vector<std::vector<std::optional<std::string>>> rows;
  for (int i = 0; i < 60; ++i) rows.push_back({std::string(1, static_cast<char>('a' + i % 3))});
  Table categorical = make_table("c", {"v"}, std::move(rows));
  CHECK(profile_column(categorical, 0).type_tag == TypeTag::categorical);

  std::vector<std::vector<std::optional<std::string>>> text_rows;
  for (int i = 0; i < 60; ++i) text_rows.push_back({"description " + std::to_string(i)});
  Table textual = make_table("x", {"v"}, std::move(text_rows));
  CHECK(profile_column(textual, 0).type_tag == TypeTag::textual);
}

TEST_CASE("delimited parser handles quotes doubled quotes and crlf") {
  auto rows = parse_delimited("a,b,c\r\n\"x,y\",\"he said \"\"hi\"\"\",z\n\nlast,,\n", ',');
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"x,y", "he said \"hi\"", "z"});
  CHECK(rows[2] == std::vector<std::string>{"last", "", ""});
}

TEST_CASE("delimited writer round-trips through the parser") {
  std::vector<std::vector<std::string>> table = {
      {"plain", "with,comma", "with \"quote\""}, {"", "multi\nline", "x"}};
  std::ostringstream out;
  for (const auto& row : table) write_delimited_row(out, row, ',');
  auto parsed = parse_delimited(out.str(), ',');
  CHECK(parsed == table);
}

TEST_CASE("load_collection reads every file and pads short rows") {
  fs::path dir = fresh_dir("load");
  write_file(dir / "stores.csv", "name,city\nWalmart,Chicago\nTarget,Evanston\nCVS,Skokie\n");
  write_file(dir / "people.csv",
             "id,name,age\n1,Ann,33\n2,Bo\n3,Cy,41,extra\n4,Di,28\n5,Ed,30\n");

  PathlessCollection c = load_collection(dir.string());
  REQUIRE(c.tables.size() == 2);
  // sorted by relative path
  CHECK(c.tables[0].rel_path == "people.csv");
  CHECK(c.tables[1].rel_path == "stores.csv");
  CHECK(c.tables[0].rows.size() == 5);
  CHECK(c.tables[1].rows.size() == 3);
  CHECK(c.tables[0].arity() == 3);
  // short row padded with missing, long row truncated
  CHECK(!c.tables[0].rows[1][2].has_value());
  CHECK(c.tables[0].rows[2].size() == 3);
  CHECK(c.tables[1].headers[0] == std::optional<std::string>("name"));
}

TEST_CASE("table ids are stable across reloads and derived from paths") {
  fs::path dir = fresh_dir("ids");
  write_file(dir / "a.csv", "x\n1\n2\n");
  fs::create_directories(dir / "sub");
  write_file(dir / "sub" / "b.csv", "y\n3\n4\n");

  PathlessCollection first = load_collection(dir.string());
  PathlessCollection second = load_collection(dir.string());
  REQUIRE(first.tables.size() == 2);
  for (std::size_t i = 0; i < first.tables.size(); ++i) {
    CHECK(first.tables[i].ref.id == second.tables[i].ref.id);
    CHECK(first.tables[i].ref.id == table_id_for_path(first.tables[i].rel_path));
  }
  CHECK(first.tables[0].rel_path == "a.csv");
  CHECK(first.tables[1].rel_path == "sub/b.csv");
  CHECK(first.tables[0].ref.id != first.tables[1].ref.id);
}

TEST_CASE("loading an empty root throws") {
  fs::path dir = fresh_dir("empty");
  CHECK_THROWS_WITH_AS(load_collection(dir.string()), "empty collection", std::runtime_error);
}

TEST_CASE("load honors delimiter and headerless options") {
  fs::path dir = fresh_dir("opts");
  write_file(dir / "data.psv", "1|Walmart\n2|Target\n");
  LoadOptions opts;
  opts.delimiter = '|';
  opts.has_header = false;
  PathlessCollection c = load_collection(dir.string(), opts);
  REQUIRE(c.tables.size() == 1);
  CHECK(c.tables[0].rows.size() == 2);
  CHECK(c.tables[0].arity() == 2);
  CHECK(!c.tables[0].headers[0].has_value());
  CHECK(c.tables[0].rows[0][1] == std::optional<std::string>("Walmart"));
}

TEST_CASE("make_table stores null tokens as missing and pads arity") {
  Table t = make_table("t", {"a", "b"}, {{"x", "NA"}, {"y"}});
  CHECK(t.rel_path == "t.csv");
  CHECK(t.ref.id == table_id_for_path("t.csv"));
  CHECK(!t.rows[0][1].has_value());
  REQUIRE(t.rows[1].size() == 2);
  CHECK(!t.rows[1][1].has_value());
}

}  // TEST_SUITE

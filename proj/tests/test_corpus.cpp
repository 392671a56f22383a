#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "cityrel/corpus.hpp"

using namespace cityrel;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cityrel_test_" + name);
  std::error_code ec;
  fs::remove(p, ec);
  return p;
}

Gazetteer tiny_gazetteer() {
  return Gazetteer({{"Chicago", {}, "IL", 41.9, -87.6, 1},
                    {"Houston", {}, "TX", 29.8, -95.4, 2},
                    {"Indianapolis", {}, "IN", 39.8, -86.2, 3},
                    {"New York", {"New York City", "NYC"}, "NY", 40.7, -74.0, 4}});
}

NewsArticle article_with_body(std::string body) {
  NewsArticle a;
  a.id = "a1";
  a.title = "title";
  a.body = std::move(body);
  a.published = "2008-05-01";
  return a;
}

}  // namespace

TEST_CASE("load_corpus on empty file gives zero articles") {
  auto path = temp_file("empty.jsonl");
  std::ofstream(path).close();
  Corpus c = load_corpus(path);
  CHECK(c.articles.empty());
}

TEST_CASE("corpus save/load round-trips field for field") {
  Corpus c;
  c.articles.push_back({"id-1", "First", "Body one.", "2008-01-02", {"music", "film"}, "culture"});
  c.articles.push_back({"id-2", "Second", "Body two.", "2010-11-30T12:00:00Z", {}, ""});
  c.articles.push_back({"id-3", "Third, with commas", "a\nb", "2015-12-31", {"sport"}, "sport"});
  auto path = temp_file("roundtrip.jsonl");
  save_corpus(c, path);
  Corpus back = load_corpus(path);
  REQUIRE(back.articles.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.articles[i].id == c.articles[i].id);
    CHECK(back.articles[i].title == c.articles[i].title);
    CHECK(back.articles[i].body == c.articles[i].body);
    CHECK(back.articles[i].published == c.articles[i].published);
    CHECK(back.articles[i].tags == c.articles[i].tags);
    CHECK(back.articles[i].section == c.articles[i].section);
  }
}

TEST_CASE("load_corpus rejects a record missing id, naming the line") {
  auto path = temp_file("noid.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"ok","title":"t","body":"b","published":"2008-01-01","tags":[]})" << "\n";
    out << R"({"title":"t","body":"b","published":"2008-01-01","tags":[]})" << "\n";
  }
  CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains("line 2"), std::runtime_error);
}

TEST_CASE("duplicate article ids collapse to first occurrence") {
  auto path = temp_file("dup.jsonl");
  {
    std::ofstream out(path);
    out << R"({"id":"x","title":"first","body":"","published":"2008-01-01"})" << "\n";
    out << R"({"id":"x","title":"second","body":"","published":"2009-01-01"})" << "\n";
  }
  LoadReport report;
  Corpus c = load_corpus(path, &report);
  REQUIRE(c.articles.size() == 1);
  CHECK(c.articles[0].title == "first");
  CHECK(report.duplicates_dropped == 1);
}

TEST_CASE("save_corpus to unwritable path fails") {
  Corpus c;
  CHECK_THROWS_AS(save_corpus(c, "/nonexistent-dir/out.jsonl"), std::runtime_error);
}

TEST_CASE("detect_mentions basics") {
  Gazetteer gaz = tiny_gazetteer();

  CHECK(detect_mentions(article_with_body("The weather was fine."), gaz).empty());

  auto found = detect_mentions(article_with_body("Chicago beat Houston last night."), gaz);
  CHECK(found == std::set<CityId>{0, 1});

  // Substring must not match without a token boundary.
  CHECK(detect_mentions(article_with_body("Indianapolisx is not a city."), gaz).empty());
  CHECK(detect_mentions(article_with_body("Indianapolis, though, is."), gaz) ==
        std::set<CityId>{2});
}

TEST_CASE("detect_mentions covers aliases and the title") {
  Gazetteer gaz = tiny_gazetteer();
  CHECK(detect_mentions(article_with_body("NYC never sleeps"), gaz) == std::set<CityId>{3});
  NewsArticle a = article_with_body("nothing here");
  a.title = "Houston, we have a problem";
  CHECK(detect_mentions(a, gaz) == std::set<CityId>{1});
}

TEST_CASE("detect_mentions is case-insensitive") {
  Gazetteer gaz = tiny_gazetteer();
  std::string body = "chicago and HOUSTON and New york city.";
  auto lower = detect_mentions(article_with_body(body), gaz);
  for (char& c : body) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  auto upper = detect_mentions(article_with_body(body), gaz);
  CHECK(lower == upper);
  CHECK(lower == std::set<CityId>{0, 1, 3});
}

TEST_CASE("cooccurring_pairs counts C(m,2)") {
  Gazetteer gaz = tiny_gazetteer();
  CHECK(cooccurring_pairs(article_with_body("Chicago only"), gaz).empty());
  CHECK(cooccurring_pairs(article_with_body("Chicago and Houston"), gaz).size() == 1);

  auto pairs = cooccurring_pairs(
      article_with_body("Chicago, Houston and Indianapolis walk into a bar"), gaz);
  REQUIRE(pairs.size() == 3);

  // Brute-force 2-subset enumeration oracle.
  std::set<CityId> mentions{0, 1, 2};
  std::set<CityPair> expected;
  for (CityId i : mentions)
    for (CityId j : mentions)
      if (i < j) expected.insert(CityPair(i, j));
  CHECK(pairs == expected);
}

TEST_CASE("CityPair canonicalizes order") {
  CHECK(CityPair(5, 2) == CityPair(2, 5));
  CHECK(CityPair(5, 2).a == 2);
}

TEST_CASE("pair count identity |pairs| = C(|mentions|, 2) on random articles") {
  Gazetteer gaz = tiny_gazetteer();
  std::mt19937 rng(7);
  const char* names[] = {"Chicago", "Houston", "Indianapolis", "New York"};
  for (int trial = 0; trial < 50; ++trial) {
    std::string body = "filler text";
    for (int c = 0; c < 4; ++c)
      if (rng() % 2) body += std::string(" ") + names[c];
    NewsArticle a = article_with_body(body);
    auto m = detect_mentions(a, gaz).size();
    CHECK(cooccurring_pairs(a, gaz).size() == m * (m - 1) / 2);
  }
}

TEST_CASE("gazetteer load validates coordinates and uniqueness") {
  auto path = temp_file("gaz.csv");
  {
    std::ofstream out(path);
    out << "name,aliases,state,lat,lon,rank\n";
    out << "A,,XX,95.0,0.0,1\n";
  }
  CHECK_THROWS_AS(Gazetteer::load(path), std::runtime_error);
  {
    std::ofstream out(path);
    out << "name,aliases,state,lat,lon,rank\n";
    out << "A,,XX,10.0,0.0,1\nB,,YY,11.0,1.0,1\n";
  }
  CHECK_THROWS_AS(Gazetteer::load(path), std::runtime_error);
}

TEST_CASE("article year comes from the published date") {
  CHECK(article_with_body("x").year() == 2008);
  NewsArticle bad = article_with_body("x");
  bad.published = "not-a-date";
  CHECK_THROWS_AS(bad.year(), std::runtime_error);
}

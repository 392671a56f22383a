#include <doctest.h>

#include <filesystem>

#include "cityrel/relatedness.hpp"

using namespace cityrel;

namespace {

Gazetteer three_cities() {
  return Gazetteer({{"Aville", {}, "AA", 10.0, 10.0, 1},
                    {"Beeburg", {}, "BB", 20.0, 20.0, 2},
                    {"Ceetown", {}, "CC", 30.0, 30.0, 3}});
}

TopicSet two_topics() { return TopicSet({"Politics", "Sport"}); }

}  // namespace

TEST_CASE("extract_topics uses strict inequality") {
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(17, 1.0 / 17.0);
  CHECK(extract_topics(uniform, 1.0).empty());
  CHECK(extract_topics(uniform, 0.05).size() == 17);

  Eigen::VectorXd s = Eigen::VectorXd::Constant(17, 0.25 / 14.0);
  s(0) = 0.3;
  s(1) = 0.25;
  s(2) = 0.2;
  CHECK(extract_topics(s, 0.227) == std::set<int>{0, 1});

  CHECK_THROWS_AS(extract_topics(s, 1.5), std::runtime_error);
}

TEST_CASE("extract_topics is monotone in the threshold") {
  Eigen::VectorXd s(5);
  s << 0.4, 0.3, 0.15, 0.1, 0.05;
  for (double t1 = 0.0; t1 <= 1.0; t1 += 0.07)
    for (double t2 = t1; t2 <= 1.0; t2 += 0.07) {
      auto a = extract_topics(s, t2), b = extract_topics(s, t1);
      CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
}

TEST_CASE("build_cube hand trace") {
  Gazetteer gaz = three_cities();
  TopicSet topics = two_topics();

  SUBCASE("empty corpus gives an all-zero cube") {
    RelatednessCube cube = build_cube({}, {}, gaz, topics, {2006, 2015});
    CHECK(cube.cells().empty());
    CHECK(cube.topic_total(0) == 0);
  }

  SUBCASE("one article, two cities, two topics") {
    Corpus c;
    c.articles.push_back({"a", "", "Aville met Beeburg", "2008-03-01", {}, ""});
    std::map<std::string, std::set<int>> topics_by_article{{"a", {0, 1}}};
    RelatednessCube cube = build_cube(c, topics_by_article, gaz, topics, {2006, 2015});
    CityPair p(0, 1);
    CHECK(cube.count(p, 0, 2008) == 1);
    CHECK(cube.count(p, 1, 2008) == 1);
    CHECK(cube.count(p, 0, 2009) == 0);
    CHECK(cube.allnews_count(p) == 1);
    CHECK(cube.topic_total(0) == 1);
  }

  SUBCASE("article outside the year range is skipped and reported") {
    Corpus c;
    c.articles.push_back({"a", "", "Aville and Beeburg", "1999-01-01", {}, ""});
    CubeBuildReport report;
    RelatednessCube cube = build_cube(c, {}, gaz, topics, {2006, 2015}, &report);
    CHECK(report.articles_outside_range == 1);
    CHECK(cube.cells().empty());
  }

  SUBCASE("empty extracted set still counts toward all-news totals") {
    Corpus c;
    c.articles.push_back({"a", "", "Aville and Beeburg", "2010-01-01", {}, ""});
    std::map<std::string, std::set<int>> none{{"a", {}}};
    RelatednessCube cube = build_cube(c, none, gaz, topics, {2006, 2015});
    CHECK(cube.allnews_count(CityPair(0, 1)) == 1);
    CHECK(cube.topic_total(0) == 0);
  }
}

TEST_CASE("cube cell totals match a brute-force recount") {
  Gazetteer gaz = three_cities();
  TopicSet topics = two_topics();
  Corpus c;
  const char* bodies[] = {"Aville Beeburg", "Aville Beeburg Ceetown", "Ceetown Aville",
                          "Beeburg", "Aville Beeburg"};
  std::map<std::string, std::set<int>> extracted;
  for (int i = 0; i < 5; ++i) {
    std::string id = "a" + std::to_string(i);
    c.articles.push_back({id, "", bodies[i], i % 2 ? "2007-06-01" : "2009-06-01", {}, ""});
    extracted[id] = i % 3 == 0 ? std::set<int>{0} : std::set<int>{0, 1};
  }
  RelatednessCube cube = build_cube(c, extracted, gaz, topics, {2006, 2015});

  for (int k = 0; k < 2; ++k) {
    long expected = 0;
    for (const NewsArticle& a : c.articles)
      if (extracted[a.id].count(k))
        expected += static_cast<long>(cooccurring_pairs(a, gaz).size());
    CHECK(cube.topic_total(k) == expected);
  }
}

TEST_CASE("topic_matrix is symmetric with zero diagonal and sums years") {
  Gazetteer gaz = three_cities();
  RelatednessCube cube(two_topics().names(), 3, {2006, 2015});
  cube.add(CityPair(0, 1), 0, 2006, 2);
  cube.add(CityPair(0, 1), 0, 2010, 3);
  cube.add(CityPair(1, 2), 1, 2012, 5);

  TopicMatrix m0 = topic_matrix(cube, 0);
  CHECK(m0.values(0, 1) == 5.0);
  CHECK(m0.values(1, 0) == 5.0);
  CHECK(m0.values(1, 2) == 0.0);
  CHECK(m0.values.diagonal().isZero());

  TopicMatrix m1 = topic_matrix(cube, 1);
  CHECK(m1.values(1, 2) == 5.0);
  CHECK((m1.values - m1.values.transpose()).isZero());

  CHECK_THROWS_AS(topic_matrix(cube, 5), std::runtime_error);
}

TEST_CASE("normalize_series follows the per-topic sum-to-100 rule") {
  RelatednessCube cube(two_topics().names(), 3, {2006, 2015});

  SUBCASE("single nonzero cell becomes 100") {
    cube.add(CityPair(0, 1), 0, 2008, 7);
    auto n = normalize_series(cube, 0);
    REQUIRE(n.size() == 1);
    CHECK(n.begin()->second == doctest::Approx(100.0));
  }

  SUBCASE("two equal cells become 50/50, {4,1} becomes {80,20}") {
    cube.add(CityPair(0, 1), 0, 2008, 1);
    cube.add(CityPair(1, 2), 0, 2010, 1);
    auto n = normalize_series(cube, 0);
    for (const auto& [key, v] : n) CHECK(v == doctest::Approx(50.0));

    cube.add(CityPair(0, 1), 1, 2008, 4);
    cube.add(CityPair(1, 2), 1, 2010, 1);
    auto n1 = normalize_series(cube, 1);
    CHECK(n1[{CityPair(0, 1), 2008}] == doctest::Approx(80.0));
    CHECK(n1[{CityPair(1, 2), 2010}] == doctest::Approx(20.0));
  }

  SUBCASE("all-zero topic is an error") {
    CHECK_THROWS_AS(normalize_series(cube, 0), std::runtime_error);
  }

  SUBCASE("normalized values sum to 100 per topic") {
    cube.add(CityPair(0, 1), 0, 2006, 3);
    cube.add(CityPair(0, 2), 0, 2009, 11);
    cube.add(CityPair(1, 2), 0, 2015, 6);
    double total = 0.0;
    for (const auto& [key, v] : normalize_series(cube, 0)) total += v;
    CHECK(total == doctest::Approx(100.0).epsilon(1e-9));
  }
}

TEST_CASE("pair_series ranks topics by normalized totals") {
  RelatednessCube cube(TopicSet({"A", "B", "C"}).names(), 3, {2006, 2015});
  CityPair p(0, 1), q(1, 2);
  // Topic A: pair p has 1 of 10 total -> normalized total 10.
  cube.add(p, 0, 2008, 1);
  cube.add(q, 0, 2008, 9);
  // Topic B: pair p has 4 of 5 total -> normalized total 80.
  cube.add(p, 1, 2009, 4);
  cube.add(q, 1, 2009, 1);

  auto top1 = pair_series(cube, p, 1);
  REQUIRE(top1.size() == 1);
  CHECK(top1[0].topic == 1);
  CHECK(top1[0].total == doctest::Approx(80.0));

  auto top4 = pair_series(cube, p, 4);
  CHECK(top4.size() == 2);  // only 2 active topics, clamped
  CHECK(top4[0].topic == 1);
  CHECK(top4[1].topic == 0);
  CHECK(top4[1].by_year.at(2008) == doctest::Approx(10.0));

  CHECK_THROWS_AS(pair_series(cube, CityPair(0, 2), 4), std::runtime_error);
  CHECK_THROWS_AS(pair_series(cube, p, 0), std::runtime_error);
}

TEST_CASE("pair_series breaks ties by lower topic index") {
  RelatednessCube cube(TopicSet({"A", "B"}).names(), 2, {2006, 2015});
  CityPair p(0, 1);
  cube.add(p, 0, 2008, 2);
  cube.add(p, 1, 2010, 2);
  auto top = pair_series(cube, p, 1);
  REQUIRE(top.size() == 1);
  CHECK(top[0].topic == 0);
}

TEST_CASE("cube CSV round-trips") {
  auto path = std::filesystem::temp_directory_path() / "cityrel_cube.csv";
  RelatednessCube cube(two_topics().names(), 3, {2006, 2015});
  cube.add(CityPair(0, 1), 0, 2008, 4);
  cube.add(CityPair(1, 2), 1, 2012, 2);
  cube.add_allnews(CityPair(0, 1), 2008, 6);
  cube.save(path);
  RelatednessCube back = RelatednessCube::load(path, two_topics().names(), 3, {2006, 2015});
  CHECK(back.count(CityPair(0, 1), 0, 2008) == 4);
  CHECK(back.count(CityPair(1, 2), 1, 2012) == 2);
  CHECK(back.allnews_count(CityPair(0, 1)) == 6);
}

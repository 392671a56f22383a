// Regenerates the bundled synthetic mini-corpus: 10 cities, 17 topics with
// disjoint generating vocabularies, ~500 articles over 2006-2015. Usage:
//   make_synthetic <tag_table.csv> <out_dir>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <json.hpp>

#include "cityrel/corpus.hpp"
#include "cityrel/labeling.hpp"

namespace fs = std::filesystem;
using namespace cityrel;

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: make_synthetic <tag_table.csv> <out_dir>\n";
    return 2;
  }
  auto [topics, table] = load_topic_taxonomy(argv[1]);
  fs::path out_dir = argv[2];
  fs::create_directories(out_dir);

  const std::vector<std::tuple<std::string, std::string, double, double>> city_rows = {
      {"Aville", "AA", 40.0, -74.0},  {"Beeburg", "BB", 34.0, -118.0},
      {"Ceetown", "CC", 41.9, -87.6}, {"Deeford", "DD", 29.8, -95.4},
      {"Eeton", "EE", 39.9, -75.2},   {"Efland", "FF", 33.4, -112.1},
      {"Geeville", "GG", 29.4, -98.5},{"Aitchburg", "HH", 32.7, -117.2},
      {"Eyeton", "II", 32.8, -96.8},  {"Jayford", "JJ", 37.3, -121.9}};
  {
    std::ofstream gz(out_dir / "gazetteer.csv");
    gz << "name,aliases,state,lat,lon,rank\n";
    int rank = 1;
    for (const auto& [name, state, lat, lon] : city_rows)
      gz << name << ",," << state << ',' << lat << ',' << lon << ',' << rank++ << '\n';
  }
  Gazetteer gaz = Gazetteer::load(out_dir / "gazetteer.csv");

  // One representative linked tag per topic, for the training labels.
  std::vector<std::string> topic_tag(topics.size());
  for (const auto& [tag, topic] : table.entries()) {
    int k = topics.index_of(topic);
    if (topic_tag[k].empty()) topic_tag[k] = tag;
  }

  const int words_per_topic = 30;
  const int tokens_per_doc = 60;
  const int num_articles = 500;
  std::mt19937_64 rng(20060101);

  std::uniform_int_distribution<int> topic_pick(0, topics.size() - 1);
  std::uniform_int_distribution<int> word_pick(0, words_per_topic - 1);
  std::uniform_int_distribution<int> city_pick(0, static_cast<int>(gaz.size()) - 1);
  std::uniform_int_distribution<int> year_pick(2006, 2015);
  std::uniform_int_distribution<int> month_pick(1, 12);
  std::uniform_int_distribution<int> day_pick(1, 28);
  std::bernoulli_distribution two_topics(0.35);
  std::bernoulli_distribution three_cities(0.15);

  std::ofstream corpus(out_dir / "corpus.jsonl");
  std::vector<long> city_count(gaz.size(), 0);

  for (int i = 0; i < num_articles; ++i) {
    std::vector<int> labels{topic_pick(rng)};
    if (two_topics(rng)) {
      int second = topic_pick(rng);
      if (second != labels[0]) labels.push_back(second);
    }

    std::vector<int> cities{city_pick(rng)};
    int second_city = city_pick(rng);
    if (second_city != cities[0]) cities.push_back(second_city);
    if (cities.size() == 2 && three_cities(rng)) {
      int third = city_pick(rng);
      if (third != cities[0] && third != cities[1]) cities.push_back(third);
    }

    std::string body;
    for (int c : cities) {
      body += gaz.city(c).name;
      body += " ";
    }
    std::uniform_int_distribution<std::size_t> label_pick(0, labels.size() - 1);
    for (int t = 0; t < tokens_per_doc; ++t) {
      int k = labels[label_pick(rng)];
      body += "topic" + std::to_string(k) + "word" + std::to_string(word_pick(rng));
      body += " ";
    }

    nlohmann::json j;
    j["id"] = "syn-" + std::to_string(i);
    j["title"] = "Report " + std::to_string(i);
    j["body"] = body;
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02d-%02d", year_pick(rng), month_pick(rng),
                  day_pick(rng));
    j["published"] = date;
    std::vector<std::string> tags;
    for (int k : labels) tags.push_back(topic_tag[k]);
    j["tags"] = tags;
    j["section"] = "news";
    corpus << j.dump() << '\n';

    for (int c : cities) ++city_count[c];
  }

  {
    std::ofstream counts(out_dir / "city_counts.csv");
    counts << "city,count\n";
    for (std::size_t c = 0; c < gaz.size(); ++c)
      counts << gaz.city(static_cast<CityId>(c)).name << ','
             << std::max<long>(1, city_count[c]) << '\n';
  }
  std::cout << "wrote " << num_articles << " articles to " << out_dir.string() << '\n';
  return 0;
}

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cityrel {

struct NewsArticle {
  std::string id;
  std::string title;
  std::string body;
  std::string published;  // ISO-8601 date or datetime, UTC
  std::vector<std::string> tags;
  std::string section;

  int year() const;  // calendar year of `published`
};

// One study city. `rank` is its population rank, unique within a gazetteer.
struct City {
  std::string name;
  std::vector<std::string> aliases;
  std::string state;
  double lat = 0.0;
  double lon = 0.0;
  int rank = 0;
};

using CityId = int;  // index into the gazetteer's city list

// Unordered city pair stored canonically with a < b.
struct CityPair {
  CityId a;
  CityId b;

  CityPair(CityId x, CityId y) : a(x < y ? x : y), b(x < y ? y : x) {}
  auto operator<=>(const CityPair&) const = default;
};

class Gazetteer {
 public:
  explicit Gazetteer(std::vector<City> cities);

  static Gazetteer load(const std::filesystem::path& csv_path);
  void save(const std::filesystem::path& csv_path) const;

  const std::vector<City>& cities() const { return cities_; }
  const City& city(CityId id) const { return cities_.at(id); }
  std::size_t size() const { return cities_.size(); }

  // All surface forms (name + aliases) for a city, lowercase.
  const std::vector<std::string>& surface_forms(CityId id) const {
    return forms_.at(id);
  }

 private:
  std::vector<City> cities_;
  std::vector<std::vector<std::string>> forms_;
};

struct Corpus {
  std::vector<NewsArticle> articles;
  std::string provenance;
};

struct LoadReport {
  std::size_t duplicates_dropped = 0;
};

// Line-delimited JSON records, one article per line. Malformed lines abort
// with the line number; duplicate ids collapse to the first occurrence.
Corpus load_corpus(const std::filesystem::path& path, LoadReport* report = nullptr);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

// Cities whose name or alias occurs in title or body as a whole-token,
// case-insensitive match. Token boundaries are non-alphanumeric characters.
std::set<CityId> detect_mentions(const NewsArticle& article, const Gazetteer& gaz);

// All unordered pairs over the mentioned cities.
std::set<CityPair> cooccurring_pairs(const NewsArticle& article, const Gazetteer& gaz);
std::set<CityPair> pairs_from_mentions(const std::set<CityId>& mentions);

}  // namespace cityrel

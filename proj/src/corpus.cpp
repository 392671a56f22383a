#include "cityrel/corpus.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "cityrel/csv.hpp"

namespace cityrel {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool valid_iso_date_prefix(const std::string& s) {
  // YYYY-MM-DD, optionally followed by a time part.
  if (s.size() < 10) return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  if (s[4] != '-' || s[7] != '-') return false;
  int month = (s[5] - '0') * 10 + (s[6] - '0');
  int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

}  // namespace

int NewsArticle::year() const {
  if (!valid_iso_date_prefix(published))
    throw std::runtime_error("article " + id + ": bad publication date '" + published + "'");
  int y = 0;
  std::from_chars(published.data(), published.data() + 4, y);
  return y;
}

Gazetteer::Gazetteer(std::vector<City> cities) : cities_(std::move(cities)) {
  forms_.reserve(cities_.size());
  for (const City& c : cities_) {
    std::vector<std::string> forms;
    forms.push_back(lowercase(c.name));
    for (const std::string& a : c.aliases)
      if (!a.empty()) forms.push_back(lowercase(a));
    forms_.push_back(std::move(forms));
  }
}

Gazetteer Gazetteer::load(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open gazetteer: " + csv_path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty gazetteer: " + csv_path.string());

  std::vector<City> cities;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 6)
      throw std::runtime_error("gazetteer line " + std::to_string(lineno) + ": expected 6 fields");
    City c;
    c.name = fields[0];
    std::stringstream aliases(fields[1]);
    std::string alias;
    while (std::getline(aliases, alias, '|'))
      if (!alias.empty()) c.aliases.push_back(alias);
    c.state = fields[2];
    c.lat = std::stod(fields[3]);
    c.lon = std::stod(fields[4]);
    c.rank = std::stoi(fields[5]);
    if (c.lat < -90.0 || c.lat > 90.0 || c.lon < -180.0 || c.lon > 180.0)
      throw std::runtime_error("gazetteer line " + std::to_string(lineno) + ": coordinates out of range");
    cities.push_back(std::move(c));
  }

  std::set<std::pair<std::string, std::string>> seen_names;
  std::set<int> seen_ranks;
  for (const City& c : cities) {
    if (!seen_names.insert({c.name, c.state}).second)
      throw std::runtime_error("duplicate city in gazetteer: " + c.name + ", " + c.state);
    if (!seen_ranks.insert(c.rank).second)
      throw std::runtime_error("duplicate rank in gazetteer: " + std::to_string(c.rank));
  }
  return Gazetteer(std::move(cities));
}

void Gazetteer::save(const std::filesystem::path& csv_path) const {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write gazetteer: " + csv_path.string());
  out << "name,aliases,state,lat,lon,rank\n";
  for (const City& c : cities_) {
    std::string aliases;
    for (std::size_t i = 0; i < c.aliases.size(); ++i) {
      if (i) aliases += '|';
      aliases += c.aliases[i];
    }
    out << csv_escape(c.name) << ',' << csv_escape(aliases) << ',' << csv_escape(c.state)
        << ',' << c.lat << ',' << c.lon << ',' << c.rank << '\n';
  }
}

Corpus load_corpus(const std::filesystem::path& path, LoadReport* report) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus: " + path.string());

  Corpus corpus;
  corpus.provenance = path.string();
  std::unordered_set<std::string> seen_ids;
  std::size_t dup = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("corpus line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
      throw std::runtime_error("corpus line " + std::to_string(lineno) + ": missing or empty \"id\"");
    if (!j.contains("published") || !j["published"].is_string())
      throw std::runtime_error("corpus line " + std::to_string(lineno) + ": missing \"published\"");

    NewsArticle a;
    a.id = j["id"].get<std::string>();
    a.title = j.value("title", std::string{});
    a.body = j.value("body", std::string{});
    a.published = j["published"].get<std::string>();
    if (!valid_iso_date_prefix(a.published))
      throw std::runtime_error("corpus line " + std::to_string(lineno) + ": bad date '" + a.published + "'");
    if (j.contains("tags")) {
      for (const auto& t : j["tags"]) a.tags.push_back(t.get<std::string>());
    }
    a.section = j.value("section", std::string{});

    if (!seen_ids.insert(a.id).second) {
      ++dup;
      continue;
    }
    corpus.articles.push_back(std::move(a));
  }
  if (report) report->duplicates_dropped = dup;
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus: " + path.string());
  for (const NewsArticle& a : corpus.articles) {
    nlohmann::json j;
    j["id"] = a.id;
    j["title"] = a.title;
    j["body"] = a.body;
    j["published"] = a.published;
    j["tags"] = a.tags;
    j["section"] = a.section;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

// Whole-token substring match: `needle` (lowercase) occurs in `haystack`
// (lowercase) with non-alphanumeric characters (or string ends) on both sides.
bool contains_token_phrase(const std::string& haystack, const std::string& needle) {
  if (needle.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_word_char(haystack[pos - 1]);
    std::size_t end = pos + needle.size();
    bool right_ok = end == haystack.size() || !is_word_char(haystack[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace

std::set<CityId> detect_mentions(const NewsArticle& article, const Gazetteer& gaz) {
  std::string text = lowercase(article.title);
  text.push_back('\n');
  text += lowercase(article.body);

  std::set<CityId> found;
  for (CityId id = 0; id < static_cast<CityId>(gaz.size()); ++id) {
    for (const std::string& form : gaz.surface_forms(id)) {
      if (contains_token_phrase(text, form)) {
        found.insert(id);
        break;
      }
    }
  }
  return found;
}

std::set<CityPair> pairs_from_mentions(const std::set<CityId>& mentions) {
  std::set<CityPair> pairs;
  for (auto i = mentions.begin(); i != mentions.end(); ++i)
    for (auto j = std::next(i); j != mentions.end(); ++j)
      pairs.insert(CityPair(*i, *j));
  return pairs;
}

std::set<CityPair> cooccurring_pairs(const NewsArticle& article, const Gazetteer& gaz) {
  return pairs_from_mentions(detect_mentions(article, gaz));
}

}  // namespace cityrel

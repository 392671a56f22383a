#include "cityrel/relatedness.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "cityrel/csv.hpp"

namespace cityrel {

std::set<int> extract_topics(const Eigen::VectorXd& scores, double threshold) {
  if (threshold < 0.0 || threshold > 1.0)
    throw std::runtime_error("threshold must be in [0, 1]");
  std::set<int> out;
  for (int k = 0; k < scores.size(); ++k)
    if (scores(k) > threshold) out.insert(k);
  return out;
}

RelatednessCube::RelatednessCube(std::vector<std::string> topic_names,
                                 std::size_t num_cities, YearRange years)
    : topic_names_(std::move(topic_names)), num_cities_(num_cities), years_(years) {
  if (years_.last < years_.first) throw std::runtime_error("empty year range");
}

void RelatednessCube::add(const CityPair& pair, int topic, int year, long count) {
  if (topic < 0 || topic >= num_topics()) throw std::runtime_error("topic out of range");
  if (!years_.contains(year)) throw std::runtime_error("year out of range");
  auto [it, inserted] = cells_.try_emplace(pair);
  if (inserted) it->second = Eigen::MatrixXi::Zero(num_topics(), years_.count());
  it->second(topic, year - years_.first) += static_cast<int>(count);
}

void RelatednessCube::add_allnews(const CityPair& pair, int year, long count) {
  if (!years_.contains(year)) throw std::runtime_error("year out of range");
  auto [it, inserted] = allnews_.try_emplace(pair);
  if (inserted) it->second = Eigen::VectorXi::Zero(years_.count());
  it->second(year - years_.first) += static_cast<int>(count);
}

long RelatednessCube::count(const CityPair& pair, int topic, int year) const {
  auto it = cells_.find(pair);
  if (it == cells_.end()) return 0;
  if (!years_.contains(year)) return 0;
  return it->second(topic, year - years_.first);
}

long RelatednessCube::allnews_count(const CityPair& pair) const {
  auto it = allnews_.find(pair);
  return it == allnews_.end() ? 0 : it->second.sum();
}

long RelatednessCube::topic_total(int topic) const {
  long total = 0;
  for (const auto& [pair, m] : cells_) total += m.row(topic).sum();
  return total;
}

void RelatednessCube::save(const std::filesystem::path& csv_path) const {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write cube: " + csv_path.string());
  out << "city_a,city_b,topic,year,count\n";
  for (const auto& [pair, m] : cells_) {
    for (int k = 0; k < m.rows(); ++k)
      for (int y = 0; y < m.cols(); ++y)
        if (m(k, y) != 0)
          out << pair.a << ',' << pair.b << ',' << csv_escape(topic_names_[k]) << ','
              << (years_.first + y) << ',' << m(k, y) << '\n';
  }
  for (const auto& [pair, v] : allnews_) {
    for (int y = 0; y < v.size(); ++y)
      if (v(y) != 0)
        out << pair.a << ',' << pair.b << ",__all__," << (years_.first + y) << ','
            << v(y) << '\n';
  }
}

RelatednessCube RelatednessCube::load(const std::filesystem::path& csv_path,
                                      std::vector<std::string> topic_names,
                                      std::size_t num_cities, YearRange years) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open cube: " + csv_path.string());
  TopicSet topics(topic_names);
  RelatednessCube cube(std::move(topic_names), num_cities, years);
  std::string line;
  std::getline(in, line);  // header
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 5)
      throw std::runtime_error("cube line " + std::to_string(lineno) + ": expected 5 fields");
    CityPair pair(std::stoi(fields[0]), std::stoi(fields[1]));
    int year = std::stoi(fields[3]);
    long count = std::stol(fields[4]);
    if (fields[2] == "__all__") {
      cube.add_allnews(pair, year, count);
    } else {
      int topic = topics.index_of(fields[2]);
      if (topic < 0)
        throw std::runtime_error("cube line " + std::to_string(lineno) +
                                 ": unknown topic '" + fields[2] + "'");
      cube.add(pair, topic, year, count);
    }
  }
  return cube;
}

RelatednessCube build_cube(const Corpus& corpus,
                           const std::map<std::string, std::set<int>>& topics_by_article,
                           const Gazetteer& gaz, const TopicSet& topics,
                           YearRange years, CubeBuildReport* report) {
  RelatednessCube cube(topics.names(), gaz.size(), years);
  CubeBuildReport local;
  for (const NewsArticle& a : corpus.articles) {
    int year = a.year();
    if (!years.contains(year)) {
      ++local.articles_outside_range;
      continue;
    }
    std::set<CityPair> pairs = cooccurring_pairs(a, gaz);
    if (pairs.empty()) continue;
    auto it = topics_by_article.find(a.id);
    const std::set<int>* extracted = it == topics_by_article.end() ? nullptr : &it->second;
    for (const CityPair& p : pairs) {
      cube.add_allnews(p, year);
      if (extracted)
        for (int k : *extracted) cube.add(p, k, year);
    }
    ++local.articles_counted;
  }
  if (report) *report = local;
  return cube;
}

TopicMatrix topic_matrix(const RelatednessCube& cube, int topic) {
  if (topic < 0 || topic >= cube.num_topics())
    throw std::runtime_error("unknown topic index " + std::to_string(topic));
  const auto n = static_cast<Eigen::Index>(cube.num_cities());
  TopicMatrix m{cube.topic_names()[topic], Eigen::MatrixXd::Zero(n, n)};
  for (const auto& [pair, cell] : cube.cells()) {
    double total = cell.row(topic).sum();
    m.values(pair.a, pair.b) = total;
    m.values(pair.b, pair.a) = total;
  }
  return m;
}

void TopicMatrix::save(const std::filesystem::path& csv_path, const Gazetteer& gaz) const {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write matrix: " + csv_path.string());
  out << "city";
  for (const City& c : gaz.cities()) out << ',' << csv_escape(c.name);
  out << '\n';
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    out << csv_escape(gaz.city(static_cast<CityId>(i)).name);
    for (Eigen::Index j = 0; j < values.cols(); ++j) out << ',' << values(i, j);
    out << '\n';
  }
}

std::map<std::pair<CityPair, int>, double> normalize_series(const RelatednessCube& cube,
                                                            int topic) {
  long total = cube.topic_total(topic);
  if (total == 0)
    throw std::runtime_error("topic '" + cube.topic_names()[topic] +
                             "' has no counts; normalization undefined");
  std::map<std::pair<CityPair, int>, double> out;
  for (const auto& [pair, cell] : cube.cells()) {
    for (int y = 0; y < cell.cols(); ++y) {
      int c = cell(topic, y);
      if (c != 0)
        out[{pair, cube.years().first + y}] =
            static_cast<double>(c) / static_cast<double>(total) * 100.0;
    }
  }
  return out;
}

std::vector<TopicSeries> pair_series(const RelatednessCube& cube, const CityPair& pair,
                                     int top_k) {
  if (top_k < 1) throw std::runtime_error("top_k must be >= 1");
  auto it = cube.cells().find(pair);
  if (it == cube.cells().end() || it->second.sum() == 0)
    throw std::runtime_error("pair has no counts under any topic");

  std::vector<TopicSeries> active;
  for (int k = 0; k < cube.num_topics(); ++k) {
    if (it->second.row(k).sum() == 0) continue;
    long topic_total = cube.topic_total(k);
    TopicSeries s{k, {}, 0.0};
    for (int y = 0; y < it->second.cols(); ++y) {
      int c = it->second(k, y);
      if (c != 0) {
        double v = static_cast<double>(c) / static_cast<double>(topic_total) * 100.0;
        s.by_year[cube.years().first + y] = v;
        s.total += v;
      }
    }
    active.push_back(std::move(s));
  }
  std::stable_sort(active.begin(), active.end(), [](const TopicSeries& a, const TopicSeries& b) {
    if (a.total != b.total) return a.total > b.total;
    return a.topic < b.topic;
  });
  if (static_cast<int>(active.size()) > top_k) active.resize(top_k);
  return active;
}

}  // namespace cityrel

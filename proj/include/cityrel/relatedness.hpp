#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cityrel/corpus.hpp"
#include "cityrel/labeling.hpp"

namespace cityrel {

// Topics whose score strictly exceeds the threshold.
std::set<int> extract_topics(const Eigen::VectorXd& scores, double threshold);

struct YearRange {
  int first;
  int last;  // inclusive

  int count() const { return last - first + 1; }
  bool contains(int y) const { return y >= first && y <= last; }
};

// Counts indexed by (city pair, topic, year), plus topic-undifferentiated
// per-pair counts ("all news") used by the gravity analysis.
class RelatednessCube {
 public:
  RelatednessCube(std::vector<std::string> topic_names, std::size_t num_cities,
                  YearRange years);

  void add(const CityPair& pair, int topic, int year, long count = 1);
  void add_allnews(const CityPair& pair, int year, long count = 1);

  long count(const CityPair& pair, int topic, int year) const;
  long allnews_count(const CityPair& pair) const;
  // Sum over years and pairs of one topic's layer.
  long topic_total(int topic) const;

  const std::vector<std::string>& topic_names() const { return topic_names_; }
  int num_topics() const { return static_cast<int>(topic_names_.size()); }
  std::size_t num_cities() const { return num_cities_; }
  const YearRange& years() const { return years_; }
  const std::map<CityPair, Eigen::MatrixXi>& cells() const { return cells_; }
  const std::map<CityPair, Eigen::VectorXi>& allnews() const { return allnews_; }

  void save(const std::filesystem::path& csv_path) const;
  static RelatednessCube load(const std::filesystem::path& csv_path,
                              std::vector<std::string> topic_names,
                              std::size_t num_cities, YearRange years);

 private:
  std::vector<std::string> topic_names_;
  std::size_t num_cities_;
  YearRange years_;
  // Per pair: topics x years count matrix.
  std::map<CityPair, Eigen::MatrixXi> cells_;
  // Per pair: yearly article counts regardless of extracted topics.
  std::map<CityPair, Eigen::VectorXi> allnews_;
};

struct CubeBuildReport {
  std::size_t articles_outside_range = 0;
  std::size_t articles_counted = 0;
};

// An article with m extracted topics and p co-occurring pairs contributes to
// all m*p cells of its publication year, and to the all-news totals of each
// pair regardless of m.
RelatednessCube build_cube(const Corpus& corpus,
                           const std::map<std::string, std::set<int>>& topics_by_article,
                           const Gazetteer& gaz, const TopicSet& topics,
                           YearRange years, CubeBuildReport* report = nullptr);

struct TopicMatrix {
  std::string topic;
  Eigen::MatrixXd values;  // symmetric, zero diagonal

  void save(const std::filesystem::path& csv_path, const Gazetteer& gaz) const;
};

// Entry (i, j) = counts summed over years for that topic.
TopicMatrix topic_matrix(const RelatednessCube& cube, int topic);

// Eq.-style normalization within one topic: each cell divided by the topic's
// grand total over pairs and years, times 100.
std::map<std::pair<CityPair, int>, double> normalize_series(const RelatednessCube& cube,
                                                            int topic);

struct TopicSeries {
  int topic;
  std::map<int, double> by_year;  // year -> normalized relatedness
  double total;
};

// Top-k topics for a pair, ranked by total normalized relatedness across
// years; ties go to the lower topic index.
std::vector<TopicSeries> pair_series(const RelatednessCube& cube, const CityPair& pair,
                                     int top_k);

}  // namespace cityrel

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cityrel/corpus.hpp"
#include "cityrel/llda.hpp"

namespace cityrel {

// The fixed, ordered list of topic names. Indexes into score vectors are
// stable for the life of a run.
class TopicSet {
 public:
  explicit TopicSet(std::vector<std::string> topics);

  const std::vector<std::string>& names() const { return names_; }
  int size() const { return static_cast<int>(names_.size()); }
  int index_of(const std::string& name) const;  // -1 if absent

 private:
  std::vector<std::string> names_;
};

// tag -> topic links. Loaded from a CSV with header `topic,tag`.
class TagTable {
 public:
  TagTable(std::map<std::string, std::string> entries, const TopicSet& topics);

  static TagTable load(const std::filesystem::path& csv_path, const TopicSet& topics);

  const std::map<std::string, std::string>& entries() const { return entries_; }
  // Topic name for a tag, or empty if unlinked.
  std::string topic_for(const std::string& tag) const;

 private:
  std::map<std::string, std::string> entries_;
};

// Loads the bundled topic/tag file: derives the topic order from first
// appearance in the CSV.
std::pair<TopicSet, TagTable> load_topic_taxonomy(const std::filesystem::path& csv_path);

struct LabeledDocument {
  std::string article_id;
  std::set<int> labels;  // topic indexes, nonempty
};

// One LabeledDocument per article with at least one linked tag.
std::vector<LabeledDocument> build_training_set(const Corpus& corpus,
                                                const TagTable& table,
                                                const TopicSet& topics);

// Eq.-style set metrics over extracted vs. relevant topic sets.
double precision(const std::set<int>& extracted, const std::set<int>& relevant);
double recall(const std::set<int>& extracted, const std::set<int>& relevant);
double f_score(double p, double r);

struct CalibrationPoint {
  double threshold;
  double mean_f;
  double mean_precision;
  double mean_recall;
};

struct CalibrationResult {
  double threshold = 0.0;
  double precision_at_best = 0.0;
  double recall_at_best = 0.0;
  double f_at_best = 0.0;
  std::vector<CalibrationPoint> curve;

  void save_curve(const std::filesystem::path& csv_path) const;
};

// Held-out scores for one fold: one score vector per document plus its true
// label set.
struct FoldScores {
  std::vector<Eigen::VectorXd> scores;
  std::vector<std::set<int>> labels;
};

// Grid sweep over thresholds {0, step, 2*step, ..., 1}. Per fold the F-score
// is micro-averaged over (document, topic) decisions with extraction rule
// score > t; the curve value at t is the mean over folds. Smallest threshold
// wins ties.
CalibrationResult calibrate_from_scores(const std::vector<FoldScores>& folds,
                                        double step);

struct CalibrationConfig {
  int folds = 10;
  double step = 0.001;
  std::size_t min_df = 2;
  LldaConfig llda;
};

// K-fold cross-validated threshold search: for each fold an LLDA model is
// trained on the remaining folds and the held-out documents are scored once;
// the scores are then swept over the threshold grid.
CalibrationResult calibrate_threshold(const std::vector<LabeledDocument>& labeled,
                                      const Corpus& corpus, const TopicSet& topics,
                                      const std::set<std::string>& stoplist,
                                      const CalibrationConfig& config);

}  // namespace cityrel

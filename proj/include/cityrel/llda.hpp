#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace cityrel {

std::set<std::string> load_stoplist(const std::filesystem::path& path);

// Lowercase, split on non-alphanumeric, drop tokens shorter than 2 chars,
// pure numbers, and stop-list members.
std::vector<std::string> tokenize(const std::string& text,
                                  const std::set<std::string>& stoplist);

class Vocabulary {
 public:
  Vocabulary() = default;

  // Terms appearing in at least min_df documents, indexed in first-appearance
  // order.
  static Vocabulary build(const std::vector<std::vector<std::string>>& docs,
                          std::size_t min_df);

  int index_of(const std::string& term) const {
    auto it = term_to_index_.find(term);
    return it == term_to_index_.end() ? -1 : it->second;
  }
  const std::string& term(int index) const { return terms_.at(index); }
  std::size_t size() const { return terms_.size(); }
  std::size_t doc_frequency(int index) const { return doc_freq_.at(index); }

  void add_term(const std::string& term, std::size_t df);

 private:
  std::unordered_map<std::string, int> term_to_index_;
  std::vector<std::string> terms_;
  std::vector<std::size_t> doc_freq_;
};

struct TrainingDocument {
  std::string id;
  std::vector<int> tokens;       // vocabulary indexes
  std::vector<int> labels;       // topic indexes, nonempty
};

struct LldaConfig {
  double alpha = 50.0 / 17.0;
  double eta = 0.01;
  int iterations = 1000;
  int burn_in = 500;
  int snapshot_every = 10;
  std::uint64_t seed = 42;
  std::size_t token_cap = 5000;  // per-document cap at inference; 0 disables
};

// Labeled LDA trained by collapsed Gibbs sampling. During training each
// token's topic assignment is restricted to its document's label set; the
// stored topic-word matrix is the average of count snapshots after burn-in.
class LldaModel {
 public:
  LldaModel() = default;

  static LldaModel train(const std::vector<TrainingDocument>& docs,
                         const std::vector<std::string>& topic_names,
                         Vocabulary vocabulary, const LldaConfig& config);

  // Fold-in Gibbs with all topics admissible and model counts frozen.
  // score_k = (n_k + alpha) / (n + K*alpha) averaged over post-burn-in
  // sweeps. Throws if the document has no in-vocabulary token.
  Eigen::VectorXd infer(const std::vector<int>& tokens, std::uint64_t seed) const;
  Eigen::VectorXd infer_text(const std::string& text,
                             const std::set<std::string>& stoplist,
                             std::uint64_t seed) const;

  // Terms with the largest smoothed weight N_kw + eta, descending, ties
  // broken by term index.
  std::vector<std::pair<std::string, double>> top_words(int topic, int k) const;

  void save(const std::filesystem::path& path) const;
  static LldaModel load(const std::filesystem::path& path);

  const std::vector<std::string>& topic_names() const { return topic_names_; }
  int num_topics() const { return static_cast<int>(topic_names_.size()); }
  const Vocabulary& vocabulary() const { return vocab_; }
  const Eigen::MatrixXd& topic_word_counts() const { return n_kw_; }
  const Eigen::VectorXd& topic_totals() const { return n_k_; }
  const LldaConfig& config() const { return config_; }

 private:
  std::vector<std::string> topic_names_;
  Vocabulary vocab_;
  Eigen::MatrixXd n_kw_;  // topics x vocabulary
  Eigen::VectorXd n_k_;   // row sums of n_kw_
  LldaConfig config_;
};

struct UnscorableArticle : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cityrel

#include "cityrel/labeling.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "cityrel/csv.hpp"

namespace cityrel {

TopicSet::TopicSet(std::vector<std::string> topics) : names_(std::move(topics)) {
  std::set<std::string> uniq(names_.begin(), names_.end());
  if (uniq.size() != names_.size())
    throw std::runtime_error("duplicate topic names in topic set");
  if (names_.empty()) throw std::runtime_error("empty topic set");
}

int TopicSet::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

TagTable::TagTable(std::map<std::string, std::string> entries, const TopicSet& topics)
    : entries_(std::move(entries)) {
  for (const auto& [tag, topic] : entries_)
    if (topics.index_of(topic) < 0)
      throw std::runtime_error("tag '" + tag + "' maps to unknown topic '" + topic + "'");
}

TagTable TagTable::load(const std::filesystem::path& csv_path, const TopicSet& topics) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open tag table: " + csv_path.string());
  std::string line;
  std::getline(in, line);  // header
  std::map<std::string, std::string> entries;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2)
      throw std::runtime_error("tag table line " + std::to_string(lineno) + ": expected 2 fields");
    const std::string& topic = fields[0];
    const std::string& tag = fields[1];
    auto [it, inserted] = entries.try_emplace(tag, topic);
    if (!inserted && it->second != topic)
      throw std::runtime_error("tag '" + tag + "' linked to two topics");
  }
  return TagTable(std::move(entries), topics);
}

std::string TagTable::topic_for(const std::string& tag) const {
  auto it = entries_.find(tag);
  return it == entries_.end() ? std::string{} : it->second;
}

std::pair<TopicSet, TagTable> load_topic_taxonomy(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open tag table: " + csv_path.string());
  std::string line;
  std::getline(in, line);
  std::vector<std::string> topic_order;
  std::set<std::string> seen;
  std::map<std::string, std::string> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2) throw std::runtime_error("bad tag table row: " + line);
    if (seen.insert(fields[0]).second) topic_order.push_back(fields[0]);
    entries[fields[1]] = fields[0];
  }
  TopicSet topics(std::move(topic_order));
  TagTable table(std::move(entries), topics);
  return {std::move(topics), std::move(table)};
}

std::vector<LabeledDocument> build_training_set(const Corpus& corpus,
                                                const TagTable& table,
                                                const TopicSet& topics) {
  std::vector<LabeledDocument> out;
  for (const NewsArticle& a : corpus.articles) {
    std::set<int> labels;
    for (const std::string& tag : a.tags) {
      std::string topic = table.topic_for(tag);
      if (!topic.empty()) labels.insert(topics.index_of(topic));
    }
    if (!labels.empty()) out.push_back({a.id, std::move(labels)});
  }
  return out;
}

double precision(const std::set<int>& extracted, const std::set<int>& relevant) {
  if (extracted.empty()) return 0.0;
  std::size_t hit = 0;
  for (int t : extracted) hit += relevant.count(t);
  return static_cast<double>(hit) / static_cast<double>(extracted.size());
}

double recall(const std::set<int>& extracted, const std::set<int>& relevant) {
  if (relevant.empty()) return 0.0;
  std::size_t hit = 0;
  for (int t : relevant) hit += extracted.count(t);
  return static_cast<double>(hit) / static_cast<double>(relevant.size());
}

double f_score(double p, double r) {
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

void CalibrationResult::save_curve(const std::filesystem::path& csv_path) const {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write curve: " + csv_path.string());
  out.precision(12);
  out << "threshold,mean_f,mean_precision,mean_recall\n";
  for (const CalibrationPoint& p : curve)
    out << p.threshold << ',' << p.mean_f << ',' << p.mean_precision << ','
        << p.mean_recall << '\n';
}

namespace {

std::vector<double> threshold_grid(double step) {
  if (step <= 0.0 || step >= 1.0) throw std::runtime_error("step must be in (0, 1)");
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double t = i * step;
    if (t >= 1.0) break;
    grid.push_back(t);
  }
  grid.push_back(1.0);
  return grid;
}

}  // namespace

CalibrationResult calibrate_from_scores(const std::vector<FoldScores>& folds,
                                        double step) {
  if (folds.empty()) throw std::runtime_error("no folds to calibrate");
  for (const FoldScores& f : folds) {
    if (f.scores.empty()) throw std::runtime_error("fold with zero scored documents");
    if (f.scores.size() != f.labels.size())
      throw std::runtime_error("fold scores/labels size mismatch");
  }
  std::vector<double> grid = threshold_grid(step);

  CalibrationResult result;
  result.curve.reserve(grid.size());
  for (double t : grid) {
    double f_sum = 0.0, p_sum = 0.0, r_sum = 0.0;
    for (const FoldScores& fold : folds) {
      // Micro counts over (document, topic) decisions.
      std::size_t tp = 0, extracted = 0, relevant = 0;
      for (std::size_t d = 0; d < fold.scores.size(); ++d) {
        const Eigen::VectorXd& s = fold.scores[d];
        for (int k = 0; k < s.size(); ++k) {
          bool ext = s(k) > t;
          bool rel = fold.labels[d].count(k) > 0;
          extracted += ext;
          relevant += rel;
          tp += (ext && rel);
        }
      }
      double p = extracted == 0 ? 0.0 : static_cast<double>(tp) / extracted;
      double r = relevant == 0 ? 0.0 : static_cast<double>(tp) / relevant;
      p_sum += p;
      r_sum += r;
      f_sum += f_score(p, r);
    }
    double n = static_cast<double>(folds.size());
    result.curve.push_back({t, f_sum / n, p_sum / n, r_sum / n});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.curve.size(); ++i)
    if (result.curve[i].mean_f > result.curve[best].mean_f) best = i;
  result.threshold = result.curve[best].threshold;
  result.f_at_best = result.curve[best].mean_f;
  result.precision_at_best = result.curve[best].mean_precision;
  result.recall_at_best = result.curve[best].mean_recall;
  return result;
}

CalibrationResult calibrate_threshold(const std::vector<LabeledDocument>& labeled,
                                      const Corpus& corpus, const TopicSet& topics,
                                      const std::set<std::string>& stoplist,
                                      const CalibrationConfig& config) {
  if (config.folds < 2) throw std::runtime_error("folds must be >= 2");
  if (labeled.size() < static_cast<std::size_t>(config.folds))
    throw std::runtime_error("fewer documents than folds");

  std::map<std::string, const NewsArticle*> by_id;
  for (const NewsArticle& a : corpus.articles) by_id[a.id] = &a;

  // Tokenize every labeled article once.
  struct Doc {
    const LabeledDocument* labeled;
    std::vector<std::string> tokens;
  };
  std::vector<Doc> docs;
  docs.reserve(labeled.size());
  for (const LabeledDocument& l : labeled) {
    auto it = by_id.find(l.article_id);
    if (it == by_id.end())
      throw std::runtime_error("labeled article not in corpus: " + l.article_id);
    const NewsArticle& a = *it->second;
    docs.push_back({&l, tokenize(a.title + "\n" + a.body, stoplist)});
  }

  // Unstratified uniform random fold assignment, fixed seed.
  std::vector<int> fold_of(docs.size());
  {
    std::vector<std::size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(config.llda.seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size(); ++i)
      fold_of[order[i]] = static_cast<int>(i % config.folds);
  }

  std::vector<FoldScores> fold_scores(config.folds);
  for (int f = 0; f < config.folds; ++f) {
    std::vector<std::vector<std::string>> train_tokens;
    for (std::size_t d = 0; d < docs.size(); ++d)
      if (fold_of[d] != f) train_tokens.push_back(docs[d].tokens);
    if (train_tokens.empty()) throw std::runtime_error("fold with zero documents");

    Vocabulary vocab = Vocabulary::build(train_tokens, config.min_df);
    std::vector<TrainingDocument> train;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (fold_of[d] == f) continue;
      TrainingDocument td;
      td.id = docs[d].labeled->article_id;
      for (const std::string& t : docs[d].tokens) {
        int idx = vocab.index_of(t);
        if (idx >= 0) td.tokens.push_back(idx);
      }
      if (td.tokens.empty()) continue;  // nothing the sampler can use
      td.labels.assign(docs[d].labeled->labels.begin(), docs[d].labeled->labels.end());
      train.push_back(std::move(td));
    }
    if (train.empty()) throw std::runtime_error("fold with zero trainable documents");

    LldaModel model = LldaModel::train(train, topics.names(), std::move(vocab), config.llda);

    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (fold_of[d] != f) continue;
      std::vector<int> ids;
      for (const std::string& t : docs[d].tokens) {
        int idx = model.vocabulary().index_of(t);
        if (idx >= 0) ids.push_back(idx);
      }
      if (ids.empty()) continue;  // unscorable held-out document, skipped
      std::uint64_t seed = config.llda.seed ^ (0x9e3779b97f4a7c15ULL * (d + 1));
      fold_scores[f].scores.push_back(model.infer(ids, seed));
      fold_scores[f].labels.push_back(docs[d].labeled->labels);
    }
    if (fold_scores[f].scores.empty())
      throw std::runtime_error("fold " + std::to_string(f) + " has no scorable documents");
  }

  return calibrate_from_scores(fold_scores, config.step);
}

}  // namespace cityrel

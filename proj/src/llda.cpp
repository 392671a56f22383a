#include "cityrel/llda.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

namespace cityrel {

namespace {
constexpr const char* kModelMagic = "cityrel-llda";
constexpr int kModelVersion = 1;
}  // namespace

std::set<std::string> load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stop list: " + path.string());
  std::set<std::string> words;
  std::string w;
  while (in >> w) words.insert(w);
  return words;
}

std::vector<std::string> tokenize(const std::string& text,
                                  const std::set<std::string>& stoplist) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.size() < 2) {
      current.clear();
      return;
    }
    bool all_digits = std::all_of(current.begin(), current.end(), [](char c) {
      return std::isdigit(static_cast<unsigned char>(c));
    });
    if (!all_digits && !stoplist.contains(current)) tokens.push_back(current);
    current.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& docs,
                             std::size_t min_df) {
  std::unordered_map<std::string, std::size_t> df;
  std::vector<std::string> first_seen;
  for (const auto& doc : docs) {
    std::set<std::string> uniq(doc.begin(), doc.end());
    for (const std::string& t : uniq) {
      auto [it, inserted] = df.try_emplace(t, 0);
      if (inserted) first_seen.push_back(t);
      ++it->second;
    }
  }
  Vocabulary vocab;
  for (const std::string& t : first_seen) {
    std::size_t count = df[t];
    if (count >= min_df) vocab.add_term(t, count);
  }
  return vocab;
}

void Vocabulary::add_term(const std::string& term, std::size_t df) {
  if (term_to_index_.contains(term))
    throw std::runtime_error("duplicate vocabulary term: " + term);
  term_to_index_[term] = static_cast<int>(terms_.size());
  terms_.push_back(term);
  doc_freq_.push_back(df);
}

LldaModel LldaModel::train(const std::vector<TrainingDocument>& docs,
                           const std::vector<std::string>& topic_names,
                           Vocabulary vocabulary, const LldaConfig& config) {
  if (docs.empty()) throw std::runtime_error("empty training set");
  if (config.iterations <= config.burn_in || config.burn_in < 0)
    throw std::runtime_error("iterations must exceed burn_in >= 0");
  const int K = static_cast<int>(topic_names.size());
  const int V = static_cast<int>(vocabulary.size());
  for (const TrainingDocument& d : docs) {
    if (d.tokens.empty())
      throw std::runtime_error("document " + d.id + " has no in-vocabulary tokens");
    if (d.labels.empty())
      throw std::runtime_error("document " + d.id + " has no labels");
    for (int l : d.labels)
      if (l < 0 || l >= K)
        throw std::runtime_error("document " + d.id + " has an out-of-range label");
  }

  std::mt19937_64 rng(config.seed);
  const double alpha = config.alpha;
  const double eta = config.eta;

  Eigen::MatrixXd n_kw = Eigen::MatrixXd::Zero(K, V);
  Eigen::VectorXd n_k = Eigen::VectorXd::Zero(K);
  // Per-document topic counts, restricted to the label set.
  std::vector<Eigen::VectorXd> n_dk(docs.size());
  std::vector<std::vector<int>> assignments(docs.size());

  for (std::size_t d = 0; d < docs.size(); ++d) {
    n_dk[d] = Eigen::VectorXd::Zero(K);
    assignments[d].resize(docs[d].tokens.size());
    const auto& labels = docs[d].labels;
    std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
    for (std::size_t i = 0; i < docs[d].tokens.size(); ++i) {
      int z = labels[pick(rng)];
      assignments[d][i] = z;
      n_dk[d](z) += 1.0;
      n_kw(z, docs[d].tokens[i]) += 1.0;
      n_k(z) += 1.0;
    }
  }

  Eigen::MatrixXd snapshot_sum = Eigen::MatrixXd::Zero(K, V);
  int snapshots = 0;
  std::vector<double> weights;

  for (int iter = 0; iter < config.iterations; ++iter) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto& labels = docs[d].labels;
      weights.resize(labels.size());
      for (std::size_t i = 0; i < docs[d].tokens.size(); ++i) {
        int w = docs[d].tokens[i];
        int old_z = assignments[d][i];
        n_dk[d](old_z) -= 1.0;
        n_kw(old_z, w) -= 1.0;
        n_k(old_z) -= 1.0;

        double total = 0.0;
        for (std::size_t li = 0; li < labels.size(); ++li) {
          int k = labels[li];
          double p = (n_dk[d](k) + alpha) * (n_kw(k, w) + eta) / (n_k(k) + eta * V);
          weights[li] = p;
          total += p;
        }
        std::uniform_real_distribution<double> u(0.0, total);
        double r = u(rng);
        std::size_t li = 0;
        while (li + 1 < labels.size() && r > weights[li]) {
          r -= weights[li];
          ++li;
        }
        int new_z = labels[li];
        assignments[d][i] = new_z;
        n_dk[d](new_z) += 1.0;
        n_kw(new_z, w) += 1.0;
        n_k(new_z) += 1.0;
      }
    }
    if (iter >= config.burn_in && (iter - config.burn_in) % config.snapshot_every == 0) {
      snapshot_sum += n_kw;
      ++snapshots;
    }
  }
  if (snapshots == 0) {
    snapshot_sum = n_kw;
    snapshots = 1;
  }

  LldaModel model;
  model.topic_names_ = topic_names;
  model.vocab_ = std::move(vocabulary);
  model.n_kw_ = snapshot_sum / static_cast<double>(snapshots);
  model.n_k_ = model.n_kw_.rowwise().sum();
  model.config_ = config;
  return model;
}

Eigen::VectorXd LldaModel::infer(const std::vector<int>& tokens,
                                 std::uint64_t seed) const {
  const int K = num_topics();
  const int V = static_cast<int>(vocab_.size());
  std::vector<int> doc;
  for (int t : tokens) {
    if (t >= 0 && t < V) doc.push_back(t);
    if (config_.token_cap != 0 && doc.size() >= config_.token_cap) break;
  }
  if (doc.empty()) throw UnscorableArticle("no in-vocabulary tokens");

  std::mt19937_64 rng(seed);
  const double alpha = config_.alpha;
  const double eta = config_.eta;

  Eigen::VectorXd n_dk = Eigen::VectorXd::Zero(K);
  std::vector<int> z(doc.size());
  std::uniform_int_distribution<int> pick(0, K - 1);
  for (std::size_t i = 0; i < doc.size(); ++i) {
    z[i] = pick(rng);
    n_dk(z[i]) += 1.0;
  }

  Eigen::VectorXd weights(K);
  Eigen::VectorXd score_sum = Eigen::VectorXd::Zero(K);
  int sweeps_recorded = 0;
  const int sweeps = config_.iterations;
  const int burn_in = config_.burn_in;
  const double n = static_cast<double>(doc.size());

  for (int iter = 0; iter < sweeps; ++iter) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      int w = doc[i];
      n_dk(z[i]) -= 1.0;
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        double p = (n_dk(k) + alpha) * (n_kw_(k, w) + eta) / (n_k_(k) + eta * V);
        weights(k) = p;
        total += p;
      }
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      int k = 0;
      while (k + 1 < K && r > weights(k)) {
        r -= weights(k);
        ++k;
      }
      z[i] = k;
      n_dk(k) += 1.0;
    }
    if (iter >= burn_in) {
      score_sum += (n_dk.array() + alpha).matrix() / (n + K * alpha);
      ++sweeps_recorded;
    }
  }
  if (sweeps_recorded == 0) {
    score_sum = (n_dk.array() + alpha).matrix() / (n + K * alpha);
    sweeps_recorded = 1;
  }
  return score_sum / static_cast<double>(sweeps_recorded);
}

Eigen::VectorXd LldaModel::infer_text(const std::string& text,
                                      const std::set<std::string>& stoplist,
                                      std::uint64_t seed) const {
  std::vector<int> ids;
  for (const std::string& t : tokenize(text, stoplist)) {
    int idx = vocab_.index_of(t);
    if (idx >= 0) ids.push_back(idx);
  }
  return infer(ids, seed);
}

std::vector<std::pair<std::string, double>> LldaModel::top_words(int topic,
                                                                 int k) const {
  if (topic < 0 || topic >= num_topics())
    throw std::runtime_error("unknown topic index " + std::to_string(topic));
  const int V = static_cast<int>(vocab_.size());
  std::vector<int> order(V);
  for (int i = 0; i < V; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return n_kw_(topic, a) > n_kw_(topic, b);
  });
  int take = std::min(k, V);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (int i = 0; i < take; ++i)
    out.emplace_back(vocab_.term(order[i]), n_kw_(topic, order[i]) + config_.eta);
  return out;
}

void LldaModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model: " + path.string());
  out.precision(17);
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "alpha " << config_.alpha << '\n';
  out << "eta " << config_.eta << '\n';
  out << "iterations " << config_.iterations << '\n';
  out << "burn_in " << config_.burn_in << '\n';
  out << "snapshot_every " << config_.snapshot_every << '\n';
  out << "seed " << config_.seed << '\n';
  out << "token_cap " << config_.token_cap << '\n';
  out << "topics " << topic_names_.size() << '\n';
  for (const std::string& t : topic_names_) out << t << '\n';
  out << "vocabulary " << vocab_.size() << '\n';
  for (int i = 0; i < static_cast<int>(vocab_.size()); ++i)
    out << vocab_.term(i) << ' ' << vocab_.doc_frequency(i) << '\n';
  out << "counts\n";
  for (int k = 0; k < n_kw_.rows(); ++k) {
    for (int w = 0; w < n_kw_.cols(); ++w) {
      if (w) out << ' ';
      out << n_kw_(k, w);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LldaModel LldaModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model: " + path.string());
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kModelMagic)
    throw std::runtime_error("not a model file: " + path.string());
  if (version != kModelVersion)
    throw std::runtime_error("unsupported model version " + std::to_string(version));

  LldaModel model;
  auto expect = [&](const char* key) {
    std::string k;
    if (!(in >> k) || k != key)
      throw std::runtime_error("model parse error: expected '" + std::string(key) + "'");
  };
  expect("alpha");
  in >> model.config_.alpha;
  expect("eta");
  in >> model.config_.eta;
  expect("iterations");
  in >> model.config_.iterations;
  expect("burn_in");
  in >> model.config_.burn_in;
  expect("snapshot_every");
  in >> model.config_.snapshot_every;
  expect("seed");
  in >> model.config_.seed;
  expect("token_cap");
  in >> model.config_.token_cap;

  std::size_t num_topics = 0;
  expect("topics");
  in >> num_topics;
  in.ignore();
  for (std::size_t i = 0; i < num_topics; ++i) {
    std::string name;
    if (!std::getline(in, name)) throw std::runtime_error("truncated model file");
    model.topic_names_.push_back(name);
  }

  std::size_t vocab_size = 0;
  expect("vocabulary");
  in >> vocab_size;
  for (std::size_t i = 0; i < vocab_size; ++i) {
    std::string term;
    std::size_t df = 0;
    if (!(in >> term >> df)) throw std::runtime_error("truncated model file");
    model.vocab_.add_term(term, df);
  }

  expect("counts");
  model.n_kw_.resize(num_topics, vocab_size);
  for (std::size_t k = 0; k < num_topics; ++k)
    for (std::size_t w = 0; w < vocab_size; ++w)
      if (!(in >> model.n_kw_(k, w))) throw std::runtime_error("truncated model file");
  model.n_k_ = model.n_kw_.rowwise().sum();
  return model;
}

}  // namespace cityrel

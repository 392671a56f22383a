#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cityrel/chart.hpp"
#include "cityrel/corpus.hpp"
#include "cityrel/csv.hpp"
#include "cityrel/gravity.hpp"
#include "cityrel/ingest.hpp"
#include "cityrel/labeling.hpp"
#include "cityrel/llda.hpp"
#include "cityrel/network.hpp"
#include "cityrel/relatedness.hpp"

namespace fs = std::filesystem;
using namespace cityrel;

namespace {

// Plain key = value file; unknown keys are rejected so typos surface.
std::map<std::string, std::string> read_config(const fs::path& path) {
  std::map<std::string, std::string> kv;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = value;
  }
  return kv;
}

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 42;
  bool verbose = false;
  std::map<std::string, std::string> config;

  std::string get(const std::string& key, const std::string& fallback = {}) const {
    auto it = config.find(key);
    return it == config.end() ? fallback : it->second;
  }
  double get_num(const std::string& key, double fallback) const {
    auto it = config.find(key);
    return it == config.end() ? fallback : std::stod(it->second);
  }

  fs::path prepare_out() const {
    fs::create_directories(out_dir);
    if (!config_path.empty())
      fs::copy_file(config_path, fs::path(out_dir) / "run_config.txt",
                    fs::copy_options::overwrite_existing);
    return out_dir;
  }
};

LldaConfig llda_config_from(const Common& c) {
  LldaConfig cfg;
  cfg.alpha = c.get_num("alpha", cfg.alpha);
  cfg.eta = c.get_num("eta", cfg.eta);
  cfg.iterations = static_cast<int>(c.get_num("iterations", cfg.iterations));
  cfg.burn_in = static_cast<int>(c.get_num("burn_in", cfg.burn_in));
  cfg.snapshot_every = static_cast<int>(c.get_num("snapshot_every", cfg.snapshot_every));
  cfg.token_cap = static_cast<std::size_t>(c.get_num("token_cap", cfg.token_cap));
  cfg.seed = c.seed;
  return cfg;
}

void require_file(const fs::path& p, const std::string& what) {
  if (p.empty()) throw std::runtime_error("no " + what + " given (flag or config)");
  if (!fs::exists(p)) throw std::runtime_error("missing " + what + ": " + p.string());
}

std::vector<TrainingDocument> to_training_docs(const std::vector<LabeledDocument>& labeled,
                                               const Corpus& corpus,
                                               const std::set<std::string>& stoplist,
                                               const Vocabulary& vocab) {
  std::map<std::string, const NewsArticle*> by_id;
  for (const NewsArticle& a : corpus.articles) by_id[a.id] = &a;
  std::vector<TrainingDocument> docs;
  for (const LabeledDocument& l : labeled) {
    const NewsArticle& a = *by_id.at(l.article_id);
    TrainingDocument d;
    d.id = l.article_id;
    for (const std::string& t : tokenize(a.title + "\n" + a.body, stoplist)) {
      int idx = vocab.index_of(t);
      if (idx >= 0) d.tokens.push_back(idx);
    }
    if (d.tokens.empty()) continue;
    d.labels.assign(l.labels.begin(), l.labels.end());
    docs.push_back(std::move(d));
  }
  return docs;
}

std::map<CityId, double> load_city_counts(const fs::path& path, const Gazetteer& gaz) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open city counts: " + path.string());
  std::string line;
  std::getline(in, line);  // header: city,count
  std::map<CityId, double> counts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 2) throw std::runtime_error("bad city counts row: " + line);
    bool matched = false;
    for (CityId id = 0; id < static_cast<CityId>(gaz.size()); ++id)
      if (gaz.city(id).name == fields[0]) {
        counts[id] = std::stod(fields[1]);
        matched = true;
        break;
      }
    if (!matched) throw std::runtime_error("unknown city in counts: " + fields[0]);
  }
  return counts;
}

std::string slug(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else if (!out.empty() && out.back() != '_')
      out.push_back('_');
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Topic-differentiated city relatedness from news corpora"};
  app.require_subcommand(1);

  Common common;
  app.add_option("--config", common.config_path, "key=value run configuration file");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--seed", common.seed, "RNG seed");
  app.add_flag("--verbose", common.verbose, "chatty progress output");

  std::string gazetteer_path, tag_table_path, stoplist_path, corpus_path, model_path;
  std::string scores_path, cube_path, city_counts_path, pair_spec, from_date, to_date;
  std::string base_url, api_key;
  double threshold = -1.0, rate_limit = 0.0, gravity_step = 0.01;
  int folds = 0, page_size = 0, year_first = 0, year_last = 0, top_k = 0;
  double cal_step = 0.0;
  bool raw_mode = false;

  auto add_common_paths = [&](CLI::App* sub) {
    sub->add_option("--gazetteer", gazetteer_path, "gazetteer CSV");
    sub->add_option("--tag-table", tag_table_path, "topic,tag CSV");
    sub->add_option("--stoplist", stoplist_path, "stop-word list");
    sub->add_option("--corpus", corpus_path, "corpus JSONL");
  };

  auto* cmd_harvest = app.add_subcommand("harvest", "retrieve pair and per-city corpora");
  cmd_harvest->add_option("--gazetteer", gazetteer_path, "gazetteer CSV");
  cmd_harvest->add_option("--from", from_date, "start date (YYYY-MM-DD)");
  cmd_harvest->add_option("--to", to_date, "end date (YYYY-MM-DD)");
  cmd_harvest->add_option("--base-url", base_url, "search API base URL");
  cmd_harvest->add_option("--api-key", api_key, "API key (overrides NEWS_API_KEY)");
  cmd_harvest->add_option("--rate-limit", rate_limit, "requests per second");
  cmd_harvest->add_option("--page-size", page_size, "API page size");

  auto* cmd_train = app.add_subcommand("train", "train the topic model on tagged articles");
  add_common_paths(cmd_train);
  cmd_train->add_option("--model", model_path, "model output path");

  auto* cmd_calibrate = app.add_subcommand("calibrate", "cross-validated threshold search");
  add_common_paths(cmd_calibrate);
  cmd_calibrate->add_option("--folds", folds, "cross-validation folds");
  cmd_calibrate->add_option("--step", cal_step, "threshold grid step");

  auto* cmd_score = app.add_subcommand("score", "score every article against a model");
  add_common_paths(cmd_score);
  cmd_score->add_option("--model", model_path, "trained model file");

  auto* cmd_cube = app.add_subcommand("cube", "build the (pair, topic, year) counts");
  add_common_paths(cmd_cube);
  cmd_cube->add_option("--scores", scores_path, "score dump JSONL");
  cmd_cube->add_option("--threshold", threshold, "topic extraction threshold");
  cmd_cube->add_option("--year-first", year_first, "first year of the range");
  cmd_cube->add_option("--year-last", year_last, "last year of the range");

  auto* cmd_network = app.add_subcommand("network", "per-topic pruned city networks");
  add_common_paths(cmd_network);
  cmd_network->add_option("--cube", cube_path, "cube CSV");
  cmd_network->add_option("--top-k", top_k, "subgraph size (default 30)");
  cmd_network->add_option("--year-first", year_first, "first year of the range");
  cmd_network->add_option("--year-last", year_last, "last year of the range");

  auto* cmd_gravity = app.add_subcommand("gravity", "distance-decay fits per topic");
  add_common_paths(cmd_gravity);
  cmd_gravity->add_option("--cube", cube_path, "cube CSV");
  cmd_gravity->add_option("--city-counts", city_counts_path, "city,count CSV");
  cmd_gravity->add_option("--step", gravity_step, "beta grid step");
  cmd_gravity->add_flag("--raw", raw_mode, "also sweep without log transform");
  cmd_gravity->add_option("--year-first", year_first, "first year of the range");
  cmd_gravity->add_option("--year-last", year_last, "last year of the range");

  auto* cmd_chart = app.add_subcommand("chart", "per-pair temporal relatedness chart");
  add_common_paths(cmd_chart);
  cmd_chart->add_option("--cube", cube_path, "cube CSV");
  cmd_chart->add_option("--pair", pair_spec, "CityA:CityB");
  cmd_chart->add_option("--top-k", top_k, "series to plot (default 4)");
  cmd_chart->add_option("--year-first", year_first, "first year of the range");
  cmd_chart->add_option("--year-last", year_last, "last year of the range");

  // Let --config/--out/--seed/--verbose appear after the subcommand too.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; }))
    sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!common.config_path.empty()) common.config = read_config(common.config_path);
    // Flags win over config values.
    auto pick = [&](std::string& flag_value, const char* key) {
      if (flag_value.empty()) flag_value = common.get(key);
    };
    pick(gazetteer_path, "gazetteer");
    pick(tag_table_path, "tag_table");
    pick(stoplist_path, "stoplist");
    pick(corpus_path, "corpus");
    pick(model_path, "model");
    pick(scores_path, "scores");
    pick(cube_path, "cube");
    pick(city_counts_path, "city_counts");
    pick(base_url, "base_url");
    pick(from_date, "from");
    pick(to_date, "to");
    if (threshold < 0.0) threshold = common.get_num("threshold", -1.0);
    if (folds == 0) folds = static_cast<int>(common.get_num("folds", 10));
    if (cal_step == 0.0) cal_step = common.get_num("step", 0.001);
    if (year_first == 0) year_first = static_cast<int>(common.get_num("year_first", 2006));
    if (year_last == 0) year_last = static_cast<int>(common.get_num("year_last", 2015));
    if (top_k == 0) top_k = static_cast<int>(common.get_num("top_k", 0));
    if (rate_limit == 0.0) rate_limit = common.get_num("rate_limit", 1.0);
    if (page_size == 0) page_size = static_cast<int>(common.get_num("page_size", 50));
    std::size_t min_df = static_cast<std::size_t>(common.get_num("min_df", 2));

    fs::path out = common.prepare_out();

    if (*cmd_harvest) {
      require_file(gazetteer_path, "gazetteer");
      Gazetteer gaz = Gazetteer::load(gazetteer_path);
      ClientConfig cc;
      if (!base_url.empty()) cc.base_url = base_url;
      cc.api_key = api_key;
      if (cc.api_key.empty())
        if (const char* env = std::getenv("NEWS_API_KEY")) cc.api_key = env;
      cc.page_size = page_size;
      cc.rate_limit_per_sec = rate_limit;
      cc.cache_dir = out / "cache";
      if (from_date.empty() || to_date.empty())
        throw std::runtime_error("harvest needs --from and --to dates");
      HarvestReport r = harvest(gaz, from_date, to_date, cc, out);
      std::cout << "harvest: " << r.queries_run << " queries run, " << r.queries_skipped
                << " skipped, " << r.queries_failed << " failed, " << r.requests_made
                << " requests\n";
      return r.queries_failed == 0 ? 0 : 1;
    }

    if (*cmd_train) {
      require_file(corpus_path, "corpus");
      require_file(tag_table_path, "tag table");
      require_file(stoplist_path, "stop list");
      auto [topics, table] = load_topic_taxonomy(tag_table_path);
      auto stoplist = load_stoplist(stoplist_path);
      Corpus corpus = load_corpus(corpus_path);
      auto labeled = build_training_set(corpus, table, topics);
      if (labeled.empty()) throw std::runtime_error("no article carries a linked tag");

      std::map<std::string, const NewsArticle*> by_id;
      for (const NewsArticle& a : corpus.articles) by_id[a.id] = &a;
      std::vector<std::vector<std::string>> token_docs;
      for (const LabeledDocument& l : labeled) {
        const NewsArticle& a = *by_id.at(l.article_id);
        token_docs.push_back(tokenize(a.title + "\n" + a.body, stoplist));
      }
      Vocabulary vocab = Vocabulary::build(token_docs, min_df);
      auto docs = to_training_docs(labeled, corpus, stoplist, vocab);
      LldaModel model = LldaModel::train(docs, topics.names(), std::move(vocab),
                                         llda_config_from(common));
      fs::path model_out = model_path.empty() ? (out / "model.llda") : fs::path(model_path);
      model.save(model_out);
      std::cout << "train: " << docs.size() << " documents, vocabulary "
                << model.vocabulary().size() << ", model " << model_out.string() << '\n';
      return 0;
    }

    if (*cmd_calibrate) {
      require_file(corpus_path, "corpus");
      require_file(tag_table_path, "tag table");
      require_file(stoplist_path, "stop list");
      auto [topics, table] = load_topic_taxonomy(tag_table_path);
      auto stoplist = load_stoplist(stoplist_path);
      Corpus corpus = load_corpus(corpus_path);
      auto labeled = build_training_set(corpus, table, topics);
      CalibrationConfig cfg;
      cfg.folds = folds;
      cfg.step = cal_step;
      cfg.min_df = min_df;
      cfg.llda = llda_config_from(common);
      CalibrationResult res = calibrate_threshold(labeled, corpus, topics, stoplist, cfg);
      res.save_curve(out / "calibration_curve.csv");
      {
        std::ofstream t(out / "threshold.txt");
        t.precision(12);
        t << res.threshold << '\n';
      }
      std::cout << "calibrate: threshold " << res.threshold << " F " << res.f_at_best
                << " P " << res.precision_at_best << " R " << res.recall_at_best << '\n';
      return 0;
    }

    if (*cmd_score) {
      require_file(corpus_path, "corpus");
      require_file(model_path, "model");
      require_file(stoplist_path, "stop list");
      LldaModel model = LldaModel::load(model_path);
      auto stoplist = load_stoplist(stoplist_path);
      Corpus corpus = load_corpus(corpus_path);
      std::ofstream dump(out / "scores.jsonl");
      std::size_t scored = 0, unscorable = 0;
      for (std::size_t i = 0; i < corpus.articles.size(); ++i) {
        const NewsArticle& a = corpus.articles[i];
        try {
          std::uint64_t seed = common.seed ^ (0x9e3779b97f4a7c15ULL * (i + 1));
          Eigen::VectorXd s = model.infer_text(a.title + "\n" + a.body, stoplist, seed);
          nlohmann::json j;
          j["id"] = a.id;
          j["scores"] = std::vector<double>(s.data(), s.data() + s.size());
          dump << j.dump() << '\n';
          ++scored;
        } catch (const UnscorableArticle&) {
          ++unscorable;
        }
      }
      std::cout << "score: " << scored << " scored, " << unscorable << " unscorable\n";
      return 0;
    }

    if (*cmd_cube) {
      require_file(corpus_path, "corpus");
      require_file(scores_path, "score dump");
      require_file(gazetteer_path, "gazetteer");
      require_file(tag_table_path, "tag table");
      if (threshold < 0.0) throw std::runtime_error("cube needs --threshold in [0, 1]");
      auto [topics, table] = load_topic_taxonomy(tag_table_path);
      Gazetteer gaz = Gazetteer::load(gazetteer_path);
      Corpus corpus = load_corpus(corpus_path);

      std::map<std::string, std::set<int>> topics_by_article;
      std::ifstream in(scores_path);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line);
        std::vector<double> s = j["scores"].get<std::vector<double>>();
        Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(s.data(), s.size());
        topics_by_article[j["id"].get<std::string>()] = extract_topics(v, threshold);
      }

      CubeBuildReport report;
      RelatednessCube cube = build_cube(corpus, topics_by_article, gaz, topics,
                                        {year_first, year_last}, &report);
      cube.save(out / "cube.csv");
      for (int k = 0; k < cube.num_topics(); ++k) {
        TopicMatrix m = topic_matrix(cube, k);
        m.save(out / ("matrix_" + slug(m.topic) + ".csv"), gaz);
      }
      std::cout << "cube: " << report.articles_counted << " articles counted, "
                << report.articles_outside_range << " outside year range\n";
      return 0;
    }

    if (*cmd_network) {
      require_file(cube_path, "cube");
      require_file(gazetteer_path, "gazetteer");
      require_file(tag_table_path, "tag table");
      auto [topics, table] = load_topic_taxonomy(tag_table_path);
      Gazetteer gaz = Gazetteer::load(gazetteer_path);
      RelatednessCube cube = RelatednessCube::load(cube_path, topics.names(), gaz.size(),
                                                   {year_first, year_last});
      int k_top = top_k == 0 ? 30 : top_k;
      for (int k = 0; k < cube.num_topics(); ++k) {
        TopicMatrix m = topic_matrix(cube, k);
        PrunedNetwork pruned = pathfinder_prune(graph_from_matrix(m));
        std::string s = slug(m.topic);
        export_gexf(pruned, gaz, out / ("network_" + s + ".gexf"));
        export_edge_list(pruned, gaz, out / ("network_" + s + ".csv"));
        PrunedNetwork sub = top_k_subgraph(pruned, k_top, gaz);
        export_gexf(sub, gaz, out / ("network_" + s + "_top" + std::to_string(k_top) + ".gexf"));
      }
      std::cout << "network: " << cube.num_topics() << " topic networks written\n";
      return 0;
    }

    if (*cmd_gravity) {
      require_file(cube_path, "cube");
      require_file(gazetteer_path, "gazetteer");
      require_file(tag_table_path, "tag table");
      require_file(city_counts_path, "city counts");
      auto [topics, table] = load_topic_taxonomy(tag_table_path);
      Gazetteer gaz = Gazetteer::load(gazetteer_path);
      RelatednessCube cube = RelatednessCube::load(cube_path, topics.names(), gaz.size(),
                                                   {year_first, year_last});
      auto counts = load_city_counts(city_counts_path, gaz);
      auto rows = table2(cube, counts, gaz);
      save_fit_table(rows, out / "gravity_table.csv");

      // Sweep curves for the all-news pairs, the data behind the R^2 plots.
      std::vector<PairObservation> obs;
      for (const auto& [pair, yearly] : cube.allnews()) {
        long c = yearly.sum();
        if (c < 1) continue;
        obs.push_back({pair, static_cast<double>(c), counts.at(pair.a),
                       counts.at(pair.b),
                       great_circle_km(gaz.city(pair.a), gaz.city(pair.b))});
      }
      if (obs.size() >= 3) {
        auto [log_fit, log_curve] = fit_beta_sweep(obs, true, gravity_step);
        save_sweep_curve(log_curve, out / "sweep_log.csv");
        if (raw_mode) {
          auto [raw_fit, raw_curve] = fit_beta_sweep(obs, false, gravity_step);
          save_sweep_curve(raw_curve, out / "sweep_raw.csv");
        }
      }
      std::cout << "gravity: " << rows.size() << " rows written\n";
      return 0;
    }

    if (*cmd_chart) {
      require_file(cube_path, "cube");
      require_file(gazetteer_path, "gazetteer");
      require_file(tag_table_path, "tag table");
      auto [topics, table] = load_topic_taxonomy(tag_table_path);
      Gazetteer gaz = Gazetteer::load(gazetteer_path);
      RelatednessCube cube = RelatednessCube::load(cube_path, topics.names(), gaz.size(),
                                                   {year_first, year_last});
      auto colon = pair_spec.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error("--pair must be CityA:CityB");
      auto find_city = [&](const std::string& name) {
        for (CityId id = 0; id < static_cast<CityId>(gaz.size()); ++id)
          if (gaz.city(id).name == name) return id;
        throw std::runtime_error("unknown city: " + name);
      };
      CityPair pair(find_city(pair_spec.substr(0, colon)),
                    find_city(pair_spec.substr(colon + 1)));
      int k_top = top_k == 0 ? 4 : top_k;
      auto series = pair_series(cube, pair, k_top);
      std::string s = slug(gaz.city(pair.a).name) + "_" + slug(gaz.city(pair.b).name);
      write_pair_chart(cube, gaz, pair, series, out / ("chart_" + s + ".svg"),
                       out / ("chart_" + s + ".csv"));
      std::cout << "chart: " << series.size() << " series for " << pair_spec << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

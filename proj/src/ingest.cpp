#include "cityrel/ingest.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "cityrel/csv.hpp"

namespace cityrel {

namespace {

std::string phrase_query(const std::vector<std::string>& terms) {
  std::string q;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) q += " AND ";
    q += '"' + terms[i] + '"';
  }
  return q;
}

// FNV-1a, used as a stable on-disk cache key.
std::string cache_key(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << h;
  return out.str();
}

}  // namespace

RateLimiter::RateLimiter(double requests_per_sec) {
  if (requests_per_sec <= 0.0) throw std::runtime_error("rate limit must be positive");
  interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
      std::chrono::duration<double>(1.0 / requests_per_sec));
  next_ = std::chrono::steady_clock::now();
}

void RateLimiter::acquire() {
  std::unique_lock lock(mutex_);
  auto now = std::chrono::steady_clock::now();
  if (now < next_) {
    std::this_thread::sleep_until(next_);
    now = next_;
  }
  next_ = now + interval_;
}

NewsClient::NewsClient(ClientConfig config)
    : config_(std::move(config)), limiter_(config_.rate_limit_per_sec) {
  if (config_.api_key.empty())
    throw AuthenticationError("no API key (set NEWS_API_KEY or --api-key)");
  if (!config_.cache_dir.empty()) std::filesystem::create_directories(config_.cache_dir);
}

std::string NewsClient::get_page(const QuerySpec& query, int page, FetchReport& report) {
  httplib::Params params{
      {"q", phrase_query(query.terms)},
      {"from-date", query.from},
      {"to-date", query.to},
      {"page", std::to_string(page)},
      {"page-size", std::to_string(query.page_size)},
      {"show-fields", "bodyText"},
      {"show-tags", "all"},
  };
  std::string param_str = httplib::detail::params_to_query_str(params);

  std::filesystem::path cache_file;
  if (!config_.cache_dir.empty()) {
    cache_file = config_.cache_dir / (cache_key(param_str) + ".json");
    if (std::filesystem::exists(cache_file)) {
      std::ifstream in(cache_file);
      std::ostringstream buf;
      buf << in.rdbuf();
      return buf.str();
    }
  }

  params.emplace("api-key", config_.api_key);
  std::string path = "/search?" + httplib::detail::params_to_query_str(params);

  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(std::chrono::seconds(10));
    client.set_read_timeout(std::chrono::seconds(30));
    auto res = client.Get(path);
    ++report.requests_made;

    if (res && res->status == 200) {
      if (!cache_file.empty()) {
        std::ofstream out(cache_file);
        out << res->body;
      }
      return res->body;
    }
    if (res && (res->status == 401 || res->status == 403))
      throw AuthenticationError("authentication failed (HTTP " +
                                std::to_string(res->status) + ")");
    bool retryable = !res || res->status >= 500;
    if (res && res->status >= 400 && res->status < 500)
      throw std::runtime_error("HTTP " + std::to_string(res->status) + " on page " +
                               std::to_string(page));
    if (!retryable || attempt + 1 >= config_.max_retries) {
      std::string reason = res ? "HTTP " + std::to_string(res->status)
                               : "network error: " + httplib::to_string(res.error());
      throw std::runtime_error(reason + " on page " + std::to_string(page) +
                               " after " + std::to_string(attempt + 1) + " attempts");
    }
    std::this_thread::sleep_for(
        std::chrono::milliseconds(config_.retry_base_delay_ms << attempt));
  }
}

std::pair<std::vector<NewsArticle>, FetchReport> NewsClient::fetch(const QuerySpec& query) {
  if (query.terms.empty() || query.terms.size() > 2)
    throw std::runtime_error("query must have 1 or 2 terms");
  if (query.from > query.to) throw std::runtime_error("query from-date after to-date");

  FetchReport report;
  std::vector<NewsArticle> articles;
  std::unordered_set<std::string> seen;

  int page = 1;
  int pages = 1;
  while (page <= pages) {
    std::string body = get_page(query, page, report);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("response page " + std::to_string(page) +
                               ": invalid JSON: " + e.what());
    }
    if (!j.contains("response"))
      throw std::runtime_error("response page " + std::to_string(page) +
                               ": missing \"response\"");
    const auto& resp = j["response"];
    pages = resp.value("pages", 1);
    for (const auto& r : resp.value("results", nlohmann::json::array())) {
      NewsArticle a;
      a.id = r.value("id", std::string{});
      if (a.id.empty())
        throw std::runtime_error("response page " + std::to_string(page) +
                                 ": result without id");
      a.title = r.value("webTitle", std::string{});
      a.published = r.value("webPublicationDate", std::string{});
      a.section = r.value("sectionId", std::string{});
      if (r.contains("fields")) a.body = r["fields"].value("bodyText", std::string{});
      if (r.contains("tags"))
        for (const auto& t : r["tags"]) a.tags.push_back(t.value("id", std::string{}));
      ++report.articles_returned;
      if (seen.insert(a.id).second) articles.push_back(std::move(a));
    }
    ++page;
  }
  report.articles_after_dedup = articles.size();
  return {std::move(articles), std::move(report)};
}

std::pair<std::vector<NewsArticle>, FetchReport> NewsClient::fetch_pair_articles(
    const CityPair& pair, const Gazetteer& gaz, const std::string& from,
    const std::string& to) {
  QuerySpec q{{gaz.city(pair.a).name, gaz.city(pair.b).name}, from, to,
              config_.page_size};
  return fetch(q);
}

std::pair<std::vector<NewsArticle>, FetchReport> NewsClient::fetch_city_articles(
    const City& city, const std::string& from, const std::string& to) {
  QuerySpec q{{city.name}, from, to, config_.page_size};
  return fetch(q);
}

namespace {

std::set<std::string> load_cursor(const std::filesystem::path& path) {
  std::set<std::string> done;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) done.insert(line);
  return done;
}

void append_articles(std::ofstream& out, const std::vector<NewsArticle>& articles,
                     std::unordered_set<std::string>& written) {
  for (const NewsArticle& a : articles) {
    if (!written.insert(a.id).second) continue;
    nlohmann::json j;
    j["id"] = a.id;
    j["title"] = a.title;
    j["body"] = a.body;
    j["published"] = a.published;
    j["tags"] = a.tags;
    j["section"] = a.section;
    out << j.dump() << '\n';
  }
}

std::unordered_set<std::string> ids_already_in(const std::filesystem::path& path) {
  std::unordered_set<std::string> ids;
  if (!std::filesystem::exists(path)) return ids;
  LoadReport lr;
  for (const NewsArticle& a : load_corpus(path, &lr).articles) ids.insert(a.id);
  return ids;
}

}  // namespace

HarvestReport harvest(const Gazetteer& gaz, const std::string& from,
                      const std::string& to, const ClientConfig& config,
                      const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto cursor_path = out_dir / "cursor.txt";
  auto manifest_path = out_dir / "manifest.csv";
  auto pair_corpus_path = out_dir / "pair_corpus.jsonl";
  auto city_corpus_path = out_dir / "city_corpus.jsonl";

  std::set<std::string> done = load_cursor(cursor_path);
  bool new_manifest = !std::filesystem::exists(manifest_path);
  std::ofstream manifest(manifest_path, std::ios::app);
  if (new_manifest) manifest << "query_kind,city_a,city_b,article_count,status\n";
  std::ofstream cursor(cursor_path, std::ios::app);

  std::unordered_set<std::string> pair_ids = ids_already_in(pair_corpus_path);
  std::unordered_set<std::string> city_ids = ids_already_in(city_corpus_path);
  std::ofstream pair_out(pair_corpus_path, std::ios::app);
  std::ofstream city_out(city_corpus_path, std::ios::app);

  NewsClient client(config);
  HarvestReport report;

  auto run_query =
      [&](const std::string& key, const std::string& kind, const std::string& city_a,
          const std::string& city_b, std::ofstream& corpus_out,
          std::unordered_set<std::string>& written,
          auto&& fetch_fn) {
        if (done.contains(key)) {
          ++report.queries_skipped;
          return;
        }
        try {
          auto [articles, fr] = fetch_fn();
          report.requests_made += fr.requests_made;
          append_articles(corpus_out, articles, written);
          corpus_out.flush();
          manifest << kind << ',' << csv_escape(city_a) << ',' << csv_escape(city_b)
                   << ',' << articles.size() << ",ok\n";
          ++report.queries_run;
        } catch (const AuthenticationError&) {
          throw;  // nothing downstream can succeed without a key
        } catch (const std::exception& e) {
          manifest << kind << ',' << csv_escape(city_a) << ',' << csv_escape(city_b)
                   << ",0," << csv_escape(std::string("failed: ") + e.what()) << '\n';
          ++report.queries_failed;
          manifest.flush();
          return;
        }
        manifest.flush();
        cursor << key << '\n';
        cursor.flush();
      };

  const int n = static_cast<int>(gaz.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      CityPair pair(i, j);
      std::string key = "pair:" + std::to_string(i) + ":" + std::to_string(j) + ":" +
                        from + ":" + to;
      run_query(key, "pair", gaz.city(i).name, gaz.city(j).name, pair_out, pair_ids,
                [&] { return client.fetch_pair_articles(pair, gaz, from, to); });
    }
  for (int i = 0; i < n; ++i) {
    std::string key = "city:" + std::to_string(i) + ":" + from + ":" + to;
    run_query(key, "city", gaz.city(i).name, "", city_out, city_ids,
              [&] { return client.fetch_city_articles(gaz.city(i), from, to); });
  }
  return report;
}

}  // namespace cityrel

#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cityrel/corpus.hpp"

namespace cityrel {

struct ClientConfig {
  std::string base_url = "https://content.guardianapis.com";
  std::string api_key;
  int page_size = 50;
  double rate_limit_per_sec = 1.0;
  int max_retries = 3;
  int retry_base_delay_ms = 1000;
  std::filesystem::path cache_dir;  // empty disables response caching
};

struct QuerySpec {
  std::vector<std::string> terms;  // 1 or 2 exact phrases
  std::string from;                // ISO dates
  std::string to;
  int page_size = 50;
};

struct FetchReport {
  std::size_t requests_made = 0;
  std::size_t articles_returned = 0;
  std::size_t articles_after_dedup = 0;
  std::vector<std::pair<int, std::string>> failures;  // (page, reason)
};

// Thread-safe token spacing: callers block until at least 1/limit seconds
// have passed since the previous acquire.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_sec);
  void acquire();

 private:
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
  std::mutex mutex_;
};

struct AuthenticationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Guardian-style search client. Drains all result pages of a query,
// parses articles, and deduplicates by id (first occurrence wins).
class NewsClient {
 public:
  explicit NewsClient(ClientConfig config);

  std::pair<std::vector<NewsArticle>, FetchReport> fetch(const QuerySpec& query);

  std::pair<std::vector<NewsArticle>, FetchReport> fetch_pair_articles(
      const CityPair& pair, const Gazetteer& gaz, const std::string& from,
      const std::string& to);
  std::pair<std::vector<NewsArticle>, FetchReport> fetch_city_articles(
      const City& city, const std::string& from, const std::string& to);

  const ClientConfig& config() const { return config_; }

 private:
  std::string get_page(const QuerySpec& query, int page, FetchReport& report);

  ClientConfig config_;
  RateLimiter limiter_;
};

struct HarvestReport {
  std::size_t queries_run = 0;
  std::size_t queries_skipped = 0;  // already completed per the cursor
  std::size_t queries_failed = 0;
  std::size_t requests_made = 0;
};

// Full retrieval protocol: every city pair plus every individual city over
// the date range. Writes pair_corpus.jsonl, city_corpus.jsonl, and
// manifest.csv under out_dir; completed queries are recorded in cursor.txt
// and skipped on rerun. Individual query failures are recorded in the
// manifest and do not stop the harvest.
HarvestReport harvest(const Gazetteer& gaz, const std::string& from,
                      const std::string& to, const ClientConfig& config,
                      const std::filesystem::path& out_dir);

}  // namespace cityrel

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cityrel/corpus.hpp"
#include "cityrel/relatedness.hpp"

namespace cityrel {

// Haversine on a sphere of radius 6371.0 km. Throws on coincident
// coordinates (log-transformed fits need d > 0).
double great_circle_km(const City& a, const City& b);

struct PairObservation {
  CityPair pair;
  double c_ij;  // co-occurrence count, >= 1
  double c_i;   // per-city marginal counts, >= 1
  double c_j;
  double d_ij;  // great-circle distance, km, > 0
};

struct OlsFit {
  double b0;
  double b1;
  double r_squared;
  bool degenerate = false;  // SST == 0; r_squared reported as 0
};

// Simple least squares y = b0 + b1 x.
OlsFit simple_ols(const std::vector<double>& x, const std::vector<double>& y);

struct GravityFit {
  double beta = 0.0;
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;  // multiple-regression only
  double r_squared = 0.0;
  std::string method;  // sweep-raw | sweep-log | multiple-regression
  std::size_t n_pairs = 0;
};

struct SweepPoint {
  double beta;
  std::optional<double> r_squared;  // empty when the regression degenerated
};

// Grid search over beta in [0, 1]. Raw mode regresses c_ij on
// c_i*c_j / d^beta; log mode regresses log c_ij on log(c_i*c_j) - beta*log d.
// Smallest beta wins R-squared ties.
std::pair<GravityFit, std::vector<SweepPoint>> fit_beta_sweep(
    const std::vector<PairObservation>& obs, bool log_transform, double step);

// Two-predictor OLS: log c_ij = b0 + b1 log(c_i c_j) + b2 log d;
// beta = -b2 / b1.
GravityFit fit_beta_regression(const std::vector<PairObservation>& obs);

struct TopicFitRow {
  std::string topic;  // topic name or "All News"
  std::optional<GravityFit> sweep;       // log mode, step 0.01
  std::optional<GravityFit> regression;
  std::size_t n_pairs = 0;
  std::string note;  // nonempty when the row is unfit
};

// One row per topic plus an "All News" row. Pairs with zero count under a
// topic are excluded from that topic's fit; rows with fewer than 3
// qualifying pairs are marked unfit.
std::vector<TopicFitRow> table2(const RelatednessCube& cube,
                                const std::map<CityId, double>& city_counts,
                                const Gazetteer& gaz);

void save_fit_table(const std::vector<TopicFitRow>& rows,
                    const std::filesystem::path& csv_path);
void save_sweep_curve(const std::vector<SweepPoint>& curve,
                      const std::filesystem::path& csv_path);

}  // namespace cityrel

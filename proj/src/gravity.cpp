#include "cityrel/gravity.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>

#include "cityrel/csv.hpp"

namespace cityrel {

namespace {
constexpr double kEarthRadiusKm = 6371.0;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void check_observations(const std::vector<PairObservation>& obs) {
  if (obs.empty()) throw std::runtime_error("no pair observations");
  for (const PairObservation& o : obs) {
    if (o.c_ij < 1.0 || o.c_i < 1.0 || o.c_j < 1.0)
      throw std::runtime_error("pair observation with count < 1");
    if (o.d_ij <= 0.0) throw std::runtime_error("pair observation with distance <= 0");
  }
}

}  // namespace

double great_circle_km(const City& a, const City& b) {
  if (a.lat == b.lat && a.lon == b.lon)
    throw std::runtime_error("identical coordinates: " + a.name + " / " + b.name);
  double lat1 = deg2rad(a.lat), lat2 = deg2rad(b.lat);
  double dlat = lat2 - lat1;
  double dlon = deg2rad(b.lon - a.lon);
  double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

OlsFit simple_ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::runtime_error("x/y length mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::runtime_error("need at least 3 points");

  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mean_x, dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::runtime_error("constant predictor; slope undefined");

  OlsFit fit;
  fit.b1 = sxy / sxx;
  fit.b0 = mean_y - fit.b1 * mean_x;
  if (syy == 0.0) {
    fit.r_squared = 0.0;
    fit.degenerate = true;
  } else {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double resid = y[i] - (fit.b0 + fit.b1 * x[i]);
      ssr += resid * resid;
    }
    fit.r_squared = 1.0 - ssr / syy;
  }
  return fit;
}

std::pair<GravityFit, std::vector<SweepPoint>> fit_beta_sweep(
    const std::vector<PairObservation>& obs, bool log_transform, double step) {
  check_observations(obs);
  if (step <= 0.0 || step >= 1.0) throw std::runtime_error("step must be in (0, 1)");

  std::vector<SweepPoint> curve;
  GravityFit best;
  best.method = log_transform ? "sweep-log" : "sweep-raw";
  best.n_pairs = obs.size();
  bool found = false;

  std::vector<double> x(obs.size()), y(obs.size());
  for (int i = 0;; ++i) {
    double beta = i * step;
    if (beta > 1.0 + 1e-12) break;
    beta = std::min(beta, 1.0);
    for (std::size_t p = 0; p < obs.size(); ++p) {
      const PairObservation& o = obs[p];
      if (log_transform) {
        x[p] = std::log(o.c_i * o.c_j) - beta * std::log(o.d_ij);
        y[p] = std::log(o.c_ij);
      } else {
        x[p] = o.c_i * o.c_j / std::pow(o.d_ij, beta);
        y[p] = o.c_ij;
      }
    }
    SweepPoint point{beta, std::nullopt};
    try {
      OlsFit fit = simple_ols(x, y);
      if (!fit.degenerate) {
        point.r_squared = fit.r_squared;
        if (!found || fit.r_squared > best.r_squared) {
          best.beta = beta;
          best.b0 = fit.b0;
          best.b1 = fit.b1;
          best.r_squared = fit.r_squared;
          found = true;
        }
      }
    } catch (const std::runtime_error&) {
      // degenerate grid point, excluded from the argmax
    }
    curve.push_back(point);
    if (beta == 1.0) break;
  }
  if (!found) throw std::runtime_error("every grid point degenerated");
  return {best, curve};
}

GravityFit fit_beta_regression(const std::vector<PairObservation>& obs) {
  check_observations(obs);
  const std::size_t n = obs.size();
  if (n < 3) throw std::runtime_error("need at least 3 pair observations");

  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(obs[i].c_i * obs[i].c_j);
    X(i, 2) = std::log(obs[i].d_ij);
    y(i) = std::log(obs[i].c_ij);
  }

  Eigen::Matrix3d xtx = X.transpose() * X;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(xtx);
  if (!lu.isInvertible()) throw std::runtime_error("singular normal matrix (collinear predictors)");
  Eigen::Vector3d b = lu.solve(X.transpose() * y);

  GravityFit fit;
  fit.method = "multiple-regression";
  fit.n_pairs = n;
  fit.b0 = b(0);
  fit.b1 = b(1);
  fit.b2 = b(2);
  if (fit.b1 == 0.0) throw std::runtime_error("b1 = 0; beta undefined");
  fit.beta = -fit.b2 / fit.b1;

  double mean_y = y.mean();
  double sst = (y.array() - mean_y).square().sum();
  if (sst == 0.0) {
    fit.r_squared = 0.0;
  } else {
    double ssr = (y - X * b).squaredNorm();
    fit.r_squared = 1.0 - ssr / sst;
  }
  return fit;
}

std::vector<TopicFitRow> table2(const RelatednessCube& cube,
                                const std::map<CityId, double>& city_counts,
                                const Gazetteer& gaz) {
  // Distances are shared across rows.
  std::map<CityPair, double> dist;
  auto distance = [&](const CityPair& p) {
    auto it = dist.find(p);
    if (it != dist.end()) return it->second;
    double d = great_circle_km(gaz.city(p.a), gaz.city(p.b));
    dist[p] = d;
    return d;
  };

  auto marginal = [&](CityId id) {
    auto it = city_counts.find(id);
    if (it == city_counts.end() || it->second < 1.0)
      throw std::runtime_error("missing per-city count for " + gaz.city(id).name);
    return it->second;
  };

  auto fit_row = [&](const std::string& name,
                     const std::vector<PairObservation>& obs) -> TopicFitRow {
    TopicFitRow row;
    row.topic = name;
    row.n_pairs = obs.size();
    if (obs.size() < 3) {
      row.note = "unfit: fewer than 3 qualifying pairs";
      return row;
    }
    try {
      row.sweep = fit_beta_sweep(obs, /*log_transform=*/true, 0.01).first;
    } catch (const std::runtime_error& e) {
      row.note = e.what();
    }
    try {
      row.regression = fit_beta_regression(obs);
    } catch (const std::runtime_error& e) {
      row.note = e.what();
    }
    return row;
  };

  std::vector<TopicFitRow> rows;

  // All-news row: topic-undifferentiated pair totals.
  {
    std::vector<PairObservation> obs;
    for (const auto& [pair, yearly] : cube.allnews()) {
      long c = yearly.sum();
      if (c < 1) continue;
      obs.push_back({pair, static_cast<double>(c), marginal(pair.a), marginal(pair.b),
                     distance(pair)});
    }
    rows.push_back(fit_row("All News", obs));
  }

  for (int k = 0; k < cube.num_topics(); ++k) {
    std::vector<PairObservation> obs;
    for (const auto& [pair, cell] : cube.cells()) {
      long c = cell.row(k).sum();
      if (c < 1) continue;
      obs.push_back({pair, static_cast<double>(c), marginal(pair.a), marginal(pair.b),
                     distance(pair)});
    }
    rows.push_back(fit_row(cube.topic_names()[k], obs));
  }
  return rows;
}

void save_fit_table(const std::vector<TopicFitRow>& rows,
                    const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write fit table: " + csv_path.string());
  out.precision(6);
  out << std::fixed;
  out << "topic,method,beta,r_squared,n_pairs\n";
  for (const TopicFitRow& row : rows) {
    if (row.sweep)
      out << csv_escape(row.topic) << ",sweep-log," << row.sweep->beta << ','
          << row.sweep->r_squared << ',' << row.sweep->n_pairs << '\n';
    if (row.regression)
      out << csv_escape(row.topic) << ",multiple-regression," << row.regression->beta
          << ',' << row.regression->r_squared << ',' << row.regression->n_pairs << '\n';
    if (!row.sweep && !row.regression)
      out << csv_escape(row.topic) << ",unfit,,," << row.n_pairs << '\n';
  }
}

void save_sweep_curve(const std::vector<SweepPoint>& curve,
                      const std::filesystem::path& csv_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write sweep curve: " + csv_path.string());
  out.precision(12);
  out << "beta,r_squared\n";
  for (const SweepPoint& p : curve) {
    out << p.beta << ',';
    if (p.r_squared) out << *p.r_squared;
    out << '\n';
  }
}

}  // namespace cityrel

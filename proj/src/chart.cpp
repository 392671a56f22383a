#include "cityrel/chart.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "cityrel/csv.hpp"

namespace cityrel {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

void write_pair_chart(const RelatednessCube& cube, const Gazetteer& gaz,
                      const CityPair& pair, const std::vector<TopicSeries>& series,
                      const std::filesystem::path& svg_path,
                      const std::filesystem::path& csv_path) {
  if (series.empty()) throw std::runtime_error("no series to plot");

  {
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot write chart csv: " + csv_path.string());
    csv.precision(12);
    csv << "topic,year,normalized_relatedness\n";
    for (const TopicSeries& s : series)
      for (const auto& [year, value] : s.by_year)
        csv << csv_escape(cube.topic_names()[s.topic]) << ',' << year << ',' << value
            << '\n';
  }

  const YearRange& years = cube.years();
  double y_max = 0.0;
  for (const TopicSeries& s : series)
    for (const auto& [year, value] : s.by_year) y_max = std::max(y_max, value);
  if (y_max == 0.0) y_max = 1.0;

  const double width = 720, height = 420;
  const double left = 70, right = 30, top = 50, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto x_of = [&](int year) {
    if (years.count() == 1) return left + plot_w / 2;
    return left + plot_w * (year - years.first) / (years.last - years.first);
  };
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / y_max); };

  std::ofstream svg(svg_path);
  if (!svg) throw std::runtime_error("cannot write chart svg: " + svg_path.string());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << gaz.city(pair.a).name
      << " &#8212; " << gaz.city(pair.b).name << "</text>\n";
  // axes
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int year = years.first; year <= years.last; ++year) {
    svg << "<text x=\"" << x_of(year) << "\" y=\"" << top + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
        << year << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    double v = y_max * i / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << y_of(v) + 3
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << v
        << "</text>\n";
  }

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (int year = years.first; year <= years.last; ++year) {
      auto it = series[s].by_year.find(year);
      double v = it == series[s].by_year.end() ? 0.0 : it->second;
      svg << x_of(year) << ',' << y_of(v) << ' ';
    }
    svg << "\"/>\n";
    for (int year = years.first; year <= years.last; ++year) {
      auto it = series[s].by_year.find(year);
      double v = it == series[s].by_year.end() ? 0.0 : it->second;
      svg << "<circle cx=\"" << x_of(year) << "\" cy=\"" << y_of(v)
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    svg << "<text x=\"" << left + 8 << "\" y=\"" << top + 14 + 16 * s
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">"
        << cube.topic_names()[series[s].topic] << "</text>\n";
  }
  svg << "</svg>\n";
}

}  // namespace cityrel

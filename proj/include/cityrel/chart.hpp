#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cityrel/corpus.hpp"
#include "cityrel/relatedness.hpp"

namespace cityrel {

// Static SVG line chart of per-topic normalized relatedness over years, one
// line per series, plus a companion CSV of the plotted values.
void write_pair_chart(const RelatednessCube& cube, const Gazetteer& gaz,
                      const CityPair& pair, const std::vector<TopicSeries>& series,
                      const std::filesystem::path& svg_path,
                      const std::filesystem::path& csv_path);

}  // namespace cityrel

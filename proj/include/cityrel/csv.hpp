#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cityrel {

// Minimal RFC-4180-ish CSV: handles quoted fields and embedded commas.
std::vector<std::string> split_csv_line(std::string_view line);

std::string csv_escape(std::string_view field);

}  // namespace cityrel

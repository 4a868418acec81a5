#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace fiqa {

/// printf("%.*g") formatting; 17 significant digits round-trips a double.
std::string format_real(double value, int significant_digits = 17);

/// Open helpers throwing DataError that names the path.
std::ifstream open_input(const std::filesystem::path& path);
std::ofstream open_output(const std::filesystem::path& path);

// Minimal RFC 4180 CSV: fields are quoted only when they need it.
std::string csv_field(std::string_view field);
std::vector<std::string> split_csv_line(std::string_view line);

/// Parses a full-string real; throws DataError mentioning `what` otherwise.
double parse_real(std::string_view text, std::string_view what);

}  // namespace fiqa

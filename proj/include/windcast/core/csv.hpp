#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace windcast::csv {

std::vector<std::string> split_line(std::string_view line, char sep = ',');

std::string_view trim(std::string_view s);

/// Strict number parse of the whole field; throws DataError naming `what`.
double parse_double(std::string_view field, std::string_view what);
long parse_long(std::string_view field, std::string_view what);

/// Shortest round-trip decimal representation; stable across runs.
std::string fmt_double(double v);

/// Reads all non-empty lines. The first returned row is the header.
std::vector<std::vector<std::string>> read_rows(std::istream& in);
std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path);

/// Index of `name` in `header`; throws DataError when absent.
std::size_t column(const std::vector<std::string>& header, std::string_view name);

std::ofstream open_out(const std::filesystem::path& path);

}  // namespace windcast::csv

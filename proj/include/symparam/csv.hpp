#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace symparam {

// Shortest representation that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

void write_csv_row(std::ostream& os, std::span<const double> values);
void write_csv_header(std::ostream& os, std::span<const std::string> names);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Reads a numeric CSV. With `has_header`, the first line gives column names.
CsvTable read_csv(const std::filesystem::path& path, bool has_header = true);

// Opens for writing, creating parent directories; FormatError when unwritable.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace symparam

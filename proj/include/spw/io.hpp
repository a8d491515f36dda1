#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spw::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);
/// Strict parse of a full token; throws DomainError on junk.
double parse_double(std::string_view token);

/// Splits on commas, trimming ASCII whitespace from every field.
std::vector<std::string> split_csv_line(std::string_view line);
/// Comma-separated list of doubles ("100,30,10").
std::vector<double> parse_double_list(std::string_view text);

/// Header plus rows of numbers.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

/// RFC-4180 style: header row, comma separators, CRLF-free "\n" endings.
/// Numbers use format_double so that read_csv reproduces them exactly.
void write_csv(std::ostream& os, const Table& table);
Table read_csv(std::istream& is);

void write_csv_file(const std::filesystem::path& path, const Table& table);
Table read_csv_file(const std::filesystem::path& path);

/// Every number in a one-column or one-row file, optional header skipped.
std::vector<double> read_vector_file(const std::filesystem::path& path);

}  // namespace spw::io

#include "spw/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "spw/error.hpp"

namespace spw::io {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool parses_as_number(std::string_view token) {
  token = trim(token);
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc() && ptr == token.data() + token.size();
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw NumericError("cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view token) {
  std::string_view t = trim(token);
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw DomainError("not a number: '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_double_list(std::string_view text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& field : split_csv_line(text)) out.push_back(parse_double(field));
  return out;
}

void write_csv(std::ostream& os, const Table& table) {
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) os << ',';
    os << table.header[c];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      os << format_double(row[c]);
    }
    os << '\n';
  }
}

Table read_csv(std::istream& is) {
  Table table;
  std::string line;
  if (!std::getline(is, line)) throw DomainError("empty CSV input");
  table.header = split_csv_line(line);
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw DomainError("CSV row has " + std::to_string(fields.size()) + " fields, header has " +
                        std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv_file(const std::filesystem::path& path, const Table& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_csv(os, table);
  if (!os) throw Error("write failed: " + path.string());
}

Table read_csv_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open " + path.string());
  return read_csv(is);
}

std::vector<double> read_vector_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DomainError("cannot open " + path.string());
  std::vector<double> out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (first) {
      first = false;
      bool numeric = true;
      for (const auto& f : fields) numeric = numeric && parses_as_number(f);
      if (!numeric) continue;  // header
    }
    for (const auto& f : fields) out.push_back(parse_double(f));
  }
  if (out.empty()) throw DomainError("no values in " + path.string());
  return out;
}

}  // namespace spw::io

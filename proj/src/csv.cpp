#include "nfsrd/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "nfsrd/error.hpp"

namespace nfsrd {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                            : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_cell(std::string_view cell, std::size_t line_no, const std::string& column) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError("non-numeric value '" + std::string(cell) + "' at line " +
                    std::to_string(line_no) + ", column '" + column + "'");
  }
  return value;
}

}  // namespace

Dataset read_csv(std::istream& in, const std::string& target) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw DataError("empty CSV input");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::vector<std::string> header;
  for (auto cell : split(line)) header.emplace_back(cell);
  std::size_t target_col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == target) target_col = c;
  }
  if (target_col == header.size()) throw DataError("target column '" + target + "' not found");

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != target_col) names.push_back(header[c]);
  }
  if (names.empty()) throw DataError("CSV has no feature columns");

  std::vector<double> features;
  std::vector<double> response;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double value = parse_cell(cells[c], line_no, header[c]);
      (c == target_col ? response : features).push_back(value);
    }
  }
  if (response.empty()) throw DataError("CSV has a header but no data rows");
  return Dataset(std::move(features), std::move(names), std::move(response));
}

Dataset read_csv_file(const std::string& path, const std::string& target) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_csv(in, target);
}

void write_csv(std::ostream& out, const Dataset& data, const std::string& target) {
  char buffer[64];
  auto put = [&](double v) {
    const auto res = std::to_chars(buffer, buffer + sizeof(buffer), v);
    out.write(buffer, res.ptr - buffer);
  };
  for (const auto& name : data.names()) out << name << ',';
  out << target << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (double v : data.row(i)) {
      put(v);
      out << ',';
    }
    put(data.response()[i]);
    out << '\n';
  }
}

}  // namespace nfsrd

#include "gridsur/csv.hpp"

#include <charconv>
#include <stdexcept>

namespace gridsur {

std::vector<double> CsvTable::column(std::size_t col) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = at(r, col);
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split(line);
    if (table.header.empty()) {
      for (auto f : fields) table.header.emplace_back(f);
      continue;
    }
    if (fields.size() != table.header.size())
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected " +
                               std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    for (auto f : fields) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size())
        throw std::runtime_error("CSV line " + std::to_string(line_no) +
                                 ": bad number '" + std::string(f) + "'");
      table.data.push_back(v);
    }
    ++table.rows;
  }
  if (table.header.empty()) throw std::runtime_error("CSV is empty");
  return table;
}

}  // namespace gridsur

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridsur {

/// Numeric CSV: one header row of names, then rows of numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::size_t rows = 0;
  std::vector<double> data;  // row-major, rows x header.size()

  [[nodiscard]] double at(std::size_t row, std::size_t col) const {
    return data[row * header.size() + col];
  }
  [[nodiscard]] std::vector<double> column(std::size_t col) const;
};

/// Throws std::runtime_error naming the line on malformed input.
[[nodiscard]] CsvTable parse_csv(std::string_view text);

}  // namespace gridsur

#pragma once

#include <string>
#include <vector>

namespace terralio::io {

/// Numeric table with a one-line header. Cells round-trip doubles exactly
/// (written with max_digits10).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Throws std::runtime_error on missing file or ragged rows.
CsvTable read_csv(const std::string& path);

}  // namespace terralio::io

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace qha::cli {

// Column-oriented CSV: header row mandatory, floats at 17 significant
// digits, LF line endings. The fixed format keeps reruns byte-comparable.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns);

  void write_row(const std::vector<double>& values);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t n_columns_;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // data[c][row]

  // index of a named column; throws MissingColumnError
  std::size_t column(const std::string& name) const;
  std::size_t rows() const { return columns.empty() ? 0 : data[0].size(); }
};

CsvTable read_csv(const std::filesystem::path& path);

std::string format_double(double v);

}  // namespace qha::cli

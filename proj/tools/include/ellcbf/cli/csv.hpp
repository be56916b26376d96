#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ellcbf::cli {

/// Seventeen significant digits with the decimal point always shown;
/// round-trips every finite double exactly.
std::string formatNumber(double value);

/// Strict parse of a full field; throws std::invalid_argument.
double parseNumber(std::string_view text);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& add(double value);
  CsvWriter& add(long long value);
  CsvWriter& add(int value) { return add(static_cast<long long>(value)); }
  CsvWriter& add(std::size_t value) { return add(static_cast<long long>(value)); }
  CsvWriter& add(std::string_view text);
  /// Terminates the current record; throws if it has the wrong width.
  void endRow();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column, or -1.
  int column(std::string_view name) const;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a comma-separated file without quoting. Every record must have the
/// header's width.
CsvTable readCsv(std::istream& in, const std::string& source);
CsvTable readCsvFile(const std::filesystem::path& path);

}  // namespace ellcbf::cli

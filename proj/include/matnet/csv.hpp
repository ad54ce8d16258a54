#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace matnet::csv {

/// A parsed CSV file: header plus rows, each row remembering its source line.
struct Table {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;

  /// Column index by name; throws IngestError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  double number(std::size_t row, std::size_t col) const;
  long integer(std::size_t row, std::size_t col) const;
  const std::string& text(std::size_t row, std::size_t col) const;
  /// True when the cell is empty (treated as a missing value).
  bool missing(std::size_t row, std::size_t col) const;
};

/// Reads a comma-separated file with a header row. Blank lines are skipped.
/// Every data row must have the header's field count.
Table read(const std::filesystem::path& path);
Table parse(std::string_view text, const std::string& source = "<memory>");

/// Formats a double at 12 significant digits.
std::string fmt(double v);

/// Writes rows of already-formatted cells.
class Writer {
public:
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& cells);

private:
  std::ofstream out_;
};

}  // namespace matnet::csv

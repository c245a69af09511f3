#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qnn {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// Strict parse of a whole field; throws ArgumentError on trailing garbage.
double parse_double(std::string_view text);

/// Quote a field when it contains a comma, quote, or line break.
std::string csv_escape(std::string_view field);

std::vector<std::string> split_csv_line(std::string_view line);

/// Rows are buffered as text; the caller decides where the bytes go.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

  void write(std::ostream& out) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace qnn

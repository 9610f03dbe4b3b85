#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bsn {

// Splits one CSV line, handling quoted fields and doubled quotes.
// Trailing '\r' is stripped.
std::vector<std::string> split_csv_line(const std::string& line);

// Header-indexed CSV table loaded fully into memory. All feed and trace
// files in this project are small enough for that.
class CsvTable {
 public:
  // Reads a CSV file with a mandatory header row. Lines starting with
  // '#' before the header are treated as provenance comments and kept
  // aside. Throws DataError if the file cannot be opened or has no
  // header.
  static CsvTable read_file(const std::string& path);

  // Column index or -1 when absent.
  int column(const std::string& name) const;
  bool has_column(const std::string& name) const { return column(name) >= 0; }

  size_t row_count() const { return rows_.size(); }
  const std::vector<std::string>& row(size_t i) const { return rows_[i]; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::string>& comments() const { return comments_; }

  // Field accessors tolerate short rows by returning empty/default.
  const std::string& field(size_t row, int col) const;
  std::optional<int64_t> field_int(size_t row, int col) const;
  std::optional<double> field_double(size_t row, int col) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::string> comments_;
};

// Parses "HH:MM:SS" (hours may exceed 23 for after-midnight trips) into
// seconds since midnight. Returns nullopt on malformed input.
std::optional<int64_t> parse_hms(const std::string& s);

// Formats seconds since midnight as HH:MM:SS (hours not wrapped).
std::string format_hms(int64_t seconds);

// Quotes a CSV field only when needed.
std::string csv_quote(const std::string& field);

}  // namespace bsn

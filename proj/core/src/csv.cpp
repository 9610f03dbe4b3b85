#include "bsn/csv.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>

#include "bsn/error.hpp"

namespace bsn {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') {
      if (quoted && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else {
        quoted = !quoted;
      }
    } else if (c == ',' && !quoted) {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\r') {
      continue;
    } else {
      cell += c;
    }
  }
  out.push_back(std::move(cell));
  return out;
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvTable t;
  std::string line;
  bool have_header = false;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      // strip UTF-8 BOM
      if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
          static_cast<unsigned char>(line[1]) == 0xBB &&
          static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
      }
      first = false;
    }
    if (!have_header && !line.empty() && line[0] == '#') {
      t.comments_.push_back(line);
      continue;
    }
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      t.header_ = std::move(cells);
      have_header = true;
    } else {
      t.rows_.push_back(std::move(cells));
    }
  }
  if (!have_header) throw DataError("no header row in " + path);
  return t;
}

int CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return static_cast<int>(i);
  }
  return -1;
}

const std::string& CsvTable::field(size_t row, int col) const {
  static const std::string empty;
  if (col < 0) return empty;
  const auto& r = rows_[row];
  if (static_cast<size_t>(col) >= r.size()) return empty;
  return r[static_cast<size_t>(col)];
}

std::optional<int64_t> CsvTable::field_int(size_t row, int col) const {
  const std::string& s = field(row, col);
  if (s.empty()) return std::nullopt;
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<double> CsvTable::field_double(size_t row, int col) const {
  const std::string& s = field(row, col);
  if (s.empty()) return std::nullopt;
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

std::optional<int64_t> parse_hms(const std::string& s) {
  int64_t parts[3] = {0, 0, 0};
  int idx = 0;
  bool any_digit = false;
  for (char c : s) {
    if (c == ' ') continue;
    if (c >= '0' && c <= '9') {
      parts[idx] = parts[idx] * 10 + (c - '0');
      any_digit = true;
    } else if (c == ':') {
      if (!any_digit || idx == 2) return std::nullopt;
      ++idx;
      any_digit = false;
    } else {
      return std::nullopt;
    }
  }
  if (idx != 2 || !any_digit) return std::nullopt;
  if (parts[1] > 59 || parts[2] > 59) return std::nullopt;
  return parts[0] * 3600 + parts[1] * 60 + parts[2];
}

std::string format_hms(int64_t seconds) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld",
                static_cast<long long>(seconds / 3600),
                static_cast<long long>((seconds / 60) % 60),
                static_cast<long long>(seconds % 60));
  return buf;
}

std::string csv_quote(const std::string& field) {
  bool needs = false;
  for (char c : field) {
    if (c == ',' || c == '"' || c == '\n') {
      needs = true;
      break;
    }
  }
  if (!needs) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace bsn

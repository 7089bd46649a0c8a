#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace skg {

using Cell = std::variant<double, long long, std::string>;

/// Column-named rows of numbers and strings, the in-memory form of every CSV artifact.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<std::string> columns);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::vector<Cell>& row(std::size_t i) const { return rows_[i]; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  /// Throws ConfigError when the width does not match the header.
  void add_row(std::vector<Cell> row);

  bool operator==(const Table&) const = default;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Shortest decimal that parses back to the same double; always carries a '.', an
/// exponent, "inf" or "nan" so it never reads back as an integer.
std::string format_double(double v);

std::string to_csv(const Table& t);
/// Cells read back as integer, then double, then (possibly quoted) string.
Table parse_csv(const std::string& text);

/// Array of one object per row.
std::string to_json(const Table& t);

void write_csv(const Table& t, const std::filesystem::path& path);
Table read_csv(const std::filesystem::path& path);

}  // namespace skg

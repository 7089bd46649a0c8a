#include "skg/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skg/manifest.hpp"
#include "skg/types.hpp"

namespace skg {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size())
    throw ConfigError({"row has " + std::to_string(row.size()) + " cells, table has " +
                       std::to_string(columns_.size()) + " columns"});
  rows_.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

namespace {

Cell parse_cell(const std::string& field, bool quoted);

std::string quote(const std::string& s) {
  const bool plain = s.find_first_of(",\"\n\r") == std::string::npos && !s.empty() &&
                     std::holds_alternative<std::string>(parse_cell(s, false));
  if (plain) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string format_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return quote(std::get<std::string>(c));
}

Cell parse_cell(const std::string& field, bool quoted) {
  if (quoted) return field;
  long long i = 0;
  const char* b = field.data();
  const char* e = b + field.size();
  if (auto r = std::from_chars(b, e, i); r.ec == std::errc() && r.ptr == e) return i;
  double d = 0.0;
  if (auto r = std::from_chars(b, e, d); r.ec == std::errc() && r.ptr == e && !field.empty())
    return d;
  return field;
}

/// RFC 4180 fields of every record.
std::vector<std::vector<std::pair<std::string, bool>>> split_records(const std::string& text) {
  std::vector<std::vector<std::pair<std::string, bool>>> records;
  std::vector<std::pair<std::string, bool>> rec;
  std::string field;
  bool quoted = false, in_quotes = false, any = false;
  auto end_field = [&] {
    rec.emplace_back(field, quoted);
    field.clear();
    quoted = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') {
      in_quotes = quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_field();
      records.push_back(std::move(rec));
      rec.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (in_quotes) throw ConfigError({"CSV ends inside a quoted field"});
  if (any || !field.empty()) {
    end_field();
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns().size(); ++c)
    out += (c ? "," : "") + quote(t.columns()[c]);
  out += '\n';
  for (const auto& row : t.rows()) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_cell(row[c]);
    out += '\n';
  }
  return out;
}

Table parse_csv(const std::string& text) {
  const auto records = split_records(text);
  if (records.empty()) throw ConfigError({"CSV has no header"});
  std::vector<std::string> header;
  for (const auto& [f, q] : records[0]) header.push_back(f);
  Table t(header);
  for (std::size_t r = 1; r < records.size(); ++r) {
    std::vector<Cell> row;
    for (const auto& [f, q] : records[r]) row.push_back(parse_cell(f, q));
    if (row.size() != header.size())
      throw ConfigError({"CSV record " + std::to_string(r) + " has " +
                         std::to_string(row.size()) + " fields, header has " +
                         std::to_string(header.size())});
    t.add_row(std::move(row));
  }
  return t;
}

std::string to_json(const Table& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows()) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c)
      std::visit([&](const auto& v) { obj[t.columns()[c]] = v; }, row[c]);
    arr.push_back(std::move(obj));
  }
  return arr.dump(2) + "\n";
}

void write_csv(const Table& t, const std::filesystem::path& path) { write_atomic(path, to_csv(t)); }

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace skg

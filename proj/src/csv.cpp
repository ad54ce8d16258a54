#include "matnet/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "matnet/error.hpp"

namespace matnet::csv {
namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IngestError(source, 1, "missing column '" + std::string(name) + "'");
}

bool Table::has_column(std::string_view name) const {
  for (const auto& h : header)
    if (h == name) return true;
  return false;
}

double Table::number(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  if (cell.empty()) throw IngestError(source, lines[row], "empty value in column '" + header[col] + "'");
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE)
    throw IngestError(source, lines[row], "not a number in column '" + header[col] + "': '" + cell + "'");
  return v;
}

long Table::integer(std::size_t row, std::size_t col) const {
  const std::string& cell = rows.at(row).at(col);
  char* end = nullptr;
  errno = 0;
  long v = std::strtol(cell.c_str(), &end, 10);
  if (cell.empty() || end != cell.c_str() + cell.size() || errno == ERANGE)
    throw IngestError(source, lines[row], "not an integer in column '" + header[col] + "': '" + cell + "'");
  return v;
}

const std::string& Table::text(std::size_t row, std::size_t col) const { return rows.at(row).at(col); }

bool Table::missing(std::size_t row, std::size_t col) const { return rows.at(row).at(col).empty(); }

Table parse(std::string_view text, const std::string& source) {
  Table t;
  t.source = source;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++lineno;
    pos = nl + 1;
    if (trim(line).empty()) {
      if (nl == text.size()) break;
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size())
        throw IngestError(source, lineno,
                          "expected " + std::to_string(t.header.size()) + " fields, got " +
                              std::to_string(fields.size()));
      t.rows.push_back(std::move(fields));
      t.lines.push_back(lineno);
    }
    if (nl == text.size()) break;
  }
  if (!have_header) throw IngestError(source, 0, "empty file (no header row)");
  return t;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError(path.string(), 0, "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error("cannot write " + path.string());
  row(header);
}

void Writer::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

}  // namespace matnet::csv

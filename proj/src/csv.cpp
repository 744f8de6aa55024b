#include "schoolchoice/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "schoolchoice/types.hpp"

namespace schoolchoice::csv {

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

int Table::require(std::string_view name, std::string_view file) const {
  int c = column(name);
  if (c < 0)
    throw DataError(std::string(file) + ": schema mismatch, missing column '" +
                    std::string(name) + "'");
  return c;
}

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

namespace {

// One record; fields may be double-quoted with "" as an escaped quote.
std::vector<std::string> parse_record(std::string_view line) {
  if (line.find('"') == std::string_view::npos) return split(line, ',');
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c != '"') out.back() += c;
      else if (i + 1 < line.size() && line[i + 1] == '"') out.back() += '"', ++i;
      else quoted = false;
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace

Table read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  Table t;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      t.header = parse_record(line);
      have_header = true;
      continue;
    }
    auto fields = parse_record(line);
    if (fields.size() != t.header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(lineno);
  }
  if (!have_header) throw DataError(path + ": empty file");
  return t;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view what) {
  if (s == "nan") return std::nan("");
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("invalid number '" + std::string(s) + "' for " + std::string(what));
  return v;
}

long parse_int(std::string_view s, std::string_view what) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError("invalid integer '" + std::string(s) + "' for " + std::string(what));
  return v;
}

Writer::Writer(const std::string& path) : path_(path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw DataError("cannot write " + path);
}

Writer::~Writer() {
  if (f_) std::fclose(f_);
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) std::fputc(',', f_);
    const std::string& v = fields[i];
    if (v.find_first_of(",\"\n") == std::string::npos) {
      std::fputs(v.c_str(), f_);
      continue;
    }
    std::fputc('"', f_);
    for (char c : v) {
      if (c == '"') std::fputc('"', f_);
      std::fputc(c, f_);
    }
    std::fputc('"', f_);
  }
  std::fputc('\n', f_);
}

}  // namespace schoolchoice::csv

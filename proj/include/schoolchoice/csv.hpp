#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

namespace schoolchoice::csv {

// Comma-separated reader/writer. Fields holding commas or quotes are
// double-quoted; records never span lines. Multi-valued fields use ';'.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // 1-based source line of each row

  // Column index or -1.
  int column(std::string_view name) const;
  // Column index; throws DataError naming the file when absent.
  int require(std::string_view name, std::string_view file) const;
};

Table read(const std::string& path);
std::vector<std::string> split(std::string_view line, char sep);

// Shortest representation that round-trips exactly.
std::string format_double(double v);
double parse_double(std::string_view s, std::string_view what);
long parse_int(std::string_view s, std::string_view what);

class Writer {
 public:
  explicit Writer(const std::string& path);
  ~Writer();
  Writer(const Writer&) = delete;
  Writer& operator=(const Writer&) = delete;

  void row(const std::vector<std::string>& fields);

 private:
  std::FILE* f_ = nullptr;
  std::string path_;
};

}  // namespace schoolchoice::csv

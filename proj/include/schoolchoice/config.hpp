#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace schoolchoice {

// Flat key/value configuration read from a TOML subset:
//
//   # comment
//   [section]
//   key = 12            -> "section.key"
//   name = "text"
//   flags = [1, 2, 3]
//
// Values are kept as text and converted on access. Later assignments and
// command-line overrides replace earlier ones.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  // Canonical "key = value" lines in key order (used for run manifests).
  std::string canonical() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::optional<std::string> raw(const std::string& key) const;
  std::map<std::string, std::string> values_;
};

}  // namespace schoolchoice

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace schoolchoice {

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::string& path);

// Provenance record written as manifest.json into every output directory.
struct RunManifest {
  std::string command;
  std::string config_hash;  // sha256 of the canonical effective configuration
  std::uint64_t seed = 0;
  std::map<std::string, std::string> versions;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::pair<std::string, double>> timings;     // phase, seconds

  RunManifest(std::string command, const std::string& canonical_config, std::uint64_t seed);

  // Directories contribute every regular file below them, in path order.
  void add_input(const std::string& path);
  void add_timing(const std::string& phase, double seconds) { timings.emplace_back(phase, seconds); }

  nlohmann::json to_json() const;
  void write(const std::string& dir) const;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::map<std::string, std::string> library_versions();

}  // namespace schoolchoice

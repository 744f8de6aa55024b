#include "schoolchoice/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/evp.h>

#include "schoolchoice/dataset.hpp"
#include "schoolchoice/types.hpp"

namespace fs = std::filesystem;

namespace schoolchoice {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  return sha256_hex(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::map<std::string, std::string> library_versions() {
  std::map<std::string, std::string> v;
  v["schoolchoice"] = SCHOOLCHOICE_VERSION;
  v["data_schema"] = std::to_string(kSchemaVersion);
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
               std::to_string(BOOST_VERSION % 100);
#ifdef _OPENMP
  v["openmp"] = std::to_string(_OPENMP);
#endif
  v["compiler"] = __VERSION__;
  return v;
}

RunManifest::RunManifest(std::string cmd, const std::string& canonical_config, std::uint64_t s)
    : command(std::move(cmd)), config_hash(sha256_hex(canonical_config)), seed(s), versions(library_versions()) {}

void RunManifest::add_input(const std::string& path) {
  if (!fs::is_directory(path)) {
    inputs.emplace_back(path, file_sha256(path));
    return;
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(path))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) inputs.emplace_back(f.string(), file_sha256(f.string()));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["versions"] = versions;
  j["inputs"] = nlohmann::json::array();
  for (const auto& [p, d] : inputs) j["inputs"].push_back({{"path", p}, {"sha256", d}});
  j["timings"] = nlohmann::json::object();
  for (const auto& [phase, s] : timings) j["timings"][phase] = s;
  return j;
}

void RunManifest::write(const std::string& dir) const {
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + dir);
  out << to_json().dump(2) << "\n";
}

}  // namespace schoolchoice

#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "schoolchoice/choice_data.hpp"
#include "schoolchoice/rng.hpp"
#include "schoolchoice/types.hpp"

namespace testing {

using namespace schoolchoice;

inline ProgramOption program(const std::string& id, const std::string& school, int tier,
                             double lat, double lon, int capacity = 10) {
  ProgramOption p;
  p.id = id;
  p.school = school;
  p.tier = tier;
  p.capacity = capacity;
  p.location = {lat, lon};
  p.mcas_share = 0.5;
  p.pct_white_asian = 0.3;
  return p;
}

inline Student student(const std::string& id, double lat, double lon, double lottery = 0.5) {
  Student s;
  s.id = id;
  s.geocode = "g" + id;
  s.home = {lat, lon};
  s.lottery = lottery;
  return s;
}

// 1 mile north is about 1/69.05 degrees of latitude.
inline double miles_to_lat(double miles) { return miles / (kEarthRadiusMiles * M_PI / 180.0); }

// Random flat design: n students, each with 1..max_rows rows of which
// 1..rows are ranked.
inline ChoiceData random_choice_data(Rng& rng, int n_students, int n_fixed, int n_random,
                                     int n_schools, int max_rows, bool full_menu) {
  ChoiceData d;
  d.n_students = n_students;
  d.n_schools = n_schools;
  d.denominator = full_menu ? Denominator::FullMenu : Denominator::Ranked;
  std::uniform_int_distribution<int> rows_dist(1, max_rows);
  std::uniform_int_distribution<int> school_dist(0, n_schools - 1);
  for (int i = 0; i < n_students; ++i) {
    const int rows = rows_dist(rng);
    const int ranked = full_menu ? std::uniform_int_distribution<int>(1, rows)(rng) : rows;
    d.offset.push_back(d.offset.back() + rows);
    d.n_ranked.push_back(ranked);
  }
  d.fixed.resize(d.rows(), n_fixed);
  d.random.resize(d.rows(), n_random);
  for (int r = 0; r < d.rows(); ++r) {
    d.school.push_back(school_dist(rng));
    for (int k = 0; k < n_fixed; ++k) d.fixed(r, k) = standard_normal(rng);
    for (int k = 0; k < n_random; ++k) d.random(r, k) = standard_normal(rng);
  }
  return d;
}

// Plain, unstabilized evaluation of the ranked-logit formula.
inline double naive_student_loglik(const std::vector<double>& v, int m) {
  double ll = 0.0;
  for (int c = 0; c < m; ++c) {
    double s = 0.0;
    for (std::size_t d = static_cast<std::size_t>(c); d < v.size(); ++d) s += std::exp(v[d]);
    ll += v[static_cast<std::size_t>(c)] - std::log(s);
  }
  return ll;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("schoolchoice_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace testing


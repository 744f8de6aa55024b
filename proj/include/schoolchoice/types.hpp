#pragma once

#include <array>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace schoolchoice {

// Error hierarchy. The CLI maps each family onto an exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyMenuError : DataError {
  using DataError::DataError;
};
struct SeparationError : NumericalError {
  using NumericalError::NumericalError;
};
struct ConvergenceError : NumericalError {
  using NumericalError::NumericalError;
};

using StudentId = std::string;
using ProgramId = std::string;
using SchoolId = std::string;
using GeocodeId = std::string;

enum class Grade { K0 = 0, K1 = 1, K2 = 2 };
enum class Race { Black, Hispanic, White, Asian, Other, Unknown };

inline constexpr int kNumNeighborhoods = 14;
inline constexpr int kMaxRankedChoices = 10;
inline constexpr int kNumTiers = 4;

std::string_view to_string(Grade g);
std::string_view to_string(Race r);
Grade parse_grade(std::string_view s);
Race parse_race(std::string_view s);
std::string_view neighborhood_name(int id);

struct LatLon {
  double lat = 0.0;
  double lon = 0.0;
  friend bool operator==(const LatLon&, const LatLon&) = default;
};

struct Student {
  StudentId id;
  Grade grade = Grade::K2;
  int neighborhood = 0;
  GeocodeId geocode;
  LatLon home;
  Race race = Race::Unknown;
  double income = 0.0;  // units of $100,000
  bool is_ell = false;
  std::string ell_language;  // empty when not ELL or unknown
  std::optional<ProgramId> continuing_program;
  std::set<SchoolId> sibling_schools;
  double lottery = 0.5;  // lower is better

  bool is_black_or_hispanic() const {
    return race == Race::Black || race == Race::Hispanic;
  }
  bool is_continuing() const { return continuing_program.has_value(); }

  friend bool operator==(const Student&, const Student&) = default;
};

struct ProgramOption {
  ProgramId id;
  SchoolId school;
  int tier = kNumTiers;  // 1 best; 4 and untiered are equally worst
  int capacity = 0;
  bool is_ell_program = false;
  std::string ell_language;
  double mcas_share = 0.0;
  double pct_white_asian = 0.0;
  LatLon location;

  friend bool operator==(const ProgramOption&, const ProgramOption&) = default;
};

// Lower level is better: 0 continuing, 1 sibling, 2 everyone else.
struct Priority {
  int level = 2;
  double lottery = 0.5;

  friend bool operator<(const Priority& a, const Priority& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.lottery < b.lottery;
  }
  friend bool operator==(const Priority&, const Priority&) = default;
};

Priority priority_of(const Student& s, const ProgramOption& p);

// Validates Student/ProgramOption field invariants; throws DataError.
void validate(const Student& s);
void validate(const ProgramOption& p);

}  // namespace schoolchoice

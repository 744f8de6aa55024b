#pragma once

#include <optional>
#include <string>
#include <vector>

#include "schoolchoice/geo.hpp"
#include "schoolchoice/menu.hpp"
#include "schoolchoice/program_table.hpp"

namespace schoolchoice {

inline constexpr int kSchemaVersion = 1;

// One application year: applicants, the program table, observed rankings
// (program indices, best first, at most ten) and, when known, the Round 1
// assignment of every student.
struct Dataset {
  std::string year;
  std::vector<Student> students;
  ProgramTable programs;
  std::vector<std::vector<int>> rankings;
  std::vector<std::optional<int>> assignments;  // empty when no assignment file
  DistanceModel distance;
  std::vector<std::string> warnings;

  std::size_t size() const { return students.size(); }
  bool has_assignments() const { return !assignments.empty(); }
  int find_student(const StudentId& id) const;  // -1 when absent
};

bool same_content(const Dataset& a, const Dataset& b);

struct LoadOptions {
  int schema_version = kSchemaVersion;
  bool haversine_fallback = true;
  // When set, every ranked program must lie in the student's menu.
  const MenuPolicy* menu_policy = nullptr;
};

// Reads students.csv, programs.csv, rankings.csv and the optional
// assignments.csv / distances.csv / meta.json from `dir`. All violations are
// collected and reported together in one DataError.
Dataset load_dataset(const std::string& dir, const LoadOptions& options = {});
void save_dataset(const Dataset& d, const std::string& dir);

// capacity[j] = number of students assigned to program j; unassigned ignored.
std::vector<int> infer_capacities(const ProgramTable& programs,
                                  const std::vector<std::optional<int>>& assignments);

// Capacities inferred from the students of one grade.
std::vector<int> infer_capacities(const Dataset& d, Grade grade);

// Validates Dataset invariants (m_i in 1..10, rankings reference known
// programs without duplicates, continuing programs exist).
void validate(const Dataset& d, const MenuPolicy* menu_policy = nullptr);

// Years found as sub-directories of a history directory, ascending.
std::vector<std::string> list_years(const std::string& history_dir);

}  // namespace schoolchoice

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "schoolchoice/geo.hpp"
#include "schoolchoice/menu.hpp"
#include "schoolchoice/program_table.hpp"

namespace schoolchoice {

using PriorityRule = std::function<Priority(const Student&, const ProgramOption&)>;

// Continuing, then sibling, then everyone else; lottery breaks ties.
PriorityRule standard_priority();

// Adds a walk-zone level between sibling and everyone else:
// 0 continuing, 1 sibling, 2 within `radius` miles, 3 everyone else.
PriorityRule walk_zone_priority(const DistanceModel& distance, double radius = kWalkZoneMiles);

// One market: submitted rankings (program indices, best first) with the
// program-side priority of each student at each ranked program.
struct Market {
  std::vector<int> capacity;                     // per program
  std::vector<std::vector<int>> rankings;        // per student
  std::vector<std::vector<Priority>> priority;   // parallel to rankings

  std::size_t n_students() const { return rankings.size(); }
  std::size_t n_programs() const { return capacity.size(); }
};

Market make_market(const std::vector<Student>& students,
                   const std::vector<std::vector<int>>& rankings, const ProgramTable& programs,
                   const std::vector<int>& capacity, const PriorityRule& rule = standard_priority());

struct Matching {
  std::vector<int> student_program;        // -1 when unassigned
  std::vector<int> round_admitted;         // 1-based; 0 when unassigned
  std::vector<std::vector<int>> admitted;  // per program, best priority first
  // Worst admitted priority at programs filled to capacity.
  std::vector<std::optional<Priority>> cutoff;
  int rounds = 0;

  bool is_full(std::size_t program, const Market& m) const {
    return static_cast<int>(admitted[program].size()) >= m.capacity[program];
  }
};

// Student-proposing deferred acceptance in rounds. Throws DataError when two
// applicants at one program share a priority level and a lottery number.
Matching deferred_acceptance(const Market& market);

// Worst lottery number with which `student` would still be admitted to some
// Tier 1 or 2 program of their menu, holding everyone else fixed: 1 for an
// undersubscribed program, otherwise the cutoff lottery at the student's
// priority level. 0 without a Tier 1/2 option.
double access_to_quality(const Matching& matching, const Market& market,
                         const ProgramTable& programs, const Student& student,
                         const ChoiceMenu& menu, const PriorityRule& rule = standard_priority());

// (student, program) pairs where the student ranks the program above its
// outcome and the program has a free seat or admits someone of worse priority.
std::vector<std::pair<int, int>> blocking_pairs(const Market& market, const Matching& matching);

void write_matching_csv(const std::string& path, const std::vector<Student>& students,
                        const ProgramTable& programs, const Matching& matching);

}  // namespace schoolchoice

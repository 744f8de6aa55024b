#pragma once

#include <vector>

#include "schoolchoice/geo.hpp"
#include "schoolchoice/menu.hpp"
#include "schoolchoice/program_table.hpp"

namespace schoolchoice {

// Rule-based ranking. Criteria, most important first:
//   1 present program            (continuing students)
//   2 other program, same school (continuing students)
//   3 sibling school
//   4 ELL program                (ELL students)
//   5 ELL program, home language (ELL students)
//   6 better (smaller) tier
//   7 shorter distance
// Remaining exact ties go to the smaller program id.
std::vector<int> rank_naive(const Student& student, const ChoiceMenu& menu,
                            const ProgramTable& programs, const DistanceModel& distance);

}  // namespace schoolchoice

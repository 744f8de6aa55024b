#pragma once

#include <map>
#include <vector>

#include "schoolchoice/types.hpp"

namespace schoolchoice {

// Immutable index over the program list. Schools are numbered in sorted
// id order; the last school is the one whose fixed effect is normalized to 0.
class ProgramTable {
 public:
  ProgramTable() = default;
  explicit ProgramTable(std::vector<ProgramOption> programs);

  const std::vector<ProgramOption>& programs() const { return programs_; }
  std::size_t size() const { return programs_.size(); }
  const ProgramOption& operator[](std::size_t i) const { return programs_[i]; }

  // Index of a program id, or -1.
  int find(const ProgramId& id) const;
  int index_of(const ProgramId& id) const;  // throws DataError when absent
  const ProgramOption& at(const ProgramId& id) const { return programs_[index_of(id)]; }

  const std::vector<SchoolId>& schools() const { return schools_; }
  std::size_t num_schools() const { return schools_.size(); }
  int school_index(const SchoolId& id) const;  // -1 when absent
  int school_index_of_program(std::size_t program) const { return program_school_[program]; }
  const std::vector<int>& programs_of_school(std::size_t school) const {
    return school_programs_[school];
  }
  int school_tier(std::size_t school) const { return school_tier_[school]; }

 private:
  std::vector<ProgramOption> programs_;
  std::map<ProgramId, int> index_;
  std::vector<SchoolId> schools_;
  std::map<SchoolId, int> school_index_;
  std::vector<int> program_school_;
  std::vector<std::vector<int>> school_programs_;
  std::vector<int> school_tier_;
};

}  // namespace schoolchoice

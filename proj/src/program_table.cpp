#include "schoolchoice/program_table.hpp"

#include <algorithm>

namespace schoolchoice {

ProgramTable::ProgramTable(std::vector<ProgramOption> programs) : programs_(std::move(programs)) {
  for (std::size_t i = 0; i < programs_.size(); ++i) {
    validate(programs_[i]);
    if (!index_.emplace(programs_[i].id, static_cast<int>(i)).second)
      throw DataError("duplicate program id " + programs_[i].id);
    schools_.push_back(programs_[i].school);
  }
  std::sort(schools_.begin(), schools_.end());
  schools_.erase(std::unique(schools_.begin(), schools_.end()), schools_.end());
  for (std::size_t s = 0; s < schools_.size(); ++s) school_index_[schools_[s]] = static_cast<int>(s);

  program_school_.resize(programs_.size());
  school_programs_.assign(schools_.size(), {});
  school_tier_.assign(schools_.size(), kNumTiers);
  for (std::size_t i = 0; i < programs_.size(); ++i) {
    const int s = school_index_.at(programs_[i].school);
    program_school_[i] = s;
    school_programs_[s].push_back(static_cast<int>(i));
    school_tier_[s] = std::min(school_tier_[s], programs_[i].tier);
  }
}

int ProgramTable::find(const ProgramId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

int ProgramTable::index_of(const ProgramId& id) const {
  int i = find(id);
  if (i < 0) throw DataError("unknown program id " + id);
  return i;
}

int ProgramTable::school_index(const SchoolId& id) const {
  auto it = school_index_.find(id);
  return it == school_index_.end() ? -1 : it->second;
}

}  // namespace schoolchoice

#include "schoolchoice/naive.hpp"

#include <algorithm>
#include <tuple>

namespace schoolchoice {

namespace {

struct NaiveKey {
  int present;   // 0 = criterion satisfied
  int same_school;
  int sibling;
  int ell;
  int ell_language;
  int tier;
  double miles;
  const ProgramId* id;

  auto tie() const {
    return std::tie(present, same_school, sibling, ell, ell_language, tier, miles, *id);
  }
};

}  // namespace

std::vector<int> rank_naive(const Student& student, const ChoiceMenu& menu,
                            const ProgramTable& programs, const DistanceModel& distance) {
  std::optional<SchoolId> current_school;
  if (student.continuing_program) current_school = programs.at(*student.continuing_program).school;

  std::vector<std::pair<NaiveKey, int>> keyed;
  keyed.reserve(menu.options.size());
  for (int j : menu.options) {
    const auto& p = programs[j];
    NaiveKey k{};
    k.present = student.continuing_program && *student.continuing_program == p.id ? 0 : 1;
    k.same_school = current_school && *current_school == p.school ? 0 : 1;
    k.sibling = student.sibling_schools.count(p.school) ? 0 : 1;
    k.ell = student.is_ell && p.is_ell_program ? 0 : 1;
    k.ell_language = student.is_ell && p.is_ell_program && !p.ell_language.empty() &&
                             p.ell_language == student.ell_language
                         ? 0
                         : 1;
    k.tier = std::clamp(p.tier, 1, kNumTiers);
    k.miles = distance(student, p);
    k.id = &p.id;
    keyed.emplace_back(k, j);
  }
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first.tie() < b.first.tie(); });
  std::vector<int> out;
  out.reserve(keyed.size());
  for (const auto& [k, j] : keyed) out.push_back(j);
  return out;
}

}  // namespace schoolchoice

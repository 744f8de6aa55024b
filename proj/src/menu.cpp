#include "schoolchoice/menu.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace schoolchoice {

MenuPolicyKind parse_menu_policy(std::string_view id) {
  if (id == "home_based") return MenuPolicyKind::HomeBased;
  if (id == "three_zone") return MenuPolicyKind::ThreeZone;
  if (id == "custom") return MenuPolicyKind::Custom;
  throw UsageError("unknown menu policy '" + std::string(id) +
                   "' (expected home_based, three_zone or custom)");
}

std::string_view to_string(MenuPolicyKind k) {
  switch (k) {
    case MenuPolicyKind::HomeBased: return "home_based";
    case MenuPolicyKind::ThreeZone: return "three_zone";
    case MenuPolicyKind::Custom: return "custom";
  }
  return "?";
}

bool ChoiceMenu::contains(int program) const {
  return std::binary_search(options.begin(), options.end(), program);
}

namespace {

// Distance from a student to each school, measured to the school's first program.
std::vector<double> school_distances(const Student& s, const ProgramTable& programs,
                                     const DistanceModel& distance) {
  std::vector<double> d(programs.num_schools());
  for (std::size_t k = 0; k < d.size(); ++k)
    d[k] = distance(s, programs[programs.programs_of_school(k).front()]);
  return d;
}

// The k closest schools among `eligible`, ties broken by school id.
void add_closest(std::vector<int> eligible, const std::vector<double>& dist, int k,
                 const ProgramTable& programs, std::set<int>& out) {
  std::sort(eligible.begin(), eligible.end(), [&](int a, int b) {
    return std::tie(dist[a], programs.schools()[a]) < std::tie(dist[b], programs.schools()[b]);
  });
  for (int i = 0; i < k && i < static_cast<int>(eligible.size()); ++i) out.insert(eligible[i]);
}

}  // namespace

ChoiceMenu build_menu(const Student& student, const ProgramTable& programs,
                      const MenuPolicy& policy, const DistanceModel& distance) {
  const auto dist = school_distances(student, programs, distance);
  const int n_schools = static_cast<int>(programs.num_schools());
  std::set<int> schools;
  std::set<int> extra_programs;

  switch (policy.kind) {
    case MenuPolicyKind::HomeBased: {
      for (int k = 0; k < n_schools; ++k)
        if (dist[k] <= policy.walk_radius_miles) schools.insert(k);
      for (auto [max_tier, count] : policy.closest_by_tier) {
        std::vector<int> eligible;
        for (int k = 0; k < n_schools; ++k)
          if (programs.school_tier(k) <= max_tier) eligible.push_back(k);
        add_closest(std::move(eligible), dist, count, programs, schools);
      }
      std::vector<int> option;
      for (const auto& sid : policy.option_schools) {
        int k = programs.school_index(sid);
        if (k >= 0) option.push_back(k);
      }
      add_closest(std::move(option), dist, policy.closest_option_schools, programs, schools);
      break;
    }
    case MenuPolicyKind::ThreeZone: {
      auto zit = policy.neighborhood_zone.find(student.neighborhood);
      for (int k = 0; k < n_schools; ++k) {
        const auto& sid = programs.schools()[k];
        auto sz = policy.school_zone.find(sid);
        const bool same_zone = zit != policy.neighborhood_zone.end() &&
                               sz != policy.school_zone.end() && sz->second == zit->second;
        if (same_zone || dist[k] <= policy.walk_radius_miles ||
            policy.citywide_schools.count(sid) != 0)
          schools.insert(k);
      }
      break;
    }
    case MenuPolicyKind::Custom: {
      auto it = policy.custom_menus.find(student.id);
      if (it != policy.custom_menus.end())
        for (const auto& pid : it->second) extra_programs.insert(programs.index_of(pid));
      break;
    }
  }

  for (const auto& sib : student.sibling_schools) {
    int k = programs.school_index(sib);
    if (k >= 0) schools.insert(k);
  }
  if (student.continuing_program) {
    const int p = programs.index_of(*student.continuing_program);
    schools.insert(programs.school_index_of_program(p));
  }

  ChoiceMenu menu{student.id, {}};
  for (int k : schools)
    for (int p : programs.programs_of_school(k)) extra_programs.insert(p);
  menu.options.assign(extra_programs.begin(), extra_programs.end());
  if (menu.options.empty())
    throw EmptyMenuError("student " + student.id + " has an empty choice menu under policy " +
                         std::string(to_string(policy.kind)));
  return menu;
}

std::vector<ChoiceMenu> build_menus(const std::vector<Student>& students,
                                    const ProgramTable& programs, const MenuPolicy& policy,
                                    const DistanceModel& distance) {
  std::vector<ChoiceMenu> menus;
  menus.reserve(students.size());
  for (const auto& s : students) menus.push_back(build_menu(s, programs, policy, distance));
  return menus;
}

}  // namespace schoolchoice

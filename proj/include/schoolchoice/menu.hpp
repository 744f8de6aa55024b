#pragma once

#include <map>
#include <set>
#include <string_view>
#include <vector>

#include "schoolchoice/geo.hpp"
#include "schoolchoice/program_table.hpp"

namespace schoolchoice {

enum class MenuPolicyKind { HomeBased, ThreeZone, Custom };

MenuPolicyKind parse_menu_policy(std::string_view id);  // throws UsageError
std::string_view to_string(MenuPolicyKind k);

struct MenuPolicy {
  MenuPolicyKind kind = MenuPolicyKind::HomeBased;

  // Home-Based closest-k rules by maximum tier: {tier <= 1: 2, <= 2: 4, <= 3: 6}.
  std::vector<std::pair<int, int>> closest_by_tier = {{1, 2}, {2, 4}, {3, 6}};
  double walk_radius_miles = kWalkZoneMiles;
  std::vector<SchoolId> option_schools;
  int closest_option_schools = 3;

  // Legacy three-zone menu.
  std::map<int, int> neighborhood_zone;
  std::map<SchoolId, int> school_zone;
  std::set<SchoolId> citywide_schools;

  // Custom hook: explicit per-student program lists.
  std::map<StudentId, std::vector<ProgramId>> custom_menus;
};

struct ChoiceMenu {
  StudentId student_id;
  std::vector<int> options;  // program indices, ascending

  bool contains(int program) const;
};

// Throws EmptyMenuError when no program is reachable.
ChoiceMenu build_menu(const Student& student, const ProgramTable& programs,
                      const MenuPolicy& policy, const DistanceModel& distance);

std::vector<ChoiceMenu> build_menus(const std::vector<Student>& students,
                                    const ProgramTable& programs, const MenuPolicy& policy,
                                    const DistanceModel& distance);

}  // namespace schoolchoice

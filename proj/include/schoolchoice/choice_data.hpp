#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "schoolchoice/features.hpp"
#include "schoolchoice/geo.hpp"
#include "schoolchoice/menu.hpp"
#include "schoolchoice/program_table.hpp"

namespace schoolchoice {

// Which options enter the denominator of each ranking stage: the student's
// remaining ranked options only, or every menu option not yet ranked.
enum class Denominator { Ranked, FullMenu };

Denominator parse_denominator(std::string_view s);  // throws UsageError
std::string_view to_string(Denominator d);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Flattened design for the ranking likelihood. Student i owns rows
// [offset[i], offset[i+1]); the first n_ranked[i] of them are the ranked
// programs best first, the rest are unranked menu options (FullMenu only).
struct ChoiceData {
  int n_students = 0;
  int n_schools = 0;
  Denominator denominator = Denominator::Ranked;
  std::vector<int> offset{0};
  std::vector<int> n_ranked;
  std::vector<int> school;
  RowMatrix fixed;   // rows x |F|
  RowMatrix random;  // rows x |G|

  int rows() const { return offset.back(); }
  int n_fixed() const { return static_cast<int>(fixed.cols()); }
  int n_random() const { return static_cast<int>(random.cols()); }
  int n_choices() const;
};

// `menus` is required for FullMenu and ignored otherwise; ranked programs
// missing from a menu are still treated as available.
ChoiceData build_choice_data(const std::vector<Student>& students,
                             const std::vector<std::vector<int>>& rankings,
                             const ProgramTable& programs, const DistanceModel& distance,
                             const FeatureSpec& spec, Denominator denominator,
                             const std::vector<ChoiceMenu>* menus = nullptr);

// Throws NumericalError naming the first non-finite feature value.
void check_finite(const ChoiceData& data);

}  // namespace schoolchoice

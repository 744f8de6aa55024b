#include "schoolchoice/choice_data.hpp"

#include <algorithm>
#include <cmath>

namespace schoolchoice {

Denominator parse_denominator(std::string_view s) {
  if (s == "ranked") return Denominator::Ranked;
  if (s == "full_menu") return Denominator::FullMenu;
  throw UsageError("unknown likelihood denominator '" + std::string(s) +
                   "' (expected ranked or full_menu)");
}

std::string_view to_string(Denominator d) {
  return d == Denominator::Ranked ? "ranked" : "full_menu";
}

int ChoiceData::n_choices() const {
  int n = 0;
  for (int m : n_ranked) n += m;
  return n;
}

ChoiceData build_choice_data(const std::vector<Student>& students,
                             const std::vector<std::vector<int>>& rankings,
                             const ProgramTable& programs, const DistanceModel& distance,
                             const FeatureSpec& spec, Denominator denominator,
                             const std::vector<ChoiceMenu>* menus) {
  if (rankings.size() != students.size()) throw DataError("rankings/students size mismatch");
  if (denominator == Denominator::FullMenu && (!menus || menus->size() != students.size()))
    throw DataError("full_menu likelihood requires a menu for every student");

  ChoiceData d;
  d.n_students = static_cast<int>(students.size());
  d.n_schools = static_cast<int>(programs.num_schools());
  d.denominator = denominator;

  std::vector<std::vector<int>> rows(students.size());
  for (std::size_t i = 0; i < students.size(); ++i) {
    rows[i] = rankings[i];
    if (denominator == Denominator::FullMenu)
      for (int p : (*menus)[i].options)
        if (std::find(rankings[i].begin(), rankings[i].end(), p) == rankings[i].end())
          rows[i].push_back(p);
    d.offset.push_back(d.offset.back() + static_cast<int>(rows[i].size()));
    d.n_ranked.push_back(static_cast<int>(rankings[i].size()));
  }

  const int n_rows = d.rows();
  d.fixed.resize(n_rows, static_cast<Eigen::Index>(spec.fixed.size()));
  d.random.resize(n_rows, static_cast<Eigen::Index>(spec.random.size()));
  d.school.resize(static_cast<std::size_t>(n_rows));
  int r = 0;
  for (std::size_t i = 0; i < students.size(); ++i) {
    for (int p : rows[i]) {
      const auto& prog = programs[static_cast<std::size_t>(p)];
      const double miles = distance(students[i], prog);
      for (std::size_t k = 0; k < spec.fixed.size(); ++k)
        d.fixed(r, static_cast<Eigen::Index>(k)) = feature_value(spec.fixed[k], students[i], prog, miles);
      for (std::size_t k = 0; k < spec.random.size(); ++k)
        d.random(r, static_cast<Eigen::Index>(k)) =
            feature_value(spec.random[k], students[i], prog, miles);
      d.school[static_cast<std::size_t>(r)] = programs.school_index_of_program(static_cast<std::size_t>(p));
      ++r;
    }
  }
  return d;
}

void check_finite(const ChoiceData& data) {
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index k = 0; k < data.fixed.cols(); ++k)
      if (!std::isfinite(data.fixed(r, k)))
        throw NumericalError("non-finite fixed feature at row " + std::to_string(r));
    for (Eigen::Index k = 0; k < data.random.cols(); ++k)
      if (!std::isfinite(data.random(r, k)))
        throw NumericalError("non-finite random feature at row " + std::to_string(r));
  }
}

}  // namespace schoolchoice

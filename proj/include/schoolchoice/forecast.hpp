#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "schoolchoice/dataset.hpp"
#include "schoolchoice/rng.hpp"

namespace schoolchoice {

// Ordinary least squares of value on year.
struct TrendFit {
  std::vector<double> years;
  std::vector<double> values;
  double slope = 0.0;
  double intercept = 0.0;
  double prediction = 0.0;      // at the target year
  double standard_error = 0.0;  // residual standard error, n - 2 degrees of freedom
  double slope_p_value = 1.0;   // two-sided t-test
};

// Throws DataError with fewer than 3 points or non-increasing years.
TrendFit fit_trend(const std::vector<double>& years, const std::vector<double>& values, double target_year);

struct NormalCell {
  double mean = 0.0;
  double sd = 0.0;
  std::string method;  // "trend", "mean"
  int n_points = 0;
};

// Trend prediction when the slope is significant at `level`, else the
// sample mean and SD.
NormalCell fit_trend_or_mean(const std::vector<double>& years, const std::vector<double>& values,
                             double target_year, double level = 0.05);

using Cell = std::pair<Grade, int>;  // (K1 or K2, neighborhood)

struct ParticipationModel {
  int target_year = 0;
  NormalCell total_new;
  std::map<Cell, NormalCell> proportion;
  std::map<Cell, NormalCell> continuing_ratio;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const ParticipationModel& m);
ParticipationModel participation_from_json(const nlohmann::json& j);

// Years are the datasets' year labels (integers). New-applicant totals and
// proportions use every year; continuing ratios compare consecutive years,
// with students assigned in Round 1 standing in for enrollment.
ParticipationModel fit_participation(const std::vector<Dataset>& history, int target_year);

// Previous-year records the pool is drawn from.
struct ApplicantBase {
  std::map<Cell, std::vector<Student>> new_applicants;
  std::map<Cell, std::vector<Student>> potential_continuing;  // promoted, continuing program set
};

ApplicantBase make_applicant_base(const Dataset& previous_year);

struct PoolDraw {
  std::vector<Student> students;
  double total = 0.0;
  std::map<Cell, int> new_counts;
  std::map<Cell, double> ratios;
  std::vector<std::string> warnings;
};

PoolDraw draw_applicant_pool(const ParticipationModel& model, const ApplicantBase& base, Rng& rng);

}  // namespace schoolchoice

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "schoolchoice/dataset.hpp"
#include "schoolchoice/features.hpp"
#include "schoolchoice/logit.hpp"
#include "schoolchoice/mixed_logit.hpp"

namespace schoolchoice {

struct SyntheticConfig {
  std::string year = "2013";
  std::array<int, 3> students_per_grade{100, 300, 1000};  // K0, K1, K2
  int n_schools = 12;
  int programs_per_school = 2;

  // True demand: `mixed` when set, else `logit`, else defaults for `spec`.
  std::string spec = "reduced";
  std::optional<LogitParams> logit;
  std::optional<MixedLogitParams> mixed;

  MenuPolicy policy;
  std::uint64_t geography_seed = 1;
  std::uint64_t seed = 1;

  double capacity_ratio = 0.9;  // seats per applicant, per grade
  double city_miles = 6.0;
  double school_spread = 1.0;   // schools spread over this fraction of the city
  double ell_share = 0.15;
  double sibling_share = 0.2;
  double mean_choices = 5.0;    // mean submitted list length before truncation; 0 ranks the whole menu
  bool assign = true;           // run DA on each grade and store the assignments

  void validate() const;  // throws UsageError
};

// Fixed pieces of a synthetic city: programs, neighborhoods, true demand.
struct SyntheticWorld {
  ProgramTable programs;
  std::array<LatLon, kNumNeighborhoods> centers{};
  std::array<double, kNumNeighborhoods> weight{};        // share of applicants
  std::array<double, kNumNeighborhoods> minority_share{};
  std::array<double, kNumNeighborhoods> income_mean{};
  double scatter_miles = 0.4;                            // home spread around a center
  std::vector<double> seat_weight;                       // per program
  FeatureSpec spec;
  LogitParams logit;
  std::optional<MixedLogitParams> mixed;
};

SyntheticWorld make_world(const SyntheticConfig& config);

// Default true coefficients for a specification (alpha drawn by make_world).
Eigen::VectorXd default_beta(const FeatureSpec& spec);
MixedLogitParams default_mixed(const FeatureSpec& spec, int n_schools);

// Seats of program j for a grade with `applicants` applicants.
int grade_capacity(const SyntheticWorld& world, std::size_t program, int applicants, double ratio);

// One application year: fresh applicants of every grade, rankings from the
// true model over Home-Based menus, lotteries and (optionally) DA results.
Dataset generate_synthetic(const SyntheticConfig& config);

struct HistoryConfig {
  int first_year = 2010;
  int n_years = 4;
  double growth = 0.03;        // yearly growth of new applicants
  double count_noise = 0.02;   // relative SD of yearly new-applicant counts
  std::array<double, 3> continue_rate{0.0, 0.6, 0.85};  // by grade applied to
};

// Consecutive years in which students assigned at grade g-1 reapply at
// grade g as continuing students. Requires config.assign.
std::vector<Dataset> generate_history(const SyntheticConfig& config, const HistoryConfig& history);

// Rankings for `students` drawn from the world's true demand model.
std::vector<std::vector<int>> draw_true_rankings(const SyntheticWorld& world, const SyntheticConfig& config,
                                                 const std::vector<Student>& students,
                                                 const DistanceModel& distance, Rng& rng);

}  // namespace schoolchoice

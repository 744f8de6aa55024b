#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schoolchoice/forecast.hpp"
#include "schoolchoice/logit.hpp"
#include "schoolchoice/matching.hpp"
#include "schoolchoice/mixed_logit.hpp"

namespace schoolchoice {

enum class DemandKind { Naive, Logit, Mixed };

DemandKind parse_demand_kind(std::string_view id);  // throws UsageError
std::string_view to_string(DemandKind k);

struct DemandModel {
  DemandKind kind = DemandKind::Naive;
  FeatureSpec spec;
  std::optional<LogitFit> logit;
  std::vector<PosteriorSample> posterior;
};

// Per-neighborhood outcome of one market for one grade. Access and distance
// are NaN for neighborhoods without students (assigned students, for distance).
struct GradeOutcome {
  std::vector<double> unassigned;
  std::vector<double> access;
  std::vector<double> distance;
  // shares[k-1][neighborhood][school]; empty when the neighborhood cast no votes.
  std::vector<std::vector<std::vector<double>>> shares;
  int n_students = 0;
  int n_assigned = 0;
};

struct SimulationOutcome {
  std::map<Grade, GradeOutcome> grades;
};

// Per-school share of a neighborhood's top-k votes; a student ranking two
// programs of one school in the top k votes twice for it.
std::vector<std::vector<double>> market_shares(const std::vector<Student>& students,
                                               const std::vector<std::vector<int>>& rankings,
                                               const ProgramTable& programs, int k);

// Runs DA on one grade's market and extracts every metric.
GradeOutcome evaluate_market(const std::vector<Student>& students,
                             const std::vector<std::vector<int>>& rankings,
                             const ProgramTable& programs, const DistanceModel& distance,
                             const MenuPolicy& policy, const std::vector<int>& capacity,
                             const PriorityRule& rule, Matching* matching = nullptr);

struct SimulationConfig {
  int n_simulations = 400;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> lottery_seed;  // replaces `seed` for layer 4 only
  std::vector<Grade> grades{Grade::K1, Grade::K2};
  MenuPolicy policy;
  bool walk_zone_priority = false;
  int threads = 0;  // 0: OpenMP default

  void validate() const;
};

struct SimulationInputs {
  const DemandModel* demand = nullptr;
  const ParticipationModel* participation = nullptr;
  const ApplicantBase* base = nullptr;
  const ProgramTable* programs = nullptr;
  const DistanceModel* distance = nullptr;
  std::map<Grade, std::vector<int>> capacity;
};

// One simulated market: pool, coefficients, preferences, lotteries.
struct SimulatedMarket {
  std::vector<Student> students;
  std::vector<std::vector<int>> rankings;
  std::vector<std::string> warnings;
};

SimulatedMarket simulate_market(const SimulationConfig& config, const SimulationInputs& inputs,
                                std::uint64_t index);

SimulationOutcome evaluate_simulated(const SimulationConfig& config, const SimulationInputs& inputs,
                                     const SimulatedMarket& market);

// Metrics of an observed year: DA rerun on its rankings and lotteries with
// the simulation's capacity tables and priority rule.
SimulationOutcome evaluate_observed(const SimulationConfig& config, const SimulationInputs& inputs,
                                    const Dataset& observed);

// Simulations 0..n-1 in parallel; errors carry the simulation index.
std::vector<SimulationOutcome> run_simulation(const SimulationConfig& config, const SimulationInputs& inputs);

double tv_distance(const std::vector<double>& p, const std::vector<double>& q);
double rmse(const std::vector<double>& errors);

enum class Reference { LeaveOneOut, Self };
Reference parse_reference(std::string_view id);

struct TailResult {
  double expected_rmse = 0.0;
  double actual_rmse = 0.0;
  double p_value = 1.0;
  std::vector<double> simulated_rmse;
};

// sims[s][n]: scalar metric per neighborhood; NaN entries are skipped.
TailResult pvalue_from_tail(const std::vector<std::vector<double>>& sims,
                            const std::vector<double>* actual, Reference reference = Reference::LeaveOneOut);

// sims[s][n][school]: share vectors; per-neighborhood error is the TV distance.
TailResult pvalue_from_tail_shares(const std::vector<std::vector<std::vector<double>>>& sims,
                                   const std::vector<std::vector<double>>* actual,
                                   Reference reference = Reference::LeaveOneOut);

// Percentile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

struct MetricReport {
  Grade grade = Grade::K2;
  std::string metric;  // unassigned, access, distance, top1, top2, top3
  // Rows: neighborhood (scalar metrics) or (neighborhood, school) pairs.
  std::vector<int> neighborhood;
  std::vector<int> school;  // -1 for scalar metrics
  std::vector<double> mean, lower, upper, actual;
  TailResult tail;
  bool has_actual = false;
};

std::vector<MetricReport> build_report(const std::vector<SimulationOutcome>& outcomes,
                                       const SimulationOutcome* actual, Reference reference);

// <grade>_<metric>.csv tables, <grade>_<metric>_tail.csv curves and summary.csv.
void write_report(const std::string& dir, const std::vector<MetricReport>& report, const ProgramTable& programs);

}  // namespace schoolchoice

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "schoolchoice/simulation.hpp"

// End-to-end steps shared by the command-line tool and the test harnesses.
namespace schoolchoice {

struct MixedFit {
  FeatureSpec spec;
  MixedLogitLayout layout;
  ParameterNames names;
  ChainResult chain;
  PosteriorSummary summary;
};

MixedFit fit_mixed(const Dataset& dataset, const FeatureSpec& spec, Denominator denominator,
                   const MenuPolicy* policy, const ChainConfig& config);

// Demand files. Logit: the fit JSON. Mixed: a summary JSON next to
// <stem>.samples.csv and <stem>.events.csv. Naive: {"model": "naive"}.
void save_logit_demand(const std::string& path, const LogitFit& fit);
void save_mixed_demand(const std::string& path, const MixedFit& fit);
void save_naive_demand(const std::string& path);
DemandModel load_demand(const std::string& path);

// Every year sub-directory of `dir`, oldest first.
std::vector<Dataset> load_history(const std::string& dir);
void save_history(const std::vector<Dataset>& years, const std::string& dir);

struct ForecastOptions {
  SimulationConfig simulation;
  Reference reference = Reference::LeaveOneOut;
  // Per-grade seats; grades left out are inferred from the base year.
  std::map<Grade, std::vector<int>> capacity;
  int capacity_add = 0;  // added to every program's seats
};

struct ForecastResult {
  ParticipationModel participation;
  std::map<Grade, std::vector<int>> capacity;
  std::vector<SimulationOutcome> outcomes;
  std::optional<SimulationOutcome> actual;
  std::vector<MetricReport> report;
};

// Simulates `target_year` from the years before it; the most recent is the
// base year. `participation` replaces the model fitted from the history.
// When `actual` is set its outcome is computed and p-values are reported.
ForecastResult run_forecast(const std::vector<Dataset>& history, int target_year, const DemandModel& demand,
                            const ForecastOptions& options, const Dataset* actual = nullptr,
                            const ParticipationModel* participation = nullptr);

}  // namespace schoolchoice

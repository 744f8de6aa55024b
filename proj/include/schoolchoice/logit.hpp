#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "schoolchoice/choice_data.hpp"
#include "schoolchoice/dataset.hpp"
#include "schoolchoice/rng.hpp"

namespace schoolchoice {

struct LogitParams {
  Eigen::VectorXd beta;   // one entry per fixed feature
  Eigen::VectorXd alpha;  // n_schools - 1 entries; last school is 0

  // Packed as [beta; alpha].
  Eigen::VectorXd pack() const;
  static LogitParams unpack(const Eigen::VectorXd& theta, int n_fixed);
  double alpha_tilde(int school) const {
    return school < alpha.size() ? alpha[school] : 0.0;
  }
};

struct LogitFit {
  std::string spec_name;
  Denominator denominator = Denominator::Ranked;
  std::vector<std::string> feature_names;
  std::vector<SchoolId> schools;
  LogitParams params;
  Eigen::MatrixXd covariance;  // over [beta; alpha]
  double log_likelihood = 0.0;
  int n_students = 0;
  int n_choices = 0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;

  Eigen::VectorXd standard_errors() const;
};

nlohmann::json to_json(const LogitFit& fit);
LogitFit logit_fit_from_json(const nlohmann::json& j);

double rank_loglik(const LogitParams& params, const ChoiceData& data);
Eigen::VectorXd rank_loglik_grad(const LogitParams& params, const ChoiceData& data);

struct FitOptions {
  int max_iterations = 500;
  double separation_bound = 50.0;
};

// Throws SeparationError, ConvergenceError, or NumericalError for a singular
// Hessian (message carries the smallest eigenvalue).
LogitFit fit_mle(const ChoiceData& data, const FitOptions& options = {});

LogitFit fit_mle(const Dataset& dataset, const FeatureSpec& spec, Denominator denominator,
                 const MenuPolicy* policy = nullptr, const FitOptions& options = {});

// Deterministic utilities (no shock) of each menu option.
std::vector<double> menu_utilities(const LogitParams& params, const FeatureSpec& spec,
                                   const Student& student, const ChoiceMenu& menu,
                                   const ProgramTable& programs, const DistanceModel& distance,
                                   const Eigen::VectorXd* gamma = nullptr);

// Adds iid standard Gumbel shocks, sorts descending, keeps the first ten.
std::vector<int> rank_by_utility(const std::vector<double>& utilities, const ChoiceMenu& menu,
                                 Rng& rng);

std::vector<int> simulate_ranking(const LogitParams& params, const FeatureSpec& spec,
                                  const Student& student, const ChoiceMenu& menu,
                                  const ProgramTable& programs, const DistanceModel& distance,
                                  Rng& rng);

// Extra miles a family would travel for one unit of the feature.
double willingness_to_travel(double beta_feature, double beta_distance);
double willingness_to_travel(const LogitParams& params, const FeatureSpec& spec,
                             const std::string& feature);

// Probability that the closer of two otherwise identical options is chosen,
// when they are one mile apart.
double closer_choice_probability(double beta_distance);

}  // namespace schoolchoice

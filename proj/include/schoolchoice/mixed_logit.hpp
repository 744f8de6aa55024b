#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "schoolchoice/choice_data.hpp"
#include "schoolchoice/logit.hpp"
#include "schoolchoice/mcmc.hpp"

namespace schoolchoice {

struct MixedLogitParams {
  VectorXd alpha;  // n_schools - 1; last school is 0
  VectorXd beta;   // fixed coefficients over F
  VectorXd b;      // mean of the random coefficients over G
  MatrixXd W;      // block-diagonal covariance of the random coefficients

  LogitParams fixed_part() const { return {beta, alpha}; }
};

// Block structure of W and of the beta MWG sweep.
struct MixedLogitLayout {
  std::vector<std::vector<int>> random_blocks;  // partition of 0..|G|-1
  std::vector<std::vector<int>> beta_blocks;    // partition of 0..|F|-1
  std::vector<double> beta_scales;              // initial proposal variances

  void validate(int n_fixed, int n_random) const;  // throws UsageError
};

// For the "mixed" specification: W blocks (ell match), (walk zone),
// (distance, mcas, % white/asian) and six beta subvectors with scales
// .5 .5 .1 .1 .5 .5. Other specifications get singleton blocks.
MixedLogitLayout default_layout(const FeatureSpec& spec);

// log phi_i for one student with v = alpha~ + F beta + G gamma_i.
double conditional_loglik(const ChoiceData& data, int student, const VectorXd& alpha,
                          const VectorXd& beta, const VectorXd& gamma_i);

struct TuningEvent {
  long iteration = 0;
  std::string kernel;  // "gamma", "hmc_alpha", "mwg_beta"
  int index = 0;       // student or block
  double acceptance = 0.0;
  double old_scale = 0.0;
  double new_scale = 0.0;
};

struct ChainConfig {
  long iterations = 50000;
  long burn_in = 25000;
  long thin = 1;
  std::uint64_t seed = 1;
  double tuning_growth = 1.2;
  long tuning_growth_every = 5000;
  // Skip steps 1-3 and hold gamma at 0: the chain then targets the plain
  // logit posterior over (alpha, beta).
  bool fixed_random = false;
  std::optional<MixedLogitParams> init;
  std::ostream* trace = nullptr;  // per-iteration CSV when set
  long divergence_window = 100;

  void validate() const;  // throws UsageError
};

class GibbsSampler {
 public:
  GibbsSampler(const ChoiceData& data, MixedLogitLayout layout, const ChainConfig& config);

  // Steps 1-5 in order.
  void iterate();

  long iteration() const { return iteration_; }
  const MixedLogitParams& params() const { return params_; }
  const MatrixXd& gamma() const { return gamma_; }
  double log_likelihood() const { return log_likelihood_; }
  const std::vector<TuningEvent>& events() const { return events_; }
  double gamma_acceptance() const;
  double hmc_acceptance() const { return hmc_.counter.rate(); }
  std::vector<double> mwg_acceptance() const;
  double hmc_epsilon() const { return hmc_.epsilon; }

 private:
  void step_gamma();
  void step_b();
  void step_w();
  void step_alpha();
  void step_beta();
  void tune();
  void write_trace();

  const ChoiceData& data_;
  MixedLogitLayout layout_;
  ChainConfig config_;
  TuningSchedule schedule_;
  long iteration_ = 0;

  MixedLogitParams params_;
  MatrixXd gamma_;
  VectorXd gamma_logpost_;
  std::vector<double> gamma_rho_;
  std::vector<AcceptanceCounter> gamma_counter_;
  std::vector<TuningClock> gamma_clock_;
  std::vector<Rng> gamma_rng_;

  HmcState hmc_;
  TuningClock hmc_clock_;
  MwgSampler mwg_;
  TuningClock mwg_clock_;

  Rng rng_;
  Rng tuning_rng_;
  double log_likelihood_ = 0.0;
  long non_finite_run_ = 0;
  std::vector<TuningEvent> events_;

  VectorXd offset_;  // per-row utility excluding the block being updated
};

struct PosteriorSample {
  long iteration = 0;
  MixedLogitParams params;
  double log_likelihood = 0.0;
};

struct ChainResult {
  std::vector<PosteriorSample> samples;
  std::vector<TuningEvent> events;
  double gamma_acceptance = 0.0;
  double hmc_acceptance = 0.0;
  std::vector<double> mwg_acceptance;
  double seconds = 0.0;
};

// Throws UsageError for iterations <= burn_in and NumericalError when the
// log-likelihood stays non-finite for `divergence_window` iterations.
ChainResult run_chain(const ChoiceData& data, const MixedLogitLayout& layout,
                      const ChainConfig& config);

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double mc_se = 0.0;
  double ess = 0.0;
};

// Posterior means and SDs of every fixed coefficient, fixed effect, random
// coefficient mean, sigma(feature) = sqrt(W_kk) and rho(f, g) within blocks.
struct PosteriorSummary {
  std::vector<ParameterSummary> rows;
  int n_samples = 0;

  const ParameterSummary& at(const std::string& name) const;
};

struct ParameterNames {
  std::vector<std::string> fixed;
  std::vector<std::string> random;
  std::vector<SchoolId> schools;
};

PosteriorSummary summarize_posterior(const std::vector<PosteriorSample>& samples,
                                     const MixedLogitLayout& layout, const ParameterNames& names);

// Column names of the retained-sample CSV.
std::vector<std::string> sample_columns(const MixedLogitLayout& layout, const ParameterNames& names);
void write_samples_csv(const std::string& path, const std::vector<PosteriorSample>& samples,
                       const MixedLogitLayout& layout, const ParameterNames& names);
std::vector<PosteriorSample> read_samples_csv(const std::string& path, const MixedLogitLayout& layout,
                                              const ParameterNames& names);
void write_events_csv(const std::string& path, const std::vector<TuningEvent>& events);

nlohmann::json to_json(const PosteriorSummary& summary);
nlohmann::json layout_to_json(const MixedLogitLayout& layout);
MixedLogitLayout layout_from_json(const nlohmann::json& j);

// Square-root factor of a PSD matrix; tolerates singular (e.g. zero) W.
MatrixXd covariance_factor(const MatrixXd& w);

// gamma ~ Normal(b, W) via `factor` = covariance_factor(W), then Gumbel
// shocks; top ten kept.
std::vector<int> simulate_ranking_mixed(const MixedLogitParams& sample, const MatrixXd& factor,
                                        const FeatureSpec& spec, const Student& student,
                                        const ChoiceMenu& menu, const ProgramTable& programs,
                                        const DistanceModel& distance, Rng& rng);

}  // namespace schoolchoice

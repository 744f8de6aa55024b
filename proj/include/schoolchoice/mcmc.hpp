#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "schoolchoice/rng.hpp"

namespace schoolchoice {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using LogDensity = std::function<double(const VectorXd&)>;
// Returns log L(x) and writes grad log L(x).
using LogDensityGrad = std::function<double(const VectorXd&, VectorXd&)>;

struct TargetDensity {
  int dim = 0;
  LogDensity log_density;
  LogDensityGrad log_density_grad;  // optional; required by HMC
};

// Largest relative deviation between the analytic gradient and central
// differences over `probes` random points drawn around `center`.
double gradient_check(const TargetDensity& target, const VectorXd& center, double spread,
                      int probes, Rng& rng, double h = 1e-5);

struct AcceptanceCounter {
  long proposed = 0;
  long accepted = 0;

  double rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
  void record(bool ok) {
    ++proposed;
    accepted += ok ? 1 : 0;
  }
  void reset() { proposed = accepted = 0; }
};

struct TuningBand {
  double low;
  double high;
};

inline constexpr TuningBand kRwmBand{0.4, 0.6};
inline constexpr TuningBand kHmcBand{0.5, 0.8};

// Multiplies by 1.25 above the band, by 0.8 below, otherwise unchanged.
double tune_scale(double scale, double acceptance, TuningBand band);

// Tuning interval parameter T: starts at 1 and grows by `growth` every
// `growth_every` iterations. No tuning at or after `freeze_at`.
struct TuningSchedule {
  long freeze_at = 0;
  double growth = 1.2;
  long growth_every = 5000;

  double T(long iteration) const;
  bool can_tune(long iteration) const { return iteration < freeze_at; }
};

// Next tuning epoch for one kernel instance: every Uniform(lo*T, hi*T)
// iterations (lo == hi for a fixed interval).
class TuningClock {
 public:
  TuningClock() = default;
  TuningClock(double lo, double hi, const TuningSchedule& schedule, Rng& rng);

  // True when a tuning event fires at `iteration`; schedules the next one.
  bool due(long iteration, const TuningSchedule& schedule, Rng& rng);
  long next() const { return next_; }

 private:
  long draw(long from, double T, Rng& rng) const;
  double lo_ = 1000.0;
  double hi_ = 1500.0;
  long next_ = 0;
};

struct RwmState {
  VectorXd x;
  double log_density = 0.0;
  double rho = 0.05;  // proposal variance
  AcceptanceCounter counter;
  MatrixXd factor;    // proposal shape L (covariance rho L L'); empty for I
};

// One proposal y = x + Normal(0, rho L L'). NaN or -inf at y rejects.
bool rwm_step(RwmState& state, const LogDensity& f, Rng& rng);

struct HmcState {
  VectorXd x;
  double log_density = 0.0;
  VectorXd grad;
  double epsilon = 0.015;
  int leapfrog_steps = 20;
  AcceptanceCounter counter;
  long rejected_non_finite = 0;
};

struct LeapfrogResult {
  VectorXd x;
  VectorXd p;
  double log_density = 0.0;
  VectorXd grad;
  bool finite = true;
  // H(x0, p0) - H(x, p) with H = -log L + |p|^2 / 2.
  double log_accept_ratio = 0.0;
};

// Leapfrog trajectory from (x0, p0) with fixed step size. grad0 = G(x0).
LeapfrogResult leapfrog(const LogDensityGrad& f, const VectorXd& x0, double log_density0,
                        const VectorXd& grad0, const VectorXd& p0, double epsilon, int steps);

// Draws p0 ~ Normal(0, I) and eps ~ Uniform(0.85 eps, 1.15 eps), then
// accepts with min(1, L(y)/L(x) exp((|p0|^2 - |p|^2) / 2)).
bool hmc_step(HmcState& state, const LogDensityGrad& f, Rng& rng);

// Same step with caller-supplied momentum and step size.
bool hmc_step_with(HmcState& state, const LogDensityGrad& f, const VectorXd& p0, double epsilon,
                   Rng& rng);

struct MwgBlock {
  std::vector<int> indices;
  double rho = 0.5;
  AcceptanceCounter counter;
};

// Metropolis-within-Gibbs: one RWM proposal per block, in order, each
// conditioning on the freshest values of the others.
class MwgSampler {
 public:
  // Throws UsageError unless the blocks partition 0..dim-1.
  MwgSampler(int dim, std::vector<MwgBlock> blocks);

  void sweep(VectorXd& x, double& log_density, const LogDensity& f, Rng& rng);
  std::vector<MwgBlock>& blocks() { return blocks_; }
  const std::vector<MwgBlock>& blocks() const { return blocks_; }

 private:
  int dim_;
  std::vector<MwgBlock> blocks_;
};

// Draw from InverseWishart(nu, Psi): Bartlett draw of Wishart(nu, Psi^-1),
// inverted. Throws UsageError for nu <= dim - 1 and NumericalError for a
// non-SPD Psi.
MatrixXd sample_inverse_wishart(double nu, const MatrixXd& psi, Rng& rng);

bool is_spd(const MatrixXd& m);

// Effective sample size by Geyer's initial positive sequence.
double effective_sample_size(const std::vector<double>& draws);
// Monte Carlo standard error of the mean: sd / sqrt(ESS).
double mc_standard_error(const std::vector<double>& draws);
// Batch-means MC standard error with `batches` equal batches.
double batch_means_se(const std::vector<double>& draws, int batches = 50);

}  // namespace schoolchoice

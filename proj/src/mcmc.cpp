#include "schoolchoice/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "schoolchoice/types.hpp"

namespace schoolchoice {

double gradient_check(const TargetDensity& target, const VectorXd& center, double spread,
                      int probes, Rng& rng, double h) {
  double worst = 0.0;
  VectorXd g(target.dim), dummy(target.dim);
  for (int t = 0; t < probes; ++t) {
    const VectorXd x = center + spread * standard_normal_vector(rng, target.dim);
    target.log_density_grad(x, g);
    for (int k = 0; k < target.dim; ++k) {
      VectorXd xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const double fd = (target.log_density(xp) - target.log_density(xm)) / (2.0 * h);
      worst = std::max(worst, std::abs(fd - g[k]) / std::max(1.0, std::abs(g[k])));
    }
  }
  return worst;
}

double tune_scale(double scale, double acceptance, TuningBand band) {
  if (acceptance > band.high) return scale * 1.25;
  if (acceptance < band.low) return scale * 0.8;
  return scale;
}

double TuningSchedule::T(long iteration) const {
  return std::pow(growth, static_cast<double>(iteration / growth_every));
}

TuningClock::TuningClock(double lo, double hi, const TuningSchedule& schedule, Rng& rng)
    : lo_(lo), hi_(hi) {
  next_ = draw(0, schedule.T(0), rng);
}

long TuningClock::draw(long from, double T, Rng& rng) const {
  const double wait = lo_ == hi_ ? lo_ * T : lo_ * T + (hi_ - lo_) * T * uniform01(rng);
  return from + std::max(1L, std::lround(wait));
}

bool TuningClock::due(long iteration, const TuningSchedule& schedule, Rng& rng) {
  if (iteration < next_ || !schedule.can_tune(iteration)) return false;
  next_ = draw(iteration, schedule.T(iteration), rng);
  return true;
}

bool rwm_step(RwmState& state, const LogDensity& f, Rng& rng) {
  const double sd = std::sqrt(state.rho);
  VectorXd z(state.x.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = standard_normal(rng);
  VectorXd y = state.x + sd * (state.factor.size() ? VectorXd(state.factor * z) : z);
  const double ly = f(y);
  const double u = uniform01(rng);
  bool ok = false;
  if (!std::isnan(ly) && ly != -std::numeric_limits<double>::infinity()) {
    const double log_ratio = ly - state.log_density;
    ok = log_ratio >= 0.0 || std::log(u) < log_ratio;
  }
  if (ok) {
    state.x = std::move(y);
    state.log_density = ly;
  }
  state.counter.record(ok);
  return ok;
}

LeapfrogResult leapfrog(const LogDensityGrad& f, const VectorXd& x0, double log_density0,
                        const VectorXd& grad0, const VectorXd& p0, double epsilon, int steps) {
  LeapfrogResult r;
  r.x = x0;
  r.p = p0 + 0.5 * epsilon * grad0;
  r.grad.resize(x0.size());
  for (int s = 0; s < steps; ++s) {
    r.x += epsilon * r.p;
    r.log_density = f(r.x, r.grad);
    if (!std::isfinite(r.log_density) || !r.grad.allFinite()) {
      r.finite = false;
      return r;
    }
    r.p += (s + 1 < steps ? 1.0 : 0.5) * epsilon * r.grad;
  }
  r.log_accept_ratio = (r.log_density - log_density0) + 0.5 * (p0.squaredNorm() - r.p.squaredNorm());
  r.finite = std::isfinite(r.log_accept_ratio);
  return r;
}

bool hmc_step_with(HmcState& state, const LogDensityGrad& f, const VectorXd& p0, double epsilon,
                   Rng& rng) {
  if (state.grad.size() != state.x.size()) {
    state.grad.resize(state.x.size());
    state.log_density = f(state.x, state.grad);
  }
  LeapfrogResult r = leapfrog(f, state.x, state.log_density, state.grad, p0, epsilon,
                              state.leapfrog_steps);
  const double u = uniform01(rng);
  bool ok = false;
  if (!r.finite) {
    ++state.rejected_non_finite;
  } else {
    ok = r.log_accept_ratio >= 0.0 || std::log(u) < r.log_accept_ratio;
  }
  if (ok) {
    state.x = std::move(r.x);
    state.log_density = r.log_density;
    state.grad = std::move(r.grad);
  }
  state.counter.record(ok);
  return ok;
}

bool hmc_step(HmcState& state, const LogDensityGrad& f, Rng& rng) {
  const double eps = state.epsilon * (0.85 + 0.3 * uniform01(rng));
  const VectorXd p0 = standard_normal_vector(rng, state.x.size());
  return hmc_step_with(state, f, p0, eps, rng);
}

MwgSampler::MwgSampler(int dim, std::vector<MwgBlock> blocks) : dim_(dim), blocks_(std::move(blocks)) {
  std::vector<int> seen(static_cast<std::size_t>(dim), 0);
  for (const auto& b : blocks_) {
    if (b.indices.empty()) throw UsageError("MWG block is empty");
    if (!(b.rho > 0.0)) throw UsageError("MWG block scale must be positive");
    for (int k : b.indices) {
      if (k < 0 || k >= dim) throw UsageError("MWG block index out of range");
      if (seen[static_cast<std::size_t>(k)]++) throw UsageError("MWG blocks overlap at coordinate " + std::to_string(k));
    }
  }
  for (int k = 0; k < dim; ++k)
    if (!seen[static_cast<std::size_t>(k)]) throw UsageError("MWG blocks miss coordinate " + std::to_string(k));
}

void MwgSampler::sweep(VectorXd& x, double& log_density, const LogDensity& f, Rng& rng) {
  for (auto& b : blocks_) {
    const double sd = std::sqrt(b.rho);
    VectorXd y = x;
    for (int k : b.indices) y[k] += sd * standard_normal(rng);
    const double ly = f(y);
    const double u = uniform01(rng);
    bool ok = false;
    if (!std::isnan(ly) && ly != -std::numeric_limits<double>::infinity()) {
      const double log_ratio = ly - log_density;
      ok = log_ratio >= 0.0 || std::log(u) < log_ratio;
    }
    if (ok) {
      x = std::move(y);
      log_density = ly;
    }
    b.counter.record(ok);
  }
}

bool is_spd(const MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  if (!m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + m.cwiseAbs().maxCoeff())) return false;
  Eigen::LLT<MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

MatrixXd sample_inverse_wishart(double nu, const MatrixXd& psi, Rng& rng) {
  const Eigen::Index d = psi.rows();
  if (!(nu > static_cast<double>(d) - 1.0))
    throw UsageError("inverse Wishart needs nu > dim - 1");
  if (!is_spd(psi)) throw NumericalError("inverse Wishart scale matrix is not SPD");
  const MatrixXd psi_inv = psi.llt().solve(MatrixXd::Identity(d, d));
  const MatrixXd l = Eigen::LLT<MatrixXd>(0.5 * (psi_inv + psi_inv.transpose())).matrixL();
  MatrixXd a = MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    a(i, i) = std::sqrt(std::chi_squared_distribution<double>(nu - static_cast<double>(i))(rng));
    for (Eigen::Index j = 0; j < i; ++j) a(i, j) = standard_normal(rng);
  }
  const MatrixXd la = l * a;
  const MatrixXd wishart = la * la.transpose();
  MatrixXd inv = wishart.llt().solve(MatrixXd::Identity(d, d));
  return 0.5 * (inv + inv.transpose());
}

double effective_sample_size(const std::vector<double>& draws) {
  const std::size_t n = draws.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(n);
  std::vector<double> c(draws.size());
  for (std::size_t i = 0; i < n; ++i) c[i] = draws[i] - mean;
  auto autocov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
    return s / static_cast<double>(n);
  };
  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return static_cast<double>(n);
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    sum += pair;
    prev_pair = pair;
  }
  const double tau = std::max(1e-12, 2.0 * sum - 1.0);
  return std::min(static_cast<double>(n) * std::log10(static_cast<double>(n)),
                  static_cast<double>(n) / tau);
}

double mc_standard_error(const std::vector<double>& draws) {
  const std::size_t n = draws.size();
  if (n < 2) return 0.0;
  const double mean = std::accumulate(draws.begin(), draws.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double x : draws) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return sd / std::sqrt(effective_sample_size(draws));
}

double batch_means_se(const std::vector<double>& draws, int batches) {
  const std::size_t size = draws.size() / static_cast<std::size_t>(batches);
  if (batches < 2 || size == 0) return 0.0;
  std::vector<double> means(static_cast<std::size_t>(batches));
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += draws[static_cast<std::size_t>(b) * size + i];
    means[static_cast<std::size_t>(b)] = s / static_cast<double>(size);
  }
  const double m = std::accumulate(means.begin(), means.end(), 0.0) / batches;
  double ss = 0.0;
  for (double x : means) ss += (x - m) * (x - m);
  return std::sqrt(ss / (batches - 1) / batches);
}

}  // namespace schoolchoice

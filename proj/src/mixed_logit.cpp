#include "schoolchoice/mixed_logit.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "schoolchoice/csv.hpp"
#include "schoolchoice/kernels.hpp"

namespace schoolchoice {

namespace {

void check_partition(const std::vector<std::vector<int>>& blocks, int dim, const char* what) {
  std::vector<int> seen(static_cast<std::size_t>(dim), 0);
  for (const auto& b : blocks) {
    if (b.empty()) throw UsageError(std::string(what) + " block is empty");
    for (int k : b) {
      if (k < 0 || k >= dim) throw UsageError(std::string(what) + " block index out of range");
      if (seen[static_cast<std::size_t>(k)]++) throw UsageError(std::string(what) + " blocks overlap");
    }
  }
  for (int k = 0; k < dim; ++k)
    if (!seen[static_cast<std::size_t>(k)]) throw UsageError(std::string(what) + " blocks miss a coordinate");
}

double alpha_tilde(const VectorXd& alpha, int school) {
  return school < alpha.size() ? alpha[school] : 0.0;
}

}  // namespace

void MixedLogitLayout::validate(int n_fixed, int n_random) const {
  check_partition(random_blocks, n_random, "random-coefficient");
  check_partition(beta_blocks, n_fixed, "beta");
  if (beta_scales.size() != beta_blocks.size()) throw UsageError("one beta scale per beta block");
  for (double s : beta_scales)
    if (!(s > 0.0)) throw UsageError("beta scales must be positive");
}

MixedLogitLayout default_layout(const FeatureSpec& spec) {
  MixedLogitLayout l;
  const int nf = static_cast<int>(spec.fixed.size());
  const int nr = static_cast<int>(spec.random.size());
  if (spec.name == "mixed") {
    l.random_blocks = {{0}, {1}, {2, 3, 4}};
    l.beta_blocks = {{0}, {1}, {2}, {3, 4}, {5, 6}, {7, 8}};
    l.beta_scales = {0.5, 0.5, 0.1, 0.1, 0.5, 0.5};
    return l;
  }
  for (int k = 0; k < nr; ++k) l.random_blocks.push_back({k});
  for (int k = 0; k < nf; ++k) {
    l.beta_blocks.push_back({k});
    l.beta_scales.push_back(0.1);
  }
  return l;
}

double conditional_loglik(const ChoiceData& data, int student, const VectorXd& alpha,
                          const VectorXd& beta, const VectorXd& gamma_i) {
  const int o = data.offset[student];
  const int rows = data.offset[student + 1] - o;
  std::vector<double> v(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    double u = alpha_tilde(alpha, data.school[static_cast<std::size_t>(o + r)]);
    u += data.fixed.row(o + r).dot(beta);
    if (gamma_i.size()) u += data.random.row(o + r).dot(gamma_i);
    if (!std::isfinite(u)) throw NumericalError("non-finite utility for student " + std::to_string(student));
    v[static_cast<std::size_t>(r)] = u;
  }
  return kernels::student_loglik(v.data(), rows, data.n_ranked[student], nullptr);
}

void ChainConfig::validate() const {
  if (iterations <= 0) throw UsageError("iterations must be positive");
  if (burn_in < 0) throw UsageError("burn-in must be non-negative");
  if (iterations <= burn_in) throw UsageError("iterations must exceed burn-in");
  if (thin < 1) throw UsageError("thin must be at least 1");
  if (!(tuning_growth >= 1.0) || tuning_growth_every < 1) throw UsageError("bad tuning schedule");
}

GibbsSampler::GibbsSampler(const ChoiceData& data, MixedLogitLayout layout, const ChainConfig& config)
    : data_(data),
      layout_(std::move(layout)),
      config_(config),
      schedule_{config.burn_in, config.tuning_growth, config.tuning_growth_every},
      mwg_(1, {MwgBlock{{0}, 1.0, {}}}),
      rng_(make_rng(config.seed, "gibbs")),
      tuning_rng_(make_rng(config.seed, "tuning")) {
  config_.validate();
  const int nf = data.n_fixed();
  const int nr = data.n_random();
  const int n = data.n_students;
  layout_.validate(nf, nr);
  check_finite(data);

  if (config.init) {
    params_ = *config.init;
    if (params_.alpha.size() != data.n_schools - 1 || params_.beta.size() != nf ||
        params_.b.size() != nr || params_.W.rows() != nr || params_.W.cols() != nr)
      throw UsageError("initial parameters do not match the data dimensions");
  } else {
    params_.alpha = VectorXd::Zero(data.n_schools - 1);
    params_.beta = VectorXd::Zero(nf);
    params_.b = VectorXd::Zero(nr);
    params_.W = MatrixXd::Identity(nr, nr);
  }
  gamma_ = MatrixXd::Zero(n, nr);
  if (!config.fixed_random)
    for (int i = 0; i < n; ++i) gamma_.row(i) = params_.b.transpose();

  gamma_rho_.assign(static_cast<std::size_t>(n), 0.05);
  gamma_counter_.assign(static_cast<std::size_t>(n), {});
  gamma_logpost_ = VectorXd::Zero(n);
  gamma_rng_.reserve(static_cast<std::size_t>(n));
  gamma_clock_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    gamma_rng_.push_back(make_rng(config.seed, "gamma", static_cast<std::uint64_t>(i)));
    gamma_clock_.emplace_back(1000.0, 1500.0, schedule_, gamma_rng_.back());
  }

  hmc_.x = params_.alpha;
  hmc_.epsilon = 0.015;
  hmc_.leapfrog_steps = 20;
  hmc_clock_ = TuningClock(1000.0, 1000.0, schedule_, tuning_rng_);

  std::vector<MwgBlock> blocks;
  for (std::size_t k = 0; k < layout_.beta_blocks.size(); ++k)
    blocks.push_back(MwgBlock{layout_.beta_blocks[k], layout_.beta_scales[k], {}});
  if (nf > 0) mwg_ = MwgSampler(nf, std::move(blocks));
  mwg_clock_ = TuningClock(100.0, 150.0, schedule_, tuning_rng_);
}

double GibbsSampler::gamma_acceptance() const {
  long p = 0, a = 0;
  for (const auto& c : gamma_counter_) {
    p += c.proposed;
    a += c.accepted;
  }
  return p ? static_cast<double>(a) / p : 0.0;
}

std::vector<double> GibbsSampler::mwg_acceptance() const {
  std::vector<double> out;
  if (data_.n_fixed() > 0)
    for (const auto& b : mwg_.blocks()) out.push_back(b.counter.rate());
  return out;
}

void GibbsSampler::step_gamma() {
  const int n = data_.n_students;
  const int nr = data_.n_random();
  if (nr == 0) return;
  // Base utilities without the random part.
  offset_.resize(data_.rows());
  for (int r = 0; r < data_.rows(); ++r)
    offset_[r] = alpha_tilde(params_.alpha, data_.school[static_cast<std::size_t>(r)]) +
                 data_.fixed.row(r).dot(params_.beta);
  const MatrixXd w_inv = params_.W.llt().solve(MatrixXd::Identity(nr, nr));
  // Proposals are shaped by the current W, which is fixed during this step.
  const MatrixXd w_factor = covariance_factor(params_.W);
  const VectorXd& b = params_.b;
  const long t = iteration_;
  std::vector<std::optional<TuningEvent>> fired(static_cast<std::size_t>(n));

#pragma omp parallel
  {
    std::vector<double> v;
#pragma omp for schedule(dynamic, 32)
    for (int i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const int o = data_.offset[i];
      const int rows = data_.offset[i + 1] - o;
      v.resize(static_cast<std::size_t>(rows));
      auto log_post = [&](const VectorXd& g) {
        for (int r = 0; r < rows; ++r) v[static_cast<std::size_t>(r)] = offset_[o + r] + data_.random.row(o + r).dot(g);
        const VectorXd dev = g - b;
        return kernels::student_loglik(v.data(), rows, data_.n_ranked[i], nullptr) -
               0.5 * dev.dot(w_inv * dev);
      };
      Rng& rng = gamma_rng_[iu];
      RwmState s{gamma_.row(i).transpose(), 0.0, gamma_rho_[iu], gamma_counter_[iu], w_factor};
      s.log_density = log_post(s.x);
      rwm_step(s, log_post, rng);
      gamma_.row(i) = s.x.transpose();
      gamma_logpost_[i] = s.log_density;
      gamma_counter_[iu] = s.counter;
      if (gamma_clock_[iu].due(t, schedule_, rng)) {
        const double rate = gamma_counter_[iu].rate();
        const double next = tune_scale(gamma_rho_[iu], rate, kRwmBand);
        fired[iu] = TuningEvent{t, "gamma", i, rate, gamma_rho_[iu], next};
        gamma_rho_[iu] = next;
        gamma_counter_[iu].reset();
      }
    }
  }
  for (auto& e : fired)
    if (e) events_.push_back(std::move(*e));
}

void GibbsSampler::step_b() {
  const int n = data_.n_students;
  const int nr = data_.n_random();
  if (nr == 0 || n == 0) return;
  const VectorXd mean = gamma_.colwise().mean().transpose();
  const MatrixXd factor = covariance_factor(params_.W / static_cast<double>(n));
  params_.b = mean + factor * standard_normal_vector(rng_, nr);
}

void GibbsSampler::step_w() {
  const int n = data_.n_students;
  if (data_.n_random() == 0) return;
  MatrixXd w = MatrixXd::Zero(params_.W.rows(), params_.W.cols());
  for (const auto& block : layout_.random_blocks) {
    const int k = static_cast<int>(block.size());
    MatrixXd scatter = MatrixXd::Zero(k, k);
    for (int i = 0; i < n; ++i) {
      VectorXd dev(k);
      for (int a = 0; a < k; ++a) dev[a] = gamma_(i, block[static_cast<std::size_t>(a)]) - params_.b[block[static_cast<std::size_t>(a)]];
      scatter.noalias() += dev * dev.transpose();
    }
    // n C = scatter, with C the block covariance about b.
    const MatrixXd psi = static_cast<double>(k) * MatrixXd::Identity(k, k) + scatter;
    const MatrixXd draw = sample_inverse_wishart(static_cast<double>(k + n), psi, rng_);
    for (int a = 0; a < k; ++a)
      for (int c = 0; c < k; ++c) w(block[static_cast<std::size_t>(a)], block[static_cast<std::size_t>(c)]) = draw(a, c);
  }
  params_.W = w;
}

void GibbsSampler::step_alpha() {
  if (data_.n_schools <= 1) return;
  const int n = data_.n_students;
  offset_.resize(data_.rows());
  for (int i = 0; i < n; ++i)
    for (int r = data_.offset[i]; r < data_.offset[i + 1]; ++r) {
      double u = data_.fixed.row(r).dot(params_.beta);
      if (data_.n_random() > 0) u += data_.random.row(r).dot(gamma_.row(i));
      offset_[r] = u;
    }
  VectorXd v(data_.rows());
  const LogDensityGrad f = [&](const VectorXd& a, VectorXd& g) {
    for (int r = 0; r < data_.rows(); ++r) v[r] = offset_[r] + alpha_tilde(a, data_.school[static_cast<std::size_t>(r)]);
    return kernels::parallel::loglik_school_grad(data_, v, g);
  };
  hmc_.x = params_.alpha;
  hmc_.grad.resize(0);  // conditioning values changed; recompute at x
  hmc_step(hmc_, f, rng_);
  params_.alpha = hmc_.x;
}

void GibbsSampler::step_beta() {
  const int n = data_.n_students;
  offset_.resize(data_.rows());
  for (int i = 0; i < n; ++i)
    for (int r = data_.offset[i]; r < data_.offset[i + 1]; ++r) {
      double u = alpha_tilde(params_.alpha, data_.school[static_cast<std::size_t>(r)]);
      if (data_.n_random() > 0) u += data_.random.row(r).dot(gamma_.row(i));
      offset_[r] = u;
    }
  VectorXd v(data_.rows());
  const LogDensity f = [&](const VectorXd& beta) {
    v.noalias() = data_.fixed * beta;
    v += offset_;
    return kernels::parallel::loglik(data_, v);
  };
  double ll = f(params_.beta);
  if (data_.n_fixed() > 0) mwg_.sweep(params_.beta, ll, f, rng_);
  log_likelihood_ = ll;
}

void GibbsSampler::tune() {
  const long t = iteration_;
  if (hmc_clock_.due(t, schedule_, tuning_rng_) && data_.n_schools > 1) {
    const double rate = hmc_.counter.rate();
    const double next = tune_scale(hmc_.epsilon, rate, kHmcBand);
    events_.push_back({t, "hmc_alpha", 0, rate, hmc_.epsilon, next});
    hmc_.epsilon = next;
    hmc_.counter.reset();
  }
  if (mwg_clock_.due(t, schedule_, tuning_rng_) && data_.n_fixed() > 0) {
    int k = 0;
    for (auto& b : mwg_.blocks()) {
      const double rate = b.counter.rate();
      const double next = tune_scale(b.rho, rate, kRwmBand);
      events_.push_back({t, "mwg_beta", k++, rate, b.rho, next});
      b.rho = next;
      b.counter.reset();
    }
  }
}

void GibbsSampler::write_trace() {
  std::ostream& out = *config_.trace;
  const long t = iteration_;
  if (!config_.fixed_random && data_.n_random() > 0) {
    double rho = 0.0;
    for (double r : gamma_rho_) rho += r;
    rho /= std::max<std::size_t>(1, gamma_rho_.size());
    out << t << ",gamma," << csv::format_double(gamma_acceptance()) << ','
        << csv::format_double(rho) << '\n';
  }
  if (data_.n_schools > 1)
    out << t << ",hmc_alpha," << csv::format_double(hmc_.counter.rate()) << ','
        << csv::format_double(hmc_.epsilon) << '\n';
  if (data_.n_fixed() > 0) {
    int k = 0;
    for (const auto& b : mwg_.blocks())
      out << t << ",mwg_beta_" << k++ << ',' << csv::format_double(b.counter.rate()) << ','
          << csv::format_double(b.rho) << '\n';
  }
}

void GibbsSampler::iterate() {
  ++iteration_;
  try {
    if (!config_.fixed_random) {
      step_gamma();
      step_b();
      step_w();
    }
    step_alpha();
    step_beta();
  } catch (const NumericalError& e) {
    throw NumericalError("Gibbs iteration " + std::to_string(iteration_) + ": " + e.what());
  }
  tune();
  if (config_.trace) write_trace();
  if (std::isfinite(log_likelihood_)) {
    non_finite_run_ = 0;
  } else if (++non_finite_run_ >= config_.divergence_window) {
    throw NumericalError("chain diverged: log-likelihood non-finite for " +
                         std::to_string(non_finite_run_) + " iterations (at " +
                         std::to_string(iteration_) + ")");
  }
}

ChainResult run_chain(const ChoiceData& data, const MixedLogitLayout& layout, const ChainConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  if (config.trace) *config.trace << "iteration,block,acceptance,scale\n";
  GibbsSampler sampler(data, layout, config);
  ChainResult result;
  for (long t = 1; t <= config.iterations; ++t) {
    sampler.iterate();
    if (t > config.burn_in && (t - config.burn_in) % config.thin == 0) {
      PosteriorSample s;
      s.iteration = t;
      s.params = sampler.params();
      s.log_likelihood = sampler.log_likelihood();
      result.samples.push_back(std::move(s));
    }
  }
  result.events = sampler.events();
  result.gamma_acceptance = sampler.gamma_acceptance();
  result.hmc_acceptance = sampler.hmc_acceptance();
  result.mwg_acceptance = sampler.mwg_acceptance();
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

const ParameterSummary& PosteriorSummary::at(const std::string& name) const {
  for (const auto& r : rows)
    if (r.name == name) return r;
  throw UsageError("no posterior summary for '" + name + "'");
}

namespace {

struct Column {
  std::string name;
  std::function<double(const MixedLogitParams&)> get;
};

std::vector<Column> parameter_columns(const MixedLogitLayout& layout, const ParameterNames& names) {
  std::vector<Column> cols;
  for (std::size_t k = 0; k + 1 < names.schools.size(); ++k)
    cols.push_back({"alpha(" + names.schools[k] + ")", [k](const MixedLogitParams& p) {
                      return p.alpha[static_cast<Eigen::Index>(k)];
                    }});
  for (std::size_t k = 0; k < names.fixed.size(); ++k)
    cols.push_back({names.fixed[k], [k](const MixedLogitParams& p) { return p.beta[static_cast<Eigen::Index>(k)]; }});
  for (std::size_t k = 0; k < names.random.size(); ++k)
    cols.push_back({"mean(" + names.random[k] + ")",
                    [k](const MixedLogitParams& p) { return p.b[static_cast<Eigen::Index>(k)]; }});
  for (const auto& block : layout.random_blocks)
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t c = a; c < block.size(); ++c) {
        const int i = block[a], j = block[c];
        cols.push_back({"W(" + names.random[static_cast<std::size_t>(i)] + "," +
                            names.random[static_cast<std::size_t>(j)] + ")",
                        [i, j](const MixedLogitParams& p) { return p.W(i, j); }});
      }
  return cols;
}

std::vector<Column> derived_columns(const MixedLogitLayout& layout, const ParameterNames& names) {
  std::vector<Column> cols;
  for (std::size_t k = 0; k < names.random.size(); ++k)
    cols.push_back({"sigma(" + names.random[k] + ")", [k](const MixedLogitParams& p) {
                      const auto i = static_cast<Eigen::Index>(k);
                      return std::sqrt(std::max(0.0, p.W(i, i)));
                    }});
  for (const auto& block : layout.random_blocks)
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t c = a + 1; c < block.size(); ++c) {
        const int i = block[a], j = block[c];
        cols.push_back({"rho(" + names.random[static_cast<std::size_t>(i)] + "," +
                            names.random[static_cast<std::size_t>(j)] + ")",
                        [i, j](const MixedLogitParams& p) {
                          const double s = std::sqrt(p.W(i, i) * p.W(j, j));
                          return s > 0.0 ? p.W(i, j) / s : 0.0;
                        }});
      }
  return cols;
}

}  // namespace

PosteriorSummary summarize_posterior(const std::vector<PosteriorSample>& samples,
                                     const MixedLogitLayout& layout, const ParameterNames& names) {
  if (samples.empty()) throw UsageError("no posterior samples to summarize");
  PosteriorSummary out;
  out.n_samples = static_cast<int>(samples.size());
  auto cols = parameter_columns(layout, names);
  for (auto& c : derived_columns(layout, names)) cols.push_back(std::move(c));
  std::vector<double> series(samples.size());
  for (const auto& c : cols) {
    double mean = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      series[s] = c.get(samples[s].params);
      mean += series[s];
    }
    mean /= static_cast<double>(samples.size());
    double ss = 0.0;
    for (double x : series) ss += (x - mean) * (x - mean);
    ParameterSummary p;
    p.name = c.name;
    p.mean = mean;
    p.sd = samples.size() > 1 ? std::sqrt(ss / static_cast<double>(samples.size() - 1)) : 0.0;
    p.ess = effective_sample_size(series);
    p.mc_se = samples.size() > 1 ? p.sd / std::sqrt(std::max(1.0, p.ess)) : 0.0;
    out.rows.push_back(std::move(p));
  }
  return out;
}

std::vector<std::string> sample_columns(const MixedLogitLayout& layout, const ParameterNames& names) {
  std::vector<std::string> out = {"iteration", "log_likelihood"};
  for (const auto& c : parameter_columns(layout, names)) out.push_back(c.name);
  return out;
}

void write_samples_csv(const std::string& path, const std::vector<PosteriorSample>& samples,
                       const MixedLogitLayout& layout, const ParameterNames& names) {
  const auto cols = parameter_columns(layout, names);
  csv::Writer w(path);
  w.row(sample_columns(layout, names));
  for (const auto& s : samples) {
    std::vector<std::string> row = {std::to_string(s.iteration), csv::format_double(s.log_likelihood)};
    for (const auto& c : cols) row.push_back(csv::format_double(c.get(s.params)));
    w.row(row);
  }
}

std::vector<PosteriorSample> read_samples_csv(const std::string& path, const MixedLogitLayout& layout,
                                              const ParameterNames& names) {
  const auto t = csv::read(path);
  const auto expected = sample_columns(layout, names);
  if (t.header != expected) throw DataError(path + ": posterior sample columns do not match the model");
  const auto nf = static_cast<Eigen::Index>(names.fixed.size());
  const auto nr = static_cast<Eigen::Index>(names.random.size());
  const auto na = static_cast<Eigen::Index>(names.schools.size()) - 1;
  std::vector<PosteriorSample> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path + " line " + std::to_string(t.line_numbers[r]);
    PosteriorSample s;
    s.iteration = csv::parse_int(row[0], where);
    s.log_likelihood = csv::parse_double(row[1], where);
    std::size_t k = 2;
    s.params.alpha.resize(na);
    for (Eigen::Index a = 0; a < na; ++a) s.params.alpha[a] = csv::parse_double(row[k++], where);
    s.params.beta.resize(nf);
    for (Eigen::Index a = 0; a < nf; ++a) s.params.beta[a] = csv::parse_double(row[k++], where);
    s.params.b.resize(nr);
    for (Eigen::Index a = 0; a < nr; ++a) s.params.b[a] = csv::parse_double(row[k++], where);
    s.params.W = MatrixXd::Zero(nr, nr);
    for (const auto& block : layout.random_blocks)
      for (std::size_t a = 0; a < block.size(); ++a)
        for (std::size_t c = a; c < block.size(); ++c) {
          const double x = csv::parse_double(row[k++], where);
          s.params.W(block[a], block[c]) = x;
          s.params.W(block[c], block[a]) = x;
        }
    out.push_back(std::move(s));
  }
  return out;
}

void write_events_csv(const std::string& path, const std::vector<TuningEvent>& events) {
  csv::Writer w(path);
  w.row({"iteration", "kernel", "index", "acceptance", "old_scale", "new_scale"});
  for (const auto& e : events)
    w.row({std::to_string(e.iteration), e.kernel, std::to_string(e.index),
           csv::format_double(e.acceptance), csv::format_double(e.old_scale),
           csv::format_double(e.new_scale)});
}

nlohmann::json to_json(const PosteriorSummary& summary) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : summary.rows)
    rows.push_back({{"name", r.name}, {"mean", r.mean}, {"posterior_sd", r.sd}, {"mc_se", r.mc_se}, {"ess", r.ess}});
  return {{"n_samples", summary.n_samples}, {"parameters", rows}};
}

nlohmann::json layout_to_json(const MixedLogitLayout& layout) {
  return {{"random_blocks", layout.random_blocks},
          {"beta_blocks", layout.beta_blocks},
          {"beta_scales", layout.beta_scales}};
}

MixedLogitLayout layout_from_json(const nlohmann::json& j) {
  try {
    MixedLogitLayout l;
    l.random_blocks = j.at("random_blocks").get<std::vector<std::vector<int>>>();
    l.beta_blocks = j.at("beta_blocks").get<std::vector<std::vector<int>>>();
    l.beta_scales = j.at("beta_scales").get<std::vector<double>>();
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed layout: ") + e.what());
  }
}

MatrixXd covariance_factor(const MatrixXd& w) {
  if (w.size() == 0) return w;
  Eigen::LLT<MatrixXd> llt(w);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (w + w.transpose()));
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

std::vector<int> simulate_ranking_mixed(const MixedLogitParams& sample, const MatrixXd& factor,
                                        const FeatureSpec& spec, const Student& student,
                                        const ChoiceMenu& menu, const ProgramTable& programs,
                                        const DistanceModel& distance, Rng& rng) {
  const VectorXd gamma = sample.b + factor * standard_normal_vector(rng, sample.b.size());
  const LogitParams fixed = sample.fixed_part();
  return rank_by_utility(menu_utilities(fixed, spec, student, menu, programs, distance, &gamma), menu, rng);
}

}  // namespace schoolchoice

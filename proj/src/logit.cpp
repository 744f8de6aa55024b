#include "schoolchoice/logit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "schoolchoice/kernels.hpp"
#include "schoolchoice/optimize.hpp"

namespace schoolchoice {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd LogitParams::pack() const {
  VectorXd theta(beta.size() + alpha.size());
  theta << beta, alpha;
  return theta;
}

LogitParams LogitParams::unpack(const VectorXd& theta, int n_fixed) {
  LogitParams p;
  p.beta = theta.head(n_fixed);
  p.alpha = theta.tail(theta.size() - n_fixed);
  return p;
}

VectorXd LogitFit::standard_errors() const {
  return covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
}

namespace {

std::vector<double> to_vec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const LogitFit& fit) {
  nlohmann::json j;
  const VectorXd se = fit.standard_errors();
  const int nf = static_cast<int>(fit.params.beta.size());
  j["model"] = "logit";
  j["spec"] = fit.spec_name;
  j["denominator"] = std::string(to_string(fit.denominator));
  j["features"] = fit.feature_names;
  j["beta"] = to_vec(fit.params.beta);
  j["beta_se"] = to_vec(se.head(nf));
  j["schools"] = fit.schools;
  j["alpha"] = to_vec(fit.params.alpha);
  j["alpha_se"] = to_vec(se.tail(se.size() - nf));
  nlohmann::json cov = nlohmann::json::array();
  for (Eigen::Index r = 0; r < fit.covariance.rows(); ++r) cov.push_back(to_vec(fit.covariance.row(r)));
  j["covariance"] = cov;
  j["log_likelihood"] = fit.log_likelihood;
  j["n_students"] = fit.n_students;
  j["n_choices"] = fit.n_choices;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["gradient_norm"] = fit.gradient_norm;
  return j;
}

LogitFit logit_fit_from_json(const nlohmann::json& j) {
  try {
    if (j.at("model") != "logit") throw DataError("fit file is not a logit fit");
    LogitFit f;
    f.spec_name = j.at("spec").get<std::string>();
    f.denominator = parse_denominator(j.value("denominator", std::string("ranked")));
    f.feature_names = j.at("features").get<std::vector<std::string>>();
    f.params.beta = from_vec(j.at("beta").get<std::vector<double>>());
    f.schools = j.at("schools").get<std::vector<std::string>>();
    f.params.alpha = from_vec(j.at("alpha").get<std::vector<double>>());
    const auto cov = j.at("covariance").get<std::vector<std::vector<double>>>();
    const auto n = static_cast<Eigen::Index>(cov.size());
    f.covariance.resize(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (static_cast<Eigen::Index>(cov[static_cast<std::size_t>(r)].size()) != n)
        throw DataError("fit covariance is not square");
      for (Eigen::Index c = 0; c < n; ++c) f.covariance(r, c) = cov[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    if (n != f.params.beta.size() + f.params.alpha.size())
      throw DataError("fit covariance dimension does not match parameters");
    f.log_likelihood = j.at("log_likelihood").get<double>();
    f.n_students = j.at("n_students").get<int>();
    f.n_choices = j.at("n_choices").get<int>();
    f.converged = j.value("converged", true);
    f.iterations = j.value("iterations", 0);
    f.gradient_norm = j.value("gradient_norm", 0.0);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed logit fit: ") + e.what());
  }
}

double rank_loglik(const LogitParams& params, const ChoiceData& data) {
  VectorXd v;
  kernels::parallel::utilities(data, params.alpha, params.beta, MatrixXd(), v);
  const double ll = kernels::parallel::loglik(data, v);
  if (!std::isfinite(ll)) throw NumericalError("non-finite log-likelihood");
  return ll;
}

VectorXd rank_loglik_grad(const LogitParams& params, const ChoiceData& data) {
  VectorXd v, g;
  kernels::parallel::utilities(data, params.alpha, params.beta, MatrixXd(), v);
  kernels::parallel::loglik_grad(data, v, g);
  return g;
}

LogitFit fit_mle(const ChoiceData& data, const FitOptions& options) {
  check_finite(data);
  int informative = 0;
  for (int i = 0; i < data.n_students; ++i) {
    const int rows = data.offset[i + 1] - data.offset[i];
    for (int c = 0; c < data.n_ranked[i]; ++c)
      if (rows - c > 1) ++informative;
  }
  if (informative == 0)
    throw DataError("no ranking stage has more than one alternative; nothing to estimate");

  const int nf = data.n_fixed();
  const Objective negll = [&](const VectorXd& theta, VectorXd& grad) {
    const LogitParams p = LogitParams::unpack(theta, nf);
    VectorXd v;
    kernels::parallel::utilities(data, p.alpha, p.beta, MatrixXd(), v);
    const double ll = kernels::parallel::loglik_grad(data, v, grad);
    grad = -grad;
    return -ll;
  };

  BfgsOptions bo;
  bo.max_iterations = options.max_iterations;
  const BfgsResult r = minimize_bfgs(negll, VectorXd::Zero(nf + data.n_schools - 1), bo);

  const double max_abs = r.x.size() ? r.x.cwiseAbs().maxCoeff() : 0.0;
  const bool perfect_fit = r.f < 1e-6 * informative;
  if (max_abs > options.separation_bound || perfect_fit) {
    Eigen::Index k = 0;
    if (r.x.size()) r.x.cwiseAbs().maxCoeff(&k);
    std::ostringstream msg;
    msg << "separation: estimates diverge (largest |theta| = " << max_abs << " at index " << k
        << ", log-likelihood " << -r.f << ")";
    throw SeparationError(msg.str());
  }
  if (!r.converged) {
    std::ostringstream msg;
    msg << "BFGS did not converge in " << r.iterations << " iterations (gradient norm "
        << r.grad.norm() << ")";
    throw ConvergenceError(msg.str());
  }

  const MatrixXd info = hessian_from_gradient(negll, r.x);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(info);
  const VectorXd lambda = eig.eigenvalues();
  const double lmax = lambda.cwiseAbs().maxCoeff();
  if (!(lambda.minCoeff() > 1e-10 * std::max(1.0, lmax))) {
    std::ostringstream msg;
    msg << "singular Hessian at optimum; smallest eigenvalue " << lambda.minCoeff();
    throw NumericalError(msg.str());
  }
  MatrixXd cov = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();

  LogitFit fit;
  fit.params = LogitParams::unpack(r.x, nf);
  fit.covariance = 0.5 * (cov + cov.transpose());
  fit.log_likelihood = -r.f;
  fit.n_students = data.n_students;
  fit.n_choices = data.n_choices();
  fit.iterations = r.iterations;
  fit.gradient_norm = r.grad.norm();
  fit.converged = true;
  fit.denominator = data.denominator;
  return fit;
}

LogitFit fit_mle(const Dataset& dataset, const FeatureSpec& spec, Denominator denominator,
                 const MenuPolicy* policy, const FitOptions& options) {
  std::vector<ChoiceMenu> menus;
  if (denominator == Denominator::FullMenu) {
    if (!policy) throw UsageError("full_menu likelihood needs a menu policy");
    menus = build_menus(dataset.students, dataset.programs, *policy, dataset.distance);
  }
  const ChoiceData data = build_choice_data(dataset.students, dataset.rankings, dataset.programs,
                                            dataset.distance, spec, denominator,
                                            menus.empty() ? nullptr : &menus);
  LogitFit fit = fit_mle(data, options);
  fit.spec_name = spec.name;
  fit.feature_names = spec.fixed_names();
  fit.schools = dataset.programs.schools();
  return fit;
}

std::vector<double> menu_utilities(const LogitParams& params, const FeatureSpec& spec,
                                   const Student& student, const ChoiceMenu& menu,
                                   const ProgramTable& programs, const DistanceModel& distance,
                                   const VectorXd* gamma) {
  std::vector<double> u;
  u.reserve(menu.options.size());
  for (int j : menu.options) {
    const auto& p = programs[static_cast<std::size_t>(j)];
    const double miles = distance(student, p);
    const int school = programs.school_index_of_program(static_cast<std::size_t>(j));
    double v = params.alpha_tilde(school);
    for (std::size_t k = 0; k < spec.fixed.size(); ++k)
      v += params.beta[static_cast<Eigen::Index>(k)] * feature_value(spec.fixed[k], student, p, miles);
    if (gamma)
      for (std::size_t k = 0; k < spec.random.size(); ++k)
        v += (*gamma)[static_cast<Eigen::Index>(k)] * feature_value(spec.random[k], student, p, miles);
    u.push_back(v);
  }
  return u;
}

std::vector<int> rank_by_utility(const std::vector<double>& utilities, const ChoiceMenu& menu,
                                 Rng& rng) {
  std::vector<std::pair<double, int>> draws;
  draws.reserve(utilities.size());
  for (std::size_t k = 0; k < utilities.size(); ++k)
    draws.emplace_back(utilities[k] + gumbel(rng), menu.options[k]);
  std::sort(draws.begin(), draws.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  const std::size_t keep = std::min<std::size_t>(draws.size(), kMaxRankedChoices);
  std::vector<int> out(keep);
  for (std::size_t k = 0; k < keep; ++k) out[k] = draws[k].second;
  return out;
}

std::vector<int> simulate_ranking(const LogitParams& params, const FeatureSpec& spec,
                                  const Student& student, const ChoiceMenu& menu,
                                  const ProgramTable& programs, const DistanceModel& distance,
                                  Rng& rng) {
  return rank_by_utility(menu_utilities(params, spec, student, menu, programs, distance), menu, rng);
}

double willingness_to_travel(double beta_feature, double beta_distance) {
  if (beta_distance == 0.0) throw NumericalError("distance coefficient is zero");
  if (beta_feature == 0.0) return 0.0;
  return -beta_feature / beta_distance;
}

double willingness_to_travel(const LogitParams& params, const FeatureSpec& spec,
                             const std::string& feature) {
  const int d = spec.fixed_index("distance");
  const int f = spec.fixed_index(feature);
  if (d < 0) throw UsageError("specification has no distance coefficient");
  if (f < 0) throw UsageError("specification has no feature '" + feature + "'");
  return willingness_to_travel(params.beta[f], params.beta[d]);
}

double closer_choice_probability(double beta_distance) {
  return 1.0 / (1.0 + std::exp(beta_distance));
}

}  // namespace schoolchoice

#pragma once

#include <functional>

#include <Eigen/Dense>

namespace schoolchoice {

// Objective returning f(x) and writing its gradient.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct BfgsOptions {
  int max_iterations = 500;
  // Stop when |grad| < gtol_rel * (1 + |f|).
  double gtol_rel = 1e-6;
  int max_line_search = 60;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
};

// Minimizes f with inverse-Hessian BFGS and a backtracking Armijo line search.
BfgsResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& options = {});

// Central differences of an analytic gradient; symmetrized.
Eigen::MatrixXd hessian_from_gradient(const Objective& f, const Eigen::VectorXd& x,
                                      double rel_step = 1e-5);

}  // namespace schoolchoice

#include "schoolchoice/optimize.hpp"

#include <cmath>

namespace schoolchoice {

using Eigen::MatrixXd;
using Eigen::VectorXd;

BfgsResult minimize_bfgs(const Objective& f, VectorXd x0, const BfgsOptions& options) {
  const Eigen::Index n = x0.size();
  BfgsResult r;
  r.x = std::move(x0);
  r.grad.resize(n);
  r.f = f(r.x, r.grad);
  MatrixXd h = MatrixXd::Identity(n, n);
  bool scaled = false;
  VectorXd g_new(n);

  for (r.iterations = 0; r.iterations < options.max_iterations; ++r.iterations) {
    if (!std::isfinite(r.f)) break;
    if (r.grad.norm() < options.gtol_rel * (1.0 + std::abs(r.f))) {
      r.converged = true;
      break;
    }
    VectorXd dir = -h * r.grad;
    double slope = dir.dot(r.grad);
    if (!(slope < 0.0)) {
      h.setIdentity();
      dir = -r.grad;
      slope = dir.dot(r.grad);
    }
    double step = 1.0;
    // Keep the first step modest before the curvature scale is known.
    if (!scaled) step = std::min(1.0, 1.0 / std::max(1e-12, dir.norm()));
    VectorXd x_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int k = 0; k < options.max_line_search; ++k) {
      x_new = r.x + step * dir;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= r.f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const VectorXd s = x_new - r.x;
    const VectorXd y = g_new - r.grad;
    const double sy = s.dot(y);
    r.x = std::move(x_new);
    r.f = f_new;
    r.grad = g_new;
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h = MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const VectorXd hy = h * y;
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) -
           rho * (hy * s.transpose() + s * hy.transpose());
    }
  }
  if (!r.converged && std::isfinite(r.f) &&
      r.grad.norm() < options.gtol_rel * (1.0 + std::abs(r.f)))
    r.converged = true;
  return r;
}

MatrixXd hessian_from_gradient(const Objective& f, const VectorXd& x, double rel_step) {
  const Eigen::Index n = x.size();
  MatrixXd hess(n, n);
  VectorXd gp(n), gm(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = rel_step * std::max(1.0, std::abs(x[j]));
    VectorXd xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    f(xp, gp);
    f(xm, gm);
    hess.col(j) = (gp - gm) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace schoolchoice

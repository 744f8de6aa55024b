#pragma once

#include <Eigen/Dense>

#include "schoolchoice/choice_data.hpp"

// Likelihood kernels for the rank-ordered logit. Two implementations with the
// same contract: `serial` is the direct stage-by-stage reference, `parallel`
// is the OpenMP path used by the estimators. Both reduce per-student terms in
// student order, so results do not depend on the thread count.
namespace schoolchoice::kernels {

// Row utilities v = alpha[school] + F beta (+ G gamma_i when gamma has rows).
// alpha has n_schools - 1 entries; the last school is the zero baseline.
// gamma is n_students x |G| or empty.
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Log-likelihood of student i's ranking given that student's row utilities
// v[0..rows). When `resid` is non-null it receives d loglik / d v per row.
double student_loglik(const double* v, int rows, int n_ranked, double* resid);

namespace serial {
void utilities(const ChoiceData& d, const VectorXd& alpha, const VectorXd& beta,
               const MatrixXd& gamma, VectorXd& v);
double loglik(const ChoiceData& d, const VectorXd& v, VectorXd* per_student = nullptr);
// Gradient with respect to (beta, alpha), packed as [beta; alpha].
double loglik_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad);
// Gradient with respect to alpha only.
double loglik_school_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad);
}  // namespace serial

namespace parallel {
void utilities(const ChoiceData& d, const VectorXd& alpha, const VectorXd& beta,
               const MatrixXd& gamma, VectorXd& v);
double loglik(const ChoiceData& d, const VectorXd& v, VectorXd* per_student = nullptr);
double loglik_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad);
double loglik_school_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad);
}  // namespace parallel

int max_threads();

}  // namespace schoolchoice::kernels

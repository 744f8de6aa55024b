#include "schoolchoice/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace schoolchoice::kernels {

namespace {

constexpr int kBlock = 256;

// Stage c draws from rows {c..m-1} plus every unranked row; each stage gets
// its own log-sum-exp.
double direct_student_loglik(const double* v, int rows, int m, double* resid) {
  if (resid) std::fill(resid, resid + rows, 0.0);
  double ll = 0.0;
  for (int c = 0; c < m; ++c) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int d = c; d < rows; ++d) mx = std::max(mx, v[d]);
    double s = 0.0;
    for (int d = c; d < rows; ++d) s += std::exp(v[d] - mx);
    const double lse = mx + std::log(s);
    ll += v[c] - lse;
    if (resid) {
      resid[c] += 1.0;
      for (int d = c; d < rows; ++d) resid[d] -= std::exp(v[d] - lse);
    }
  }
  return ll;
}

void utilities_rows(const ChoiceData& d, const VectorXd& alpha, const VectorXd& beta,
                    const MatrixXd& gamma, int i, VectorXd& v) {
  const int last = d.n_schools - 1;
  const bool has_gamma = gamma.rows() > 0 && d.n_random() > 0;
  for (int r = d.offset[i]; r < d.offset[i + 1]; ++r) {
    const int k = d.school[static_cast<std::size_t>(r)];
    double u = k == last ? 0.0 : alpha[k];
    u += d.fixed.row(r).dot(beta);
    if (has_gamma) u += d.random.row(r).dot(gamma.row(i));
    v[r] = u;
  }
}

void accumulate_grad(const ChoiceData& d, int i, const double* resid, VectorXd& grad) {
  const int nf = d.n_fixed();
  const int last = d.n_schools - 1;
  for (int r = d.offset[i]; r < d.offset[i + 1]; ++r) {
    const double g = resid[r - d.offset[i]];
    if (g == 0.0) continue;
    grad.head(nf).noalias() += g * d.fixed.row(r).transpose();
    const int k = d.school[static_cast<std::size_t>(r)];
    if (k != last) grad[nf + k] += g;
  }
}

void accumulate_school_grad(const ChoiceData& d, int i, const double* resid, VectorXd& grad) {
  const int last = d.n_schools - 1;
  for (int r = d.offset[i]; r < d.offset[i + 1]; ++r) {
    const int k = d.school[static_cast<std::size_t>(r)];
    if (k != last) grad[k] += resid[r - d.offset[i]];
  }
}

}  // namespace

double student_loglik(const double* v, int rows, int m, double* resid) {
  if (m <= 0) {
    if (resid) std::fill(resid, resid + rows, 0.0);
    return 0.0;
  }
  double mx = v[0];
  for (int d = 1; d < rows; ++d) mx = std::max(mx, v[d]);

  // Suffix sums of exp(v - mx): S_c = sum over the stage-c choice set.
  double e_buf[64];
  double s_buf[16];
  std::vector<double> e_heap, s_heap;
  double* e = e_buf;
  double* s = s_buf;
  if (rows > 64) {
    e_heap.resize(static_cast<std::size_t>(rows));
    e = e_heap.data();
  }
  if (m > 16) {
    s_heap.resize(static_cast<std::size_t>(m));
    s = s_heap.data();
  }
  double tail = 0.0;
  for (int d = 0; d < rows; ++d) {
    e[d] = std::exp(v[d] - mx);
    if (d >= m) tail += e[d];
  }
  double acc = tail;
  for (int c = m - 1; c >= 0; --c) {
    acc += e[c];
    s[c] = acc;
  }
  double ll = 0.0;
  for (int c = 0; c < m; ++c) {
    if (!(s[c] > 1e-250)) return direct_student_loglik(v, rows, m, resid);
    ll += v[c] - mx - std::log(s[c]);
  }
  if (resid) {
    double cum = 0.0;
    for (int c = 0; c < m; ++c) {
      cum += 1.0 / s[c];
      resid[c] = 1.0 - e[c] * cum;
    }
    for (int d = m; d < rows; ++d) resid[d] = -e[d] * cum;
  }
  return ll;
}

namespace serial {

void utilities(const ChoiceData& d, const VectorXd& alpha, const VectorXd& beta,
               const MatrixXd& gamma, VectorXd& v) {
  v.resize(d.rows());
  for (int i = 0; i < d.n_students; ++i) utilities_rows(d, alpha, beta, gamma, i, v);
}

double loglik(const ChoiceData& d, const VectorXd& v, VectorXd* per_student) {
  if (per_student) per_student->resize(d.n_students);
  double total = 0.0;
  for (int i = 0; i < d.n_students; ++i) {
    const int o = d.offset[i];
    const double li = direct_student_loglik(v.data() + o, d.offset[i + 1] - o, d.n_ranked[i], nullptr);
    if (per_student) (*per_student)[i] = li;
    total += li;
  }
  return total;
}

double loglik_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad) {
  grad = VectorXd::Zero(d.n_fixed() + d.n_schools - 1);
  std::vector<double> resid;
  double total = 0.0;
  for (int i = 0; i < d.n_students; ++i) {
    const int o = d.offset[i];
    const int rows = d.offset[i + 1] - o;
    resid.assign(static_cast<std::size_t>(rows), 0.0);
    total += direct_student_loglik(v.data() + o, rows, d.n_ranked[i], resid.data());
    accumulate_grad(d, i, resid.data(), grad);
  }
  return total;
}

double loglik_school_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad) {
  grad = VectorXd::Zero(d.n_schools - 1);
  std::vector<double> resid;
  double total = 0.0;
  for (int i = 0; i < d.n_students; ++i) {
    const int o = d.offset[i];
    const int rows = d.offset[i + 1] - o;
    resid.assign(static_cast<std::size_t>(rows), 0.0);
    total += direct_student_loglik(v.data() + o, rows, d.n_ranked[i], resid.data());
    accumulate_school_grad(d, i, resid.data(), grad);
  }
  return total;
}

}  // namespace serial

namespace parallel {

void utilities(const ChoiceData& d, const VectorXd& alpha, const VectorXd& beta,
               const MatrixXd& gamma, VectorXd& v) {
  v.resize(d.rows());
#pragma omp parallel for schedule(static)
  for (int i = 0; i < d.n_students; ++i) utilities_rows(d, alpha, beta, gamma, i, v);
}

double loglik(const ChoiceData& d, const VectorXd& v, VectorXd* per_student) {
  VectorXd local;
  VectorXd& li = per_student ? *per_student : local;
  li.resize(d.n_students);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < d.n_students; ++i) {
    const int o = d.offset[i];
    li[i] = student_loglik(v.data() + o, d.offset[i + 1] - o, d.n_ranked[i], nullptr);
  }
  double total = 0.0;
  for (int i = 0; i < d.n_students; ++i) total += li[i];
  return total;
}

double loglik_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad) {
  const int dim = d.n_fixed() + d.n_schools - 1;
  const int n_blocks = (d.n_students + kBlock - 1) / kBlock;
  std::vector<VectorXd> partial(static_cast<std::size_t>(n_blocks));
  std::vector<double> partial_ll(static_cast<std::size_t>(n_blocks), 0.0);
#pragma omp parallel
  {
    std::vector<double> resid;
#pragma omp for schedule(dynamic, 1)
    for (int b = 0; b < n_blocks; ++b) {
      VectorXd g = VectorXd::Zero(dim);
      double ll = 0.0;
      const int end = std::min(d.n_students, (b + 1) * kBlock);
      for (int i = b * kBlock; i < end; ++i) {
        const int o = d.offset[i];
        const int rows = d.offset[i + 1] - o;
        resid.resize(static_cast<std::size_t>(rows));
        ll += student_loglik(v.data() + o, rows, d.n_ranked[i], resid.data());
        accumulate_grad(d, i, resid.data(), g);
      }
      partial[static_cast<std::size_t>(b)] = std::move(g);
      partial_ll[static_cast<std::size_t>(b)] = ll;
    }
  }
  grad = VectorXd::Zero(dim);
  double total = 0.0;
  for (int b = 0; b < n_blocks; ++b) {
    grad += partial[static_cast<std::size_t>(b)];
    total += partial_ll[static_cast<std::size_t>(b)];
  }
  return total;
}

double loglik_school_grad(const ChoiceData& d, const VectorXd& v, VectorXd& grad) {
  const int dim = d.n_schools - 1;
  const int n_blocks = (d.n_students + kBlock - 1) / kBlock;
  std::vector<VectorXd> partial(static_cast<std::size_t>(n_blocks));
  std::vector<double> partial_ll(static_cast<std::size_t>(n_blocks), 0.0);
#pragma omp parallel
  {
    std::vector<double> resid;
#pragma omp for schedule(dynamic, 1)
    for (int b = 0; b < n_blocks; ++b) {
      VectorXd g = VectorXd::Zero(dim);
      double ll = 0.0;
      const int end = std::min(d.n_students, (b + 1) * kBlock);
      for (int i = b * kBlock; i < end; ++i) {
        const int o = d.offset[i];
        const int rows = d.offset[i + 1] - o;
        resid.resize(static_cast<std::size_t>(rows));
        ll += student_loglik(v.data() + o, rows, d.n_ranked[i], resid.data());
        accumulate_school_grad(d, i, resid.data(), g);
      }
      partial[static_cast<std::size_t>(b)] = std::move(g);
      partial_ll[static_cast<std::size_t>(b)] = ll;
    }
  }
  grad = VectorXd::Zero(dim);
  double total = 0.0;
  for (int b = 0; b < n_blocks; ++b) {
    grad += partial[static_cast<std::size_t>(b)];
    total += partial_ll[static_cast<std::size_t>(b)];
  }
  return total;
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace schoolchoice::kernels

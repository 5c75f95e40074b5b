#include "aomdp/linalg.hpp"

#include <cmath>
#include <numbers>

namespace aomdp {

Matrix spd_cholesky(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Matrix b = a;
  b.diagonal().array() += kSpdJitter;
  llt.compute(b);
  if (llt.info() != Eigen::Success) throw NumericalError("matrix not positive definite after jitter");
  return llt.matrixL();
}

Matrix spd_inverse(const Matrix& a) {
  const Matrix l = spd_cholesky(a);
  Matrix inv = Matrix::Identity(a.rows(), a.cols());
  l.triangularView<Eigen::Lower>().solveInPlace(inv);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(inv);
  return 0.5 * (inv + inv.transpose());
}

GaussianPosterior conjugate_posterior(const Matrix& gram, const Vector& moment, double noise_var,
                                      const Vector& prior_mean, const Matrix& prior_cov) {
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be positive");
  const Matrix prior_prec = spd_inverse(prior_cov);
  const Matrix prec = gram / noise_var + prior_prec;
  GaussianPosterior p;
  p.cov = spd_inverse(prec);
  p.mean = p.cov * (moment / noise_var + prior_prec * prior_mean);
  return p;
}

Vector sample_mvn(const GaussianPosterior& p, Rng& rng) {
  const Matrix l = spd_cholesky(p.cov);
  Vector z(p.mean.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = std_normal(rng);
  return p.mean + l * z;
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

}  // namespace aomdp

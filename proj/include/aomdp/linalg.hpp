#pragma once

#include "aomdp/core.hpp"
#include "aomdp/rng.hpp"

namespace aomdp {

struct GaussianPosterior {
  Vector mean;
  Matrix cov;
};

inline constexpr double kSpdJitter = 1e-9;

/// Lower Cholesky factor of a symmetric positive definite matrix; retries once
/// with kSpdJitter added to the diagonal.
Matrix spd_cholesky(const Matrix& a);

Matrix spd_inverse(const Matrix& a);

/// Posterior of a Gaussian linear model with prior N(prior_mean, prior_cov)
/// given Gram matrix X'X, moment X'Y and noise variance.
GaussianPosterior conjugate_posterior(const Matrix& gram, const Vector& moment, double noise_var,
                                      const Vector& prior_mean, const Matrix& prior_cov);

Vector sample_mvn(const GaussianPosterior& p, Rng& rng);

double log_normal_pdf(double x, double mean, double var);

}  // namespace aomdp

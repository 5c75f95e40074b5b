#include "aomdp/rlsvi.hpp"

#include <cmath>

namespace aomdp::rlsvi {

int control_dim(ControlBasis basis) { return basis == ControlBasis::Active ? kDimA : kDimABaseline; }

double engagement(const BeliefSummary& s) {
  if (s.z.size() < 2) throw std::invalid_argument("observed state must hold [M, E]");
  return s.z[1];
}

Vector phi_I(const BeliefSummary& s, int i) {
  const double e = engagement(s);
  const double iv = i;
  Vector f(kDimI);
  f << 1.0, e, s.mean_u, s.std_u, iv, iv * e, iv * s.mean_u;
  return f;
}

Vector phi_A(const BeliefSummary& s, double context, int a, ControlBasis basis) {
  const double e = engagement(s);
  const double av = a;
  Vector f(control_dim(basis));
  if (basis == ControlBasis::Active)
    f << 1.0, e, s.mean_u, context, static_cast<double>(s.i), av, av * e, av * s.mean_u, av * context;
  else
    f << 1.0, e, s.mean_u, context, av, av * e, av * s.mean_u, av * context;
  return f;
}

double q_control(const Vector& beta, double e, double mean_u, int i, double context, int a,
                 ControlBasis basis) {
  const double* b = beta.data();
  double q = b[0] + b[1] * e + b[2] * mean_u + b[3] * context;
  int k = 4;
  if (basis == ControlBasis::Active) q += b[k++] * i;
  if (a == 1) q += b[k] + b[k + 1] * e + b[k + 2] * mean_u + b[k + 3] * context;
  return q;
}

double q_measure(const Vector& beta, const BeliefSummary& s, int i) {
  return phi_I(s, i).dot(beta);
}

BlrHyper BlrHyper::from_product(double lambda_sigma2, double sigma2) {
  if (!(lambda_sigma2 > 0.0) || !(sigma2 > 0.0)) throw std::invalid_argument("hyperparameters must be positive");
  return BlrHyper{lambda_sigma2 / sigma2, sigma2};
}

QPosterior blr_prior(int dim, const BlrHyper& hyper) {
  if (!(hyper.lambda > 0.0) || !(hyper.sigma2 > 0.0)) throw std::invalid_argument("hyperparameters must be positive");
  QPosterior q;
  q.hyper = hyper;
  q.X.resize(0, dim);
  q.Y.resize(0);
  q.mean = Vector::Zero(dim);
  q.cov = Matrix::Identity(dim, dim) / hyper.lambda;
  return q;
}

QPosterior blr_from_moments(QPosterior q, const Matrix& gram, const Vector& moment) {
  const double s2 = q.hyper.sigma2;
  Matrix prec = gram / s2;
  prec.diagonal().array() += q.hyper.lambda;
  q.cov = spd_inverse(prec);
  q.mean = q.cov * (moment / s2);
  return q;
}

QPosterior blr_update(QPosterior q, Matrix X, Vector Y) {
  if (X.rows() != Y.size()) throw std::invalid_argument("row and target counts differ");
  if (X.cols() != q.mean.size()) throw std::invalid_argument("feature dimension mismatch");
  const Matrix gram = X.transpose() * X;
  const Vector moment = X.transpose() * Y;
  q.X = std::move(X);
  q.Y = std::move(Y);
  return blr_from_moments(std::move(q), gram, moment);
}

Vector sample_beta(const QPosterior& q, Rng& rng) {
  return sample_mvn(GaussianPosterior{q.mean, q.cov}, rng);
}

QWeights QWeights::zeros(ControlBasis basis) {
  QWeights w;
  w.beta_I = Vector::Zero(kDimI);
  w.beta_A = Vector::Zero(control_dim(basis));
  w.beta_A_target = Vector::Zero(control_dim(basis));
  return w;
}

void QWeights::after_control_draw(int period) {
  if (++steps_since_copy >= period) {
    beta_A_target = beta_A;
    steps_since_copy = 0;
  }
}

double target_measure(ParticleView particles, double e, double context, int i_taken,
                      const Vector& beta_eval, const Vector& beta_select, double gamma) {
  const double sg = std::sqrt(gamma);
  const auto basis = ControlBasis::Active;
  if (i_taken == 1) {
    double acc = 0.0;
    for (std::size_t j = 0; j < particles.values.size(); ++j) {
      const double w = particles.weights[j];
      if (w == 0.0) continue;
      const double u = particles.values[j];
      const int a = greedy(q_control(beta_select, e, u, 1, context, 0, basis),
                           q_control(beta_select, e, u, 1, context, 1, basis));
      acc += w * q_control(beta_eval, e, u, 1, context, a, basis);
    }
    return sg * acc;
  }
  double mean = 0.0;
  for (std::size_t j = 0; j < particles.values.size(); ++j) mean += particles.weights[j] * particles.values[j];
  const int a = greedy(q_control(beta_select, e, mean, 0, context, 0, basis),
                       q_control(beta_select, e, mean, 0, context, 1, basis));
  return sg * q_control(beta_eval, e, mean, 0, context, a, basis);
}

double target_control(double reward, const BeliefSummary& next, double next_context,
                      const Vector& beta_eval, const Vector& beta_select, double gamma,
                      ControlBasis basis) {
  const double e = engagement(next);
  const int a = greedy(q_control(beta_select, e, next.mean_u, next.i, next_context, 0, basis),
                       q_control(beta_select, e, next.mean_u, next.i, next_context, 1, basis));
  return reward + gamma * q_control(beta_eval, e, next.mean_u, next.i, next_context, a, basis);
}

int act_measure(const BeliefSummary& s, const Vector& beta_I, int t) {
  if (t < 1) throw std::invalid_argument("periods start at 1");
  if (t == 1) return 1;
  return greedy(q_measure(beta_I, s, 0), q_measure(beta_I, s, 1));
}

int act_control(const BeliefSummary& s, double context, const Vector& beta_A, int t, Rng& rng,
                ControlBasis basis) {
  if (t < 1) throw std::invalid_argument("periods start at 1");
  if (t == 1) return uniform01(rng) < 0.5 ? 1 : 0;
  const double e = engagement(s);
  return greedy(q_control(beta_A, e, s.mean_u, s.i, context, 0, basis),
                q_control(beta_A, e, s.mean_u, s.i, context, 1, basis));
}

double designed_reward(const Eigen::Vector4d& theta_r, double m, double e, double mean_prev) {
  return theta_r[0] + theta_r[1] * m + theta_r[2] * e + theta_r[3] * mean_prev;
}

}  // namespace aomdp::rlsvi

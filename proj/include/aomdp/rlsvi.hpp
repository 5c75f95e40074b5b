#pragma once

#include "aomdp/core.hpp"
#include "aomdp/linalg.hpp"
#include "aomdp/rng.hpp"

namespace aomdp::rlsvi {

inline constexpr int kDimI = 7;
inline constexpr int kDimA = 9;
inline constexpr int kDimABaseline = 8;

/// Active agents use the 9-dim control basis, always/never agents drop the I column.
enum class ControlBasis { Active, Baseline };

int control_dim(ControlBasis basis);

/// The engagement component E_{t-1} of the observed state z = [M_{t-1}, E_{t-1}].
double engagement(const BeliefSummary& s);

/// [1, E, mean, std, i, i*E, i*mean]
Vector phi_I(const BeliefSummary& s, int i);
/// [1, E, mean, C, I, a, a*E, a*mean, a*C]; the baseline basis omits I.
Vector phi_A(const BeliefSummary& s, double context, int a, ControlBasis basis = ControlBasis::Active);

/// phi_A(...)' beta without materializing the feature vector.
double q_control(const Vector& beta, double e, double mean_u, int i, double context, int a,
                 ControlBasis basis);
double q_measure(const Vector& beta, const BeliefSummary& s, int i);

/// Index of the larger value; ties go to action 0.
inline int greedy(double q0, double q1) { return q1 > q0 ? 1 : 0; }

struct BlrHyper {
  double lambda = 1.0;
  double sigma2 = 1.0;

  /// Hyperparameters from the product lambda * sigma^2 and sigma^2.
  static BlrHyper from_product(double lambda_sigma2, double sigma2);
};

struct QPosterior {
  BlrHyper hyper;
  Matrix X;
  Vector Y;
  Vector mean;
  Matrix cov;
};

QPosterior blr_prior(int dim, const BlrHyper& hyper);
/// Posterior over all rows given; replaces the rows and targets held by q.
QPosterior blr_update(QPosterior q, Matrix X, Vector Y);
/// Same closed form from accumulated X'X and X'Y.
QPosterior blr_from_moments(QPosterior q, const Matrix& gram, const Vector& moment);
Vector sample_beta(const QPosterior& q, Rng& rng);

struct QWeights {
  Vector beta_I;
  Vector beta_A;
  Vector beta_A_target;
  int steps_since_copy = 0;

  static QWeights zeros(ControlBasis basis);
  /// Counts one beta_A draw and refreshes the target copy every `period` draws.
  void after_control_draw(int period);
};

/// Measurement target for one historical period.
/// Measured: sqrt(gamma) * sum_j w_j phi_A(z, u_j, I=1, a_j)' beta_eval, a_j greedy under beta_select.
/// Unmeasured: sqrt(gamma) * phi_A(z, mean, I=0, a')' beta_eval.
double target_measure(ParticleView particles, double e, double context, int i_taken,
                      const Vector& beta_eval, const Vector& beta_select, double gamma);

/// Control target: reward + gamma * phi_A(next post-measure belief, a')' beta_eval.
double target_control(double reward, const BeliefSummary& next_post_measure, double next_context,
                      const Vector& beta_eval, const Vector& beta_select, double gamma,
                      ControlBasis basis);

int act_measure(const BeliefSummary& s, const Vector& beta_I, int t);
int act_control(const BeliefSummary& s, double context, const Vector& beta_A, int t, Rng& rng,
                ControlBasis basis);

/// [1, M, E, mean_prev]' theta_R
double designed_reward(const Eigen::Vector4d& theta_r, double m, double e, double mean_prev);

}  // namespace aomdp::rlsvi

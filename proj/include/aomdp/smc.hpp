#pragma once

#include "aomdp/core.hpp"
#include "aomdp/linalg.hpp"
#include "aomdp/rng.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace aomdp::smc {

enum class Block { M, R, O };

inline constexpr int kDimM = 8;
inline constexpr int kDimR = 4;
inline constexpr int kDimO = 2;

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;
template <int N>
using Mat = Eigen::Matrix<double, N, N>;

template <int N>
struct BlockPrior {
  Vec<N> mean = Vec<N>::Zero();
  Mat<N> cov = Mat<N>::Identity();
};

/// Priors and noise variances of the working model
///   M_t = x_M' theta_M + e,  R_t = [1, M_t, E_t, R_{t-1}]' theta_R + e,  O_t = [1, R_t]' theta_O + e.
struct SmcPrior {
  BlockPrior<kDimM> m;
  BlockPrior<kDimR> r;
  BlockPrior<kDimO> o;
  double var_m = 1.0;
  double var_r = 1.0;
  double var_o = 1.0;

  static SmcPrior defaults();
};

template <int N>
struct BlockStats {
  Mat<N> gram = Mat<N>::Zero();
  Vec<N> moment = Vec<N>::Zero();
  int rows = 0;

  void add(const Vec<N>& x, double y) {
    gram.noalias() += x * x.transpose();
    moment.noalias() += x * y;
    ++rows;
  }
};

struct SuffStats {
  std::shared_ptr<const SmcPrior> prior;
  BlockStats<kDimM> m;
  BlockStats<kDimR> r;
  BlockStats<kDimO> o;
};

struct ThetaDraw {
  Vec<kDimM> m = Vec<kDimM>::Zero();
  Vec<kDimR> r = Vec<kDimR>::Zero();
  Vec<kDimO> o = Vec<kDimO>::Zero();
};

GaussianPosterior theta_posterior(const SuffStats& ss, Block block, double noise_var);
GaussianPosterior theta_posterior(const SuffStats& ss, Block block);

ThetaDraw draw_theta(const SuffStats& ss, Rng& rng);
ThetaDraw prior_mean_theta(const SmcPrior& prior);

struct SmcConfig {
  int num_particles = 50;
  double ess_fraction = 0.5;
  double init_mean = 0.0;
  double init_var = 1.0;
  bool pin_theta = false;  // use the prior means instead of posterior draws
};

struct Particle {
  std::vector<double> trajectory;
  SuffStats stats;
  ThetaDraw theta;

  double value() const { return trajectory.back(); }
};

/// Observations entering the half-step 1 update of period t.
struct StepObservation {
  double m = 0.0;      // M_{t-1}
  double e = 0.0;      // E_{t-1}
  double o = 0.0;      // O_{t-1}
  double e_lag = 0.0;  // E_{t-2}
  double c = 0.0;      // C_{t-1}
  int i = 0;           // I_{t-1}
  int a = 0;           // A_{t-1}
};

class ParticleBelief {
public:
  ParticleBelief() = default;

  static ParticleBelief initialize(const SmcConfig& cfg, std::shared_ptr<const SmcPrior> prior,
                                   double o0, Rng& rng);
  /// Bare belief over the given values, without trajectories or parameter statistics.
  static ParticleBelief from_particles(std::vector<double> values, std::vector<double> weights,
                                       int half_step = 1);

  int size() const { return static_cast<int>(weights_.size()); }
  int half_step() const { return half_step_; }
  int period() const { return period_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> weights() const { return weights_; }
  ParticleView view() const { return {values_, weights_}; }
  const std::vector<Particle>& particles() const { return particles_; }
  const SmcConfig& config() const { return cfg_; }

  double last_ess() const { return last_ess_; }
  bool last_resampled() const { return last_resampled_; }
  bool degenerate_warning() const { return degenerate_; }

  /// Weighted mean of the particles' parameter draws.
  ThetaDraw mean_theta_draw() const;
  /// Weighted mean of the particles' conditional posterior means of the R block.
  Vec<kDimR> posterior_mean_theta_r() const;
  /// Weighted mean of |theta_R draw - truth|^2.
  double theta_r_draw_mse(const Vec<kDimR>& truth) const;

  friend ParticleBelief propagate_step1(ParticleBelief b, const StepObservation& obs, Rng& rng);
  friend ParticleBelief propagate_step2(ParticleBelief b, int i, std::optional<double> revealed);
  friend ParticleBelief resample(ParticleBelief b, Rng& rng);

private:
  // Pre-step-1 particle set, kept for the measured branch of half-step 2.
  struct Pending {
    bool active = false;
    bool initial = false;
    std::vector<Particle> ancestors;
    std::vector<double> log_w;
    std::vector<double> log_m;
    std::vector<double> mean_r;
    StepObservation obs;
    double o0 = 0.0;
  };

  void set_log_weights(const std::vector<double>& log_w);
  void refresh_values();
  void append_rows(Particle& p, const Particle& ancestor, double r_new) const;

  SmcConfig cfg_;
  std::shared_ptr<const SmcPrior> prior_;
  std::vector<Particle> particles_;
  std::vector<double> values_;
  std::vector<double> weights_;
  Pending pending_;
  int half_step_ = 1;
  int period_ = 1;
  double last_ess_ = 0.0;
  bool last_resampled_ = false;
  bool degenerate_ = false;
};

ParticleBelief propagate_step1(ParticleBelief b, const StepObservation& obs, Rng& rng);
ParticleBelief propagate_step2(ParticleBelief b, int i, std::optional<double> revealed);
ParticleBelief resample(ParticleBelief b, Rng& rng);

double ess(std::span<const double> weights);

/// Systematic resampling indices for normalized weights.
std::vector<int> systematic_indices(std::span<const double> weights, double u);

BeliefSummary summarize(const ParticleBelief& b, const Vector& z, int i);
BeliefSummary summarize(ParticleView view, const Vector& z, int i);

struct BeliefTraceRow {
  int t = 0;
  int k = 0;
  double mean_u = 0.0;
  double std_u = 0.0;
  double ess = 0.0;
  bool resampled = false;
};

}  // namespace aomdp::smc

#include "aomdp/smc.hpp"

#include "aomdp/heartsteps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aomdp::smc {

namespace {

constexpr double kWeightFloor = 1e-300;

template <int N>
Vec<N> from_array(const std::array<double, N>& a) {
  Vec<N> v;
  for (int k = 0; k < N; ++k) v[k] = a[k];
  return v;
}

template <int N>
Vec<N> draw_block(const BlockStats<N>& s, const BlockPrior<N>& prior, double var, Rng& rng) {
  const Mat<N> prior_prec = prior.cov.inverse();
  Mat<N> prec = s.gram / var + prior_prec;
  const Vec<N> rhs = s.moment / var + prior_prec * prior.mean;
  Eigen::LLT<Mat<N>> llt(prec);
  if (llt.info() != Eigen::Success) {
    prec.diagonal().array() += kSpdJitter;
    llt.compute(prec);
    if (llt.info() != Eigen::Success) throw NumericalError("theta posterior precision is not positive definite");
  }
  const Vec<N> mean = llt.solve(rhs);
  Vec<N> z;
  for (int k = 0; k < N; ++k) z[k] = std_normal(rng);
  return mean + llt.matrixU().solve(z);
}

template <int N>
Vec<N> block_posterior_mean(const BlockStats<N>& s, const BlockPrior<N>& prior, double var) {
  const Mat<N> prior_prec = prior.cov.inverse();
  Mat<N> prec = s.gram / var + prior_prec;
  Eigen::LLT<Mat<N>> llt(prec);
  if (llt.info() != Eigen::Success) {
    prec.diagonal().array() += kSpdJitter;
    llt.compute(prec);
  }
  return llt.solve(s.moment / var + prior_prec * prior.mean);
}

template <int N>
GaussianPosterior block_posterior(const BlockStats<N>& s, const BlockPrior<N>& prior, double var) {
  return conjugate_posterior(Matrix(s.gram), Vector(s.moment), var, Vector(prior.mean), Matrix(prior.cov));
}

Vec<kDimM> m_row(const StepObservation& obs, double r_prev) {
  const double a = obs.a;
  Vec<kDimM> x;
  x << 1.0, obs.e_lag, r_prev, obs.c, a, a * obs.e_lag, a * r_prev, a * obs.c;
  return x;
}

double mean_r(const ThetaDraw& th, const StepObservation& obs, double r_prev) {
  return th.r[0] + th.r[1] * obs.m + th.r[2] * obs.e + th.r[3] * r_prev;
}

}  // namespace

SmcPrior SmcPrior::defaults() {
  using namespace aomdp::heartsteps;
  SmcPrior p;
  p.m.mean = from_array<kDimM>(kPriorMeanM);
  p.m.cov = kPriorCovScale * Mat<kDimM>::Identity();
  p.r.mean = from_array<kDimR>(kPriorMeanR);
  p.r.cov = kPriorCovScale * Mat<kDimR>::Identity();
  p.o.mean = from_array<kDimO>(kPriorMeanO);
  p.o.cov = kPriorCovScale * Mat<kDimO>::Identity();
  p.var_m = kVarM;
  p.var_r = kVarR;
  p.var_o = kVarO;
  return p;
}

GaussianPosterior theta_posterior(const SuffStats& ss, Block block, double noise_var) {
  if (!ss.prior) throw std::invalid_argument("sufficient statistics carry no prior");
  if (!(noise_var > 0.0)) throw std::invalid_argument("noise variance must be positive");
  switch (block) {
    case Block::M: return block_posterior(ss.m, ss.prior->m, noise_var);
    case Block::R: return block_posterior(ss.r, ss.prior->r, noise_var);
    case Block::O: return block_posterior(ss.o, ss.prior->o, noise_var);
  }
  throw std::invalid_argument("unknown block");
}

GaussianPosterior theta_posterior(const SuffStats& ss, Block block) {
  if (!ss.prior) throw std::invalid_argument("sufficient statistics carry no prior");
  const double var = block == Block::M ? ss.prior->var_m
                     : block == Block::R ? ss.prior->var_r
                                         : ss.prior->var_o;
  return theta_posterior(ss, block, var);
}

ThetaDraw draw_theta(const SuffStats& ss, Rng& rng) {
  const SmcPrior& p = *ss.prior;
  ThetaDraw th;
  th.m = draw_block(ss.m, p.m, p.var_m, rng);
  th.r = draw_block(ss.r, p.r, p.var_r, rng);
  th.o = draw_block(ss.o, p.o, p.var_o, rng);
  return th;
}

ThetaDraw prior_mean_theta(const SmcPrior& prior) {
  ThetaDraw th;
  th.m = prior.m.mean;
  th.r = prior.r.mean;
  th.o = prior.o.mean;
  return th;
}

ParticleBelief ParticleBelief::initialize(const SmcConfig& cfg, std::shared_ptr<const SmcPrior> prior,
                                          double o0, Rng& rng) {
  if (cfg.num_particles < 1) throw std::invalid_argument("need at least one particle");
  if (!prior) throw std::invalid_argument("missing prior");
  ParticleBelief b;
  b.cfg_ = cfg;
  b.prior_ = std::move(prior);
  const int J = cfg.num_particles;
  b.particles_.resize(J);
  b.pending_ = Pending{};
  b.pending_.active = true;
  b.pending_.initial = true;
  b.pending_.o0 = o0;
  b.pending_.ancestors.resize(J);
  b.pending_.log_w.assign(J, -std::log(static_cast<double>(J)));
  b.pending_.log_m.assign(J, 0.0);
  b.pending_.mean_r.assign(J, cfg.init_mean);

  const double sd = std::sqrt(cfg.init_var);
  for (int j = 0; j < J; ++j) {
    Particle& anc = b.pending_.ancestors[j];
    anc.stats.prior = b.prior_;
    anc.theta = cfg.pin_theta ? prior_mean_theta(*b.prior_) : draw_theta(anc.stats, rng);
    Particle p = anc;
    const double r0 = cfg.init_mean + sd * std_normal(rng);
    b.append_rows(p, anc, r0);
    p.trajectory.push_back(r0);
    b.particles_[j] = std::move(p);
  }
  b.weights_.assign(J, 1.0 / J);
  b.refresh_values();
  b.half_step_ = 1;
  b.period_ = 1;
  b.last_ess_ = J;
  return b;
}

ParticleBelief ParticleBelief::from_particles(std::vector<double> values, std::vector<double> weights,
                                              int half_step) {
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("values and weights must be non-empty and of equal length");
  ParticleBelief b;
  b.cfg_.num_particles = static_cast<int>(values.size());
  b.particles_.resize(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) b.particles_[j].trajectory.push_back(values[j]);
  b.values_ = std::move(values);
  b.weights_ = std::move(weights);
  b.half_step_ = half_step;
  b.last_ess_ = ess(b.weights_);
  return b;
}

void ParticleBelief::refresh_values() {
  values_.resize(particles_.size());
  for (std::size_t j = 0; j < particles_.size(); ++j) values_[j] = particles_[j].value();
}

void ParticleBelief::set_log_weights(const std::vector<double>& log_w) {
  const int J = static_cast<int>(log_w.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : log_w)
    if (!std::isnan(v)) mx = std::max(mx, v);
  weights_.assign(J, 0.0);
  double total = 0.0;
  if (std::isfinite(mx)) {
    for (int j = 0; j < J; ++j) {
      const double w = std::isnan(log_w[j]) ? 0.0 : std::exp(log_w[j] - mx);
      weights_[j] = w < kWeightFloor ? 0.0 : w;
      total += weights_[j];
    }
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    degenerate_ = true;
    weights_.assign(J, 1.0 / J);
    return;
  }
  for (double& w : weights_) w /= total;
}

void ParticleBelief::append_rows(Particle& p, const Particle& ancestor, double r_new) const {
  if (pending_.initial) {
    p.stats.o.add(Vec<kDimO>(1.0, r_new), pending_.o0);
    return;
  }
  const StepObservation& obs = pending_.obs;
  const double r_prev = ancestor.value();
  p.stats.m.add(m_row(obs, r_prev), obs.m);
  Vec<kDimR> xr;
  xr << 1.0, obs.m, obs.e, r_prev;
  p.stats.r.add(xr, r_new);
  p.stats.o.add(Vec<kDimO>(1.0, r_new), obs.o);
}

ThetaDraw ParticleBelief::mean_theta_draw() const {
  ThetaDraw acc;
  for (int j = 0; j < size(); ++j) {
    acc.m += weights_[j] * particles_[j].theta.m;
    acc.r += weights_[j] * particles_[j].theta.r;
    acc.o += weights_[j] * particles_[j].theta.o;
  }
  return acc;
}

Vec<kDimR> ParticleBelief::posterior_mean_theta_r() const {
  Vec<kDimR> acc = Vec<kDimR>::Zero();
  for (int j = 0; j < size(); ++j) {
    if (weights_[j] == 0.0) continue;
    const auto& st = particles_[j].stats;
    acc += weights_[j] * block_posterior_mean(st.r, st.prior->r, st.prior->var_r);
  }
  return acc;
}

double ParticleBelief::theta_r_draw_mse(const Vec<kDimR>& truth) const {
  double acc = 0.0;
  for (int j = 0; j < size(); ++j) acc += weights_[j] * (particles_[j].theta.r - truth).squaredNorm();
  return acc;
}

ParticleBelief propagate_step1(ParticleBelief b, const StepObservation& obs, Rng& rng) {
  if (b.half_step_ != 2) throw ProtocolError("propagate_step1 requires a half-step 2 belief");
  if (!b.prior_) throw ProtocolError("belief has no parameter prior");
  const SmcPrior& pr = *b.prior_;
  const int J = b.size();

  ParticleBelief::Pending pend;
  pend.active = true;
  pend.obs = obs;
  pend.log_w.resize(J);
  pend.log_m.resize(J);
  pend.mean_r.resize(J);
  b.pending_ = std::move(pend);
  auto& pd = b.pending_;

  std::vector<Particle> next(J);
  std::vector<double> log_w(J);
  const double sd_r = std::sqrt(pr.var_r);
  for (int j = 0; j < J; ++j) {
    Particle& anc = b.particles_[j];
    anc.theta = b.cfg_.pin_theta ? prior_mean_theta(pr) : draw_theta(anc.stats, rng);
    const ThetaDraw& th = anc.theta;
    const double r_prev = anc.value();
    const double lm = log_normal_pdf(obs.m, m_row(obs, r_prev).dot(th.m), pr.var_m);
    const double mr = mean_r(th, obs, r_prev);
    const double r_new = mr + sd_r * std_normal(rng);
    const double lo = log_normal_pdf(obs.o, th.o[0] + th.o[1] * r_new, pr.var_o);
    const double lw_prev = b.weights_[j] > 0.0 ? std::log(b.weights_[j])
                                               : -std::numeric_limits<double>::infinity();
    pd.log_w[j] = lw_prev;
    pd.log_m[j] = lm;
    pd.mean_r[j] = mr;
    log_w[j] = lw_prev + lm + lo;

    Particle p = anc;
    b.append_rows(p, anc, r_new);
    p.trajectory.push_back(r_new);
    next[j] = std::move(p);
  }
  pd.ancestors = std::move(b.particles_);
  b.particles_ = std::move(next);
  b.set_log_weights(log_w);
  b.refresh_values();
  b.half_step_ = 1;
  ++b.period_;
  b.last_ess_ = ess(b.weights_);
  b.last_resampled_ = false;
  if (b.last_ess_ < b.cfg_.ess_fraction * J) {
    b = resample(std::move(b), rng);
    b.last_resampled_ = true;
  }
  return b;
}

ParticleBelief propagate_step2(ParticleBelief b, int i, std::optional<double> revealed) {
  if (b.half_step_ != 1) throw ProtocolError("propagate_step2 requires a half-step 1 belief");
  if (i != 0 && i != 1) throw ProtocolError("measure action must be 0 or 1");
  if (i == 1 && !revealed) throw ProtocolError("measured half-step without a revealed value");
  b.half_step_ = 2;
  b.last_resampled_ = false;
  if (i == 0) {
    b.pending_ = ParticleBelief::Pending{};
    return b;
  }
  auto& pd = b.pending_;
  const double u = *revealed;
  if (!pd.active || pd.ancestors.empty()) {
    // No transition information available: collapse in place.
    for (auto& p : b.particles_) p.trajectory.back() = u;
    b.refresh_values();
    return b;
  }
  const int J = static_cast<int>(pd.ancestors.size());
  const double var = pd.initial ? b.cfg_.init_var : b.prior_->var_r;
  std::vector<double> log_w(J);
  std::vector<Particle> next(J);
  for (int j = 0; j < J; ++j) {
    const Particle& anc = pd.ancestors[j];
    log_w[j] = pd.log_w[j] + pd.log_m[j] + log_normal_pdf(u, pd.mean_r[j], var);
    Particle p = anc;
    b.append_rows(p, anc, u);
    p.trajectory.push_back(u);
    next[j] = std::move(p);
  }
  b.particles_ = std::move(next);
  b.pending_ = ParticleBelief::Pending{};
  b.set_log_weights(log_w);
  b.refresh_values();
  b.last_ess_ = ess(b.weights_);
  return b;
}

std::vector<int> systematic_indices(std::span<const double> weights, double u) {
  const int J = static_cast<int>(weights.size());
  std::vector<int> idx(J);
  double cum = weights[0];
  int k = 0;
  for (int n = 0; n < J; ++n) {
    const double pos = (u + n) / J;
    while (pos > cum && k < J - 1) cum += weights[++k];
    idx[n] = k;
  }
  return idx;
}

ParticleBelief resample(ParticleBelief b, Rng& rng) {
  const int J = b.size();
  ess(b.weights_);
  const auto idx = systematic_indices(b.weights_, uniform01(rng));
  std::vector<Particle> next;
  next.reserve(J);
  for (int n = 0; n < J; ++n) next.push_back(b.particles_[idx[n]]);
  b.particles_ = std::move(next);
  b.weights_.assign(J, 1.0 / J);
  b.refresh_values();
  b.last_resampled_ = true;
  return b;
}

double ess(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("empty weight vector");
  double s = 0.0, s2 = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("negative or NaN weight");
    s += w;
    s2 += w * w;
  }
  if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("weights are not normalized");
  return 1.0 / s2;
}

BeliefSummary summarize(ParticleView view, const Vector& z, int i) {
  if (view.values.empty()) throw std::invalid_argument("empty particle set");
  const double u0 = view.values[0];
  double wsum = 0.0, shift = 0.0;
  for (std::size_t j = 0; j < view.values.size(); ++j) {
    wsum += view.weights[j];
    shift += view.weights[j] * (view.values[j] - u0);
  }
  BeliefSummary s;
  s.z = z;
  s.i = i;
  s.mean_u = u0 + shift / wsum;
  double var = 0.0;
  for (std::size_t j = 0; j < view.values.size(); ++j) {
    const double d = view.values[j] - s.mean_u;
    var += view.weights[j] * d * d;
  }
  s.std_u = std::sqrt(var / wsum);
  return s;
}

BeliefSummary summarize(const ParticleBelief& b, const Vector& z, int i) {
  return summarize(b.view(), z, i);
}

}  // namespace aomdp::smc

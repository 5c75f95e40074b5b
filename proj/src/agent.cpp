#include "aomdp/agent.hpp"

namespace aomdp {

std::string to_string(AgentKind k) {
  switch (k) {
    case AgentKind::Active: return "active";
    case AgentKind::Always: return "always";
    case AgentKind::Never: return "never";
    case AgentKind::Zero: return "zero";
    case AgentKind::VanillaRlsvi: return "vanilla_rlsvi";
  }
  return "?";
}

AgentKind parse_agent_kind(const std::string& s) {
  if (s == "active") return AgentKind::Active;
  if (s == "always") return AgentKind::Always;
  if (s == "never") return AgentKind::Never;
  if (s == "zero") return AgentKind::Zero;
  if (s == "vanilla_rlsvi") return AgentKind::VanillaRlsvi;
  throw std::invalid_argument("unknown agent kind: " + s);
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  if (J < 1) throw std::invalid_argument("J must be at least 1");
  if (C < 1) throw std::invalid_argument("C must be at least 1");
  for (double v : {lambda_sigma_I, sigma2_I, lambda_sigma_A, sigma2_A})
    if (!(v > 0.0)) throw std::invalid_argument("hyperparameters must be positive");
}

nlohmann::json to_json(const AgentConfig& cfg) {
  return nlohmann::json{{"kind", to_string(cfg.kind)},
                        {"gamma", cfg.gamma},
                        {"J", cfg.J},
                        {"C", cfg.C},
                        {"lambda_sigma_I", cfg.lambda_sigma_I},
                        {"sigma2_I", cfg.sigma2_I},
                        {"lambda_sigma_A", cfg.lambda_sigma_A},
                        {"sigma2_A", cfg.sigma2_A},
                        {"reward_design", cfg.reward_design},
                        {"incremental_targets", cfg.incremental_targets}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig c) {
  if (j.contains("kind")) c.kind = parse_agent_kind(j["kind"].get<std::string>());
  if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
  if (j.contains("J")) c.J = j["J"].get<int>();
  if (j.contains("C")) c.C = j["C"].get<int>();
  if (j.contains("lambda_sigma_I")) c.lambda_sigma_I = j["lambda_sigma_I"].get<double>();
  if (j.contains("sigma2_I")) c.sigma2_I = j["sigma2_I"].get<double>();
  if (j.contains("lambda_sigma_A")) c.lambda_sigma_A = j["lambda_sigma_A"].get<double>();
  if (j.contains("sigma2_A")) c.sigma2_A = j["sigma2_A"].get<double>();
  if (j.contains("reward_design")) c.reward_design = j["reward_design"].get<bool>();
  if (j.contains("incremental_targets")) c.incremental_targets = j["incremental_targets"].get<bool>();
  c.validate();
  return c;
}

MeasureAgent::MeasureAgent(AgentConfig cfg, std::shared_ptr<const smc::SmcPrior> prior,
                           std::uint64_t smc_seed, std::uint64_t agent_seed)
    : cfg_(cfg), prior_(std::move(prior)), smc_rng_(smc_seed), agent_rng_(agent_seed) {
  cfg_.validate();
  if (!prior_) prior_ = std::make_shared<smc::SmcPrior>(smc::SmcPrior::defaults());
  q_ = rlsvi::QWeights::zeros(basis());
  post_I_ = rlsvi::blr_prior(rlsvi::kDimI, rlsvi::BlrHyper::from_product(cfg_.lambda_sigma_I, cfg_.sigma2_I));
  const int da = rlsvi::control_dim(basis());
  post_A_ = rlsvi::blr_prior(da, rlsvi::BlrHyper::from_product(cfg_.lambda_sigma_A, cfg_.sigma2_A));
  gram_I_ = Matrix::Zero(rlsvi::kDimI, rlsvi::kDimI);
  gram_A_ = Matrix::Zero(da, da);
}

rlsvi::ControlBasis MeasureAgent::basis() const {
  return cfg_.kind == AgentKind::Active ? rlsvi::ControlBasis::Active : rlsvi::ControlBasis::Baseline;
}

void MeasureAgent::start_period(const Vector& z) {
  PeriodLog log;
  log.m_prev = z[0];
  log.e_prev = z[1];
  log.s1 = smc::summarize(belief_, z, 0);
  log.values1.assign(belief_.values().begin(), belief_.values().end());
  log.weights1.assign(belief_.weights().begin(), belief_.weights().end());
  logs_.push_back(std::move(log));
}

void MeasureAgent::begin(const PeriodObservation& first) {
  if (t_ != 0) throw ProtocolError("agent already started");
  smc::SmcConfig sc;
  sc.num_particles = cfg_.J;
  belief_ = smc::ParticleBelief::initialize(sc, prior_, first.o[0], smc_rng_);
  t_ = 1;
  start_period(first.z);
}

int MeasureAgent::choose_measure() {
  if (t_ < 1) throw ProtocolError("agent not started");
  switch (cfg_.kind) {
    case AgentKind::Active: return rlsvi::act_measure(logs_.back().s1, q_.beta_I, t_);
    case AgentKind::Always: return 1;
    default: return 0;
  }
}

void MeasureAgent::observe_measurement(int i, const std::optional<Vector>& revealed) {
  std::optional<double> u;
  if (revealed) u = (*revealed)[0];
  belief_ = smc::propagate_step2(std::move(belief_), i, u);
  auto& log = logs_.back();
  log.i = i;
  log.s2 = smc::summarize(belief_, log.s1.z, i);
}

void MeasureAgent::update_measure_weights() {
  const auto& cur = logs_.back();
  const Vector x = rlsvi::phi_I(cur.s1, cur.i);
  gram_I_.noalias() += x * x.transpose();
  rows_I_.push_back(x);

  auto target = [&](const PeriodLog& l) {
    return rlsvi::target_measure(ParticleView{l.values1, l.weights1}, l.e_prev, l.context, l.i,
                                 q_.beta_A, q_.beta_A_target, cfg_.gamma);
  };
  if (cfg_.incremental_targets) {
    y_I_.push_back(target(cur));
  } else {
    y_I_.resize(logs_.size());
    for (std::size_t l = 0; l < logs_.size(); ++l) y_I_[l] = target(logs_[l]);
  }
  Vector moment = Vector::Zero(rlsvi::kDimI);
  for (std::size_t l = 0; l < rows_I_.size(); ++l) moment.noalias() += rows_I_[l] * y_I_[l];
  post_I_ = rlsvi::blr_from_moments(std::move(post_I_), gram_I_, moment);
  q_.beta_I = rlsvi::sample_beta(post_I_, agent_rng_);
}

void MeasureAgent::update_control_weights() {
  const auto b = basis();
  const std::size_t n = logs_.size() - 1;  // periods with a post-measure successor
  if (n >= 1) {
    const auto& l = logs_[n - 1];
    const Vector x = rlsvi::phi_A(l.s2, l.context, l.a, b);
    gram_A_.noalias() += x * x.transpose();
    rows_A_.push_back(x);
  }
  const Vector& select = cfg_.kind == AgentKind::VanillaRlsvi ? q_.beta_A : q_.beta_A_target;
  auto target = [&](std::size_t l) {
    const auto& next = logs_[l + 1];
    return rlsvi::target_control(logs_[l].reward_hat, next.s2, next.context, q_.beta_A, select,
                                 cfg_.gamma, b);
  };
  if (cfg_.incremental_targets) {
    if (n >= 1) y_A_.push_back(target(n - 1));
  } else {
    y_A_.resize(n);
    for (std::size_t l = 0; l < n; ++l) y_A_[l] = target(l);
  }
  Vector moment = Vector::Zero(rlsvi::control_dim(b));
  for (std::size_t l = 0; l < rows_A_.size(); ++l) moment.noalias() += rows_A_[l] * y_A_[l];
  post_A_ = rlsvi::blr_from_moments(std::move(post_A_), gram_A_, moment);
  q_.beta_A = rlsvi::sample_beta(post_A_, agent_rng_);
  q_.after_control_draw(cfg_.C);
}

int MeasureAgent::choose_control(double context) {
  auto& log = logs_.back();
  log.context = context;
  if (!learns()) {
    log.a = 0;
    return 0;
  }
  if (cfg_.kind == AgentKind::Active) update_measure_weights();
  update_control_weights();
  log.a = rlsvi::act_control(log.s2, context, q_.beta_A, t_, agent_rng_, basis());
  return log.a;
}

void MeasureAgent::observe_transition(const PeriodObservation& next) {
  auto& log = logs_.back();
  smc::StepObservation obs;
  obs.m = next.z[0];
  obs.e = next.z[1];
  obs.o = next.o[0];
  obs.e_lag = log.e_prev;
  obs.c = log.context;
  obs.i = log.i;
  obs.a = log.a;
  belief_ = smc::propagate_step1(std::move(belief_), obs, smc_rng_);
  if (cfg_.reward_design) {
    const Eigen::Vector4d th = belief_.mean_theta_draw().r;
    log.reward_hat = rlsvi::designed_reward(th, obs.m, obs.e, log.s2.mean_u);
  } else {
    log.reward_hat = smc::summarize(belief_, next.z, 0).mean_u;
  }
  log.reward_known = true;
  ++t_;
  start_period(next.z);
}

double MeasureAgent::reward_estimate(int period) const {
  const auto& log = logs_.at(period - 1);
  if (!log.reward_known) throw ProtocolError("reward of an unfinished period");
  return log.reward_hat;
}

}  // namespace aomdp

#include "aomdp/heartsteps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace aomdp::heartsteps {

std::string to_string(PositiveLevel v) {
  switch (v) {
    case PositiveLevel::Minimal: return "minimal";
    case PositiveLevel::Small: return "small";
    case PositiveLevel::Medium: return "medium";
  }
  return "?";
}

std::string to_string(NegativeLevel v) {
  switch (v) {
    case NegativeLevel::Zero: return "zero";
    case NegativeLevel::Minimal: return "minimal";
    case NegativeLevel::Small: return "small";
  }
  return "?";
}

std::string to_string(ModelVariant v) {
  return v == ModelVariant::Mediated ? "mediated" : "general";
}

PositiveLevel parse_positive_level(const std::string& s) {
  if (s == "minimal") return PositiveLevel::Minimal;
  if (s == "small") return PositiveLevel::Small;
  if (s == "medium") return PositiveLevel::Medium;
  throw std::invalid_argument("unknown positive_level: " + s);
}

NegativeLevel parse_negative_level(const std::string& s) {
  if (s == "zero") return NegativeLevel::Zero;
  if (s == "minimal") return NegativeLevel::Minimal;
  if (s == "small") return NegativeLevel::Small;
  throw std::invalid_argument("unknown negative_level: " + s);
}

ModelVariant parse_model_variant(const std::string& s) {
  if (s == "mediated") return ModelVariant::Mediated;
  if (s == "general") return ModelVariant::General;
  throw std::invalid_argument("unknown model_variant: " + s);
}

namespace {

bool all_finite(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

std::array<double, 8> design_row(double e_prev, double r_prev, double c, int a) {
  const double av = a;
  return {1.0, e_prev, r_prev, c, av, av * e_prev, av * r_prev, av * c};
}

double dot8(const std::array<double, 8>& w, const std::array<double, 8>& x) {
  double s = 0.0;
  for (int k = 0; k < 8; ++k) s += w[k] * x[k];
  return s;
}

// E[h(X)] for X ~ N(mu, sd^2) by the trapezoid rule on a wide standardized grid.
template <class F>
double normal_expectation(F h, double mu, double sd) {
  constexpr int n = 20001;
  constexpr double lim = 10.0;
  const double dz = 2.0 * lim / (n - 1);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = -lim + k * dz;
    const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    acc += w * h(mu + sd * z) * std::exp(-0.5 * z * z);
  }
  return acc * dz / std::sqrt(2.0 * std::numbers::pi);
}

double positive_ratio(double theta_r_m) {
  return theta_r_m / std::sqrt(kVarR + kVarM * theta_r_m * theta_r_m);
}

double negative_ratio(double theta_r_e) {
  const double y = std::max(theta_r_e, kMinEngagementEffect);
  return y / std::sqrt(kVarR + kVarE * y * y);
}

TestbedCalibration solve_calibration() {
  TestbedCalibration cal;
  const double sd = kUserDispersion;
  auto mean_pos = [&](double mu) { return normal_expectation(positive_ratio, mu, sd); };

  double lo = 0.0, hi = 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * mean_pos(mid) < kTargetPositiveSmall) lo = mid; else hi = mid;
  }
  cal.theta_r_m_mean = 0.5 * (lo + hi);
  const double ef = mean_pos(cal.theta_r_m_mean);
  cal.theta_m6_base_mean = kTargetPositiveMinimal / ef;
  cal.expected_positive[0] = cal.theta_m6_base_mean * ef;
  cal.expected_positive[1] = 0.5 * ef;
  cal.expected_positive[2] = 0.8 * ef;

  const double eg = normal_expectation(negative_ratio, kPriorMeanR[2], sd);
  cal.theta_e_measure_minimal = -kTargetNegativeMinimal / eg;
  cal.theta_e_measure_small = -kTargetNegativeSmall / eg;
  cal.expected_negative[0] = 0.0;
  cal.expected_negative[1] = cal.theta_e_measure_minimal * eg;
  cal.expected_negative[2] = cal.theta_e_measure_small * eg;
  return cal;
}

}  // namespace

void UserParams::validate() const {
  for (double v : {var.c, var.m, var.e, var.r, var.o})
    if (!(v >= 0.0)) throw std::invalid_argument("noise variances must be nonnegative");
  if (theta_r[2] < kMinEngagementEffect - 1e-15)
    throw std::invalid_argument("E coefficient of the R block is below the clip value");
  if (general) {
    for (double v : {general->var_e, general->var_r, general->var_o})
      if (!(v >= 0.0)) throw std::invalid_argument("noise variances must be nonnegative");
  }
}

void ScenarioConfig::validate() const {
  if (horizon < 2) throw std::invalid_argument("horizon must be at least 2");
  if (n_users < 1) throw std::invalid_argument("n_users must be at least 1");
}

std::string ScenarioConfig::label() const {
  std::string s = to_string(positive_level) + "+_" + to_string(negative_level) + "-";
  if (!emission_informative) s += "_zeroO";
  if (model_variant == ModelVariant::General) s += "_general";
  return s;
}

double draw_context(const UserParams& p, double eps_c) {
  return p.theta_c + std::sqrt(p.var.c) * eps_c;
}

Transition step_dynamics(const UserParams& p, const EnvState& s, int i, int a, double c,
                         const NoiseDraw& eps) {
  if ((i != 0 && i != 1) || (a != 0 && a != 1)) throw std::invalid_argument("actions must be 0 or 1");
  Transition out;
  out.c = c;
  const auto x = design_row(s.e_prev, s.r_prev, c, a);
  out.m = dot8(p.theta_m, x) + std::sqrt(p.var.m) * eps.m;

  if (p.general) {
    const GeneralModel& g = *p.general;
    out.e = dot8(g.e, x) + g.e_measure * i + g.e_measure_x_lag * i * s.e_prev +
            std::sqrt(g.var_e) * eps.e;
    out.r = dot8(g.r, x) + std::sqrt(g.var_r) * eps.r;
    out.o = dot8(g.o, x) + std::sqrt(g.var_o) * eps.o;
  } else {
    const auto& te = p.theta_e;
    out.e = te.base[0] + te.base[1] * s.e_prev + te.base[2] * a + te.base[3] * a * s.e_prev +
            te.measure * i + te.measure_x_lag * i * s.e_prev + std::sqrt(p.var.e) * eps.e;
    out.r = p.theta_r[0] + p.theta_r[1] * out.m + p.theta_r[2] * out.e + p.theta_r[3] * s.r_prev +
            std::sqrt(p.var.r) * eps.r;
    out.o = p.theta_o[0] + p.theta_o[1] * out.r + std::sqrt(p.var.o) * eps.o;
  }
  if (!all_finite({out.c, out.m, out.e, out.r, out.o}))
    throw NumericalError("non-finite value in testbed dynamics");
  return out;
}

Transition step_dynamics(const UserParams& p, const EnvState& s, int i, int a, Rng& rng) {
  NoiseDraw eps;
  eps.c = std_normal(rng);
  eps.m = std_normal(rng);
  eps.e = std_normal(rng);
  eps.r = std_normal(rng);
  eps.o = std_normal(rng);
  return step_dynamics(p, s, i, a, draw_context(p, eps.c), eps);
}

double positive_effect_size(const UserParams& p) {
  const double b = p.theta_r[1];
  const double den = std::sqrt(p.var.r + p.var.m * b * b);
  if (!(den > 0.0)) throw std::domain_error("positive effect size has a zero denominator");
  return p.theta_m[6] * b / den;
}

double negative_effect_size(const UserParams& p) {
  const double b = p.theta_r[2];
  const double den = std::sqrt(p.var.r + p.var.e * b * b);
  if (!(den > 0.0)) throw std::domain_error("negative effect size has a zero denominator");
  return p.theta_e.measure * b / den;
}

const TestbedCalibration& testbed_calibration() {
  static const TestbedCalibration cal = solve_calibration();
  return cal;
}

UserParams population_mean_params() {
  const auto& cal = testbed_calibration();
  UserParams p;
  p.theta_c = 0.0;
  p.theta_m = kPriorMeanM;
  p.theta_m[6] = cal.theta_m6_base_mean;
  p.theta_e.base = kEngagementMean;
  p.theta_r = kPriorMeanR;
  p.theta_r[1] = cal.theta_r_m_mean;
  p.theta_o = kPriorMeanO;
  return p;
}

GeneralModel reduced_form(const UserParams& p) {
  GeneralModel g;
  const auto& te = p.theta_e.base;
  g.e = {te[0], te[1], 0.0, 0.0, te[2], te[3], 0.0, 0.0};
  const double rm = p.theta_r[1], re = p.theta_r[2];
  for (int k = 0; k < 8; ++k) g.r[k] = rm * p.theta_m[k] + re * g.e[k];
  g.r[0] += p.theta_r[0];
  g.r[2] += p.theta_r[3];
  for (int k = 0; k < 8; ++k) g.o[k] = p.theta_o[1] * g.r[k];
  g.o[0] += p.theta_o[0];
  g.e_measure = kGeneralMeasure;
  g.e_measure_x_lag = kMeasureXLag;
  g.var_e = p.var.e;
  g.var_r = p.var.r + rm * rm * p.var.m + re * re * p.var.e;
  g.var_o = p.var.o + p.theta_o[1] * p.theta_o[1] * g.var_r;
  return g;
}

UserParams calibrate_scenario(UserParams p, const ScenarioConfig& cfg) {
  const auto& cal = testbed_calibration();
  switch (cfg.positive_level) {
    case PositiveLevel::Minimal: break;
    case PositiveLevel::Small: p.theta_m[6] = 0.5; break;
    case PositiveLevel::Medium: p.theta_m[6] = 0.8; break;
  }
  switch (cfg.negative_level) {
    case NegativeLevel::Zero:
      p.theta_e.measure = 0.0;
      p.theta_e.measure_x_lag = 0.0;
      break;
    case NegativeLevel::Minimal:
      p.theta_e.measure = cal.theta_e_measure_minimal;
      p.theta_e.measure_x_lag = kMeasureXLag;
      break;
    case NegativeLevel::Small:
      p.theta_e.measure = cal.theta_e_measure_small;
      p.theta_e.measure_x_lag = kMeasureXLag;
      break;
  }
  if (!cfg.emission_informative) p.theta_o[1] = 0.0;
  p.theta_r[2] = std::max(p.theta_r[2], kMinEngagementEffect);

  const double via_m = p.theta_r[1] * std::max(p.theta_m[2], p.theta_m[2] + p.theta_m[6]);
  if (p.theta_r[3] + via_m > kMaxPersistence) p.theta_r[3] = kMaxPersistence - via_m;

  if (cfg.model_variant == ModelVariant::General) p.general = reduced_form(p);
  else p.general.reset();
  return p;
}

std::vector<UserParams> generate_base_users(int n_users, Rng& rng) {
  const UserParams mean = population_mean_params();
  const double sd = kUserDispersion;
  std::vector<UserParams> users;
  users.reserve(n_users);
  for (int u = 0; u < n_users; ++u) {
    UserParams p = mean;
    for (auto& v : p.theta_m) v += sd * std_normal(rng);
    for (auto& v : p.theta_e.base) v += sd * std_normal(rng);
    for (auto& v : p.theta_r) v += sd * std_normal(rng);
    for (auto& v : p.theta_o) v += sd * std_normal(rng);
    users.push_back(p);
  }
  return users;
}

std::vector<UserParams> generate_users(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  auto users = generate_base_users(cfg.n_users, rng);
  for (auto& p : users) p = calibrate_scenario(p, cfg);
  return users;
}

std::vector<UserParams> generate_users(const ScenarioConfig& cfg) {
  Rng rng(stream_seed(cfg.seed, 0, 0, 0, StreamPurpose::Users));
  return generate_users(cfg, rng);
}

HeartStepsEnv::HeartStepsEnv(UserParams params, double gamma) : params_(std::move(params)) {
  params_.validate();
  spec_.observed_state_dim = 2;
  spec_.latent_state_dim = 1;
  spec_.emission_dim = 1;
  spec_.gamma = gamma;
  spec_.validate();
}

PeriodObservation HeartStepsEnv::reset(std::uint64_t seed) {
  rng_.seed(seed);
  state_ = EnvState{};
  state_.e_prev = std_normal(rng_);
  state_.r_prev = std_normal(rng_);
  const double o0 = params_.theta_o[0] + params_.theta_o[1] * state_.r_prev +
                    std::sqrt(params_.var.o) * std_normal(rng_);
  last_ = Transition{0.0, 0.0, state_.e_prev, state_.r_prev, o0};
  state_.t = 1;
  phase_ = Phase::Measure;
  PeriodObservation obs;
  obs.z = Vector{{0.0, state_.e_prev}};
  obs.o = Vector{{o0}};
  return obs;
}

std::optional<Vector> HeartStepsEnv::step_measure(int i) {
  if (phase_ != Phase::Measure) throw ProtocolError("step_measure called out of order");
  if (i != 0 && i != 1) throw std::invalid_argument("measure action must be 0 or 1");
  i_ = i;
  phase_ = Phase::Context;
  if (i == 1) return Vector{{state_.r_prev}};
  return std::nullopt;
}

Vector HeartStepsEnv::observe_context() {
  if (phase_ != Phase::Context) throw ProtocolError("observe_context called out of order");
  c_ = draw_context(params_, std_normal(rng_));
  phase_ = Phase::Control;
  return Vector{{c_}};
}

ControlOutcome HeartStepsEnv::step_control(int a) {
  if (phase_ != Phase::Control) throw ProtocolError("step_control called before measure/context");
  NoiseDraw eps;
  eps.m = std_normal(rng_);
  eps.e = std_normal(rng_);
  eps.r = std_normal(rng_);
  eps.o = std_normal(rng_);
  last_ = step_dynamics(params_, state_, i_, a, c_, eps);
  state_.e_prev = last_.e;
  state_.r_prev = last_.r;
  ++state_.t;
  phase_ = Phase::Measure;
  ControlOutcome out;
  out.next.z = Vector{{last_.m, last_.e}};
  out.next.o = Vector{{last_.o}};
  out.latent_reward = last_.r;
  return out;
}

}  // namespace aomdp::heartsteps

#pragma once

#include "aomdp/core.hpp"
#include "aomdp/rng.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace aomdp::heartsteps {

enum class PositiveLevel { Minimal, Small, Medium };
enum class NegativeLevel { Zero, Minimal, Small };
enum class ModelVariant { Mediated, General };

std::string to_string(PositiveLevel v);
std::string to_string(NegativeLevel v);
std::string to_string(ModelVariant v);
PositiveLevel parse_positive_level(const std::string& s);
NegativeLevel parse_negative_level(const std::string& s);
ModelVariant parse_model_variant(const std::string& s);

// Prior means of the working model blocks.
inline constexpr std::array<double, 8> kPriorMeanM{-0.043, -0.026, 0.062, 0.418, 0.001, 0.003, -0.035, 0.011};
inline constexpr std::array<double, 4> kPriorMeanR{-0.005, 0.029, 0.012, 0.861};
inline constexpr std::array<double, 2> kPriorMeanO{0.034, 0.534};
inline constexpr double kPriorCovScale = 0.01;

inline constexpr double kVarM = 0.972;
inline constexpr double kVarR = 0.240;
inline constexpr double kVarO = 0.637;
inline constexpr double kVarC = 1.0;
inline constexpr double kVarE = 0.64;

// Engagement block: intercept, E lag, A, A * E lag.
inline constexpr std::array<double, 4> kEngagementMean{0.0, 0.6, -0.05, 0.0};

inline constexpr double kUserDispersion = 0.05;
inline constexpr double kMinEngagementEffect = 0.02;
inline constexpr double kMaxPersistence = 0.99;
inline constexpr double kMeasureXLag = 0.01;
inline constexpr double kGeneralMeasure = -0.1;

inline constexpr double kTargetPositiveMinimal = 0.026;
inline constexpr double kTargetPositiveSmall = 0.119;
inline constexpr double kTargetPositiveMedium = 0.191;
inline constexpr double kTargetNegativeMinimal = 0.010;
inline constexpr double kTargetNegativeSmall = 0.039;

struct NoiseVariances {
  double c = kVarC;
  double m = kVarM;
  double e = kVarE;
  double r = kVarR;
  double o = kVarO;
};

struct EngagementCoefs {
  std::array<double, 4> base{};
  double measure = 0.0;
  double measure_x_lag = 0.0;
};

/// Unmediated transition block; every row is over
/// [1, E_prev, R_prev, C, A, A*E_prev, A*R_prev, A*C].
struct GeneralModel {
  std::array<double, 8> e{};
  std::array<double, 8> r{};
  std::array<double, 8> o{};
  double e_measure = 0.0;
  double e_measure_x_lag = 0.0;
  double var_e = 0.0;
  double var_r = 0.0;
  double var_o = 0.0;
};

struct UserParams {
  double theta_c = 0.0;
  std::array<double, 8> theta_m{};
  EngagementCoefs theta_e;
  std::array<double, 4> theta_r{};  // intercept, M, E, R lag
  std::array<double, 2> theta_o{};
  NoiseVariances var;
  std::optional<GeneralModel> general;

  void validate() const;
};

struct ScenarioConfig {
  PositiveLevel positive_level = PositiveLevel::Minimal;
  NegativeLevel negative_level = NegativeLevel::Zero;
  bool emission_informative = true;
  ModelVariant model_variant = ModelVariant::Mediated;
  int n_users = 42;
  int horizon = 100;
  std::uint64_t seed = 0;

  void validate() const;
  std::string label() const;
};

struct EnvState {
  double e_prev = 0.0;
  double r_prev = 0.0;
  int t = 0;
};

struct Transition {
  double c = 0.0;
  double m = 0.0;
  double e = 0.0;
  double r = 0.0;
  double o = 0.0;
};

/// Standard normal innovations, one per equation.
struct NoiseDraw {
  double c = 0.0;
  double m = 0.0;
  double e = 0.0;
  double r = 0.0;
  double o = 0.0;
};

double draw_context(const UserParams& p, double eps_c);

Transition step_dynamics(const UserParams& p, const EnvState& s, int i, int a, double c,
                         const NoiseDraw& eps);
Transition step_dynamics(const UserParams& p, const EnvState& s, int i, int a, Rng& rng);

double positive_effect_size(const UserParams& p);
double negative_effect_size(const UserParams& p);

/// Population-level constants solved so that generated users hit the effect-size targets.
struct TestbedCalibration {
  double theta_r_m_mean = 0.0;
  double theta_m6_base_mean = 0.0;
  double theta_e_measure_minimal = 0.0;
  double theta_e_measure_small = 0.0;
  double expected_positive[3]{};
  double expected_negative[3]{};
};

const TestbedCalibration& testbed_calibration();

UserParams population_mean_params();
GeneralModel reduced_form(const UserParams& p);
UserParams calibrate_scenario(UserParams base, const ScenarioConfig& cfg);

/// Uncalibrated draws around the population means.
std::vector<UserParams> generate_base_users(int n_users, Rng& rng);
std::vector<UserParams> generate_users(const ScenarioConfig& cfg, Rng& rng);
std::vector<UserParams> generate_users(const ScenarioConfig& cfg);

class HeartStepsEnv : public Environment {
public:
  explicit HeartStepsEnv(UserParams params, double gamma = 0.9);

  const AomdpSpec& spec() const override { return spec_; }
  PeriodObservation reset(std::uint64_t seed) override;
  std::optional<Vector> step_measure(int i) override;
  Vector observe_context() override;
  ControlOutcome step_control(int a) override;

  const UserParams& params() const { return params_; }
  const EnvState& state() const { return state_; }
  const Transition& last_transition() const { return last_; }

private:
  enum class Phase { Unstarted, Measure, Context, Control };

  UserParams params_;
  AomdpSpec spec_;
  Rng rng_;
  EnvState state_;
  Transition last_;
  Phase phase_ = Phase::Unstarted;
  int i_ = 0;
  double c_ = 0.0;
};

}  // namespace aomdp::heartsteps

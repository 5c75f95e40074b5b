#pragma once

#include "aomdp/core.hpp"
#include "aomdp/rlsvi.hpp"
#include "aomdp/smc.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace aomdp {

enum class AgentKind { Active, Always, Never, Zero, VanillaRlsvi };

std::string to_string(AgentKind k);
AgentKind parse_agent_kind(const std::string& s);

struct AgentConfig {
  AgentKind kind = AgentKind::Active;
  double gamma = 0.9;
  int J = 50;
  int C = 10;
  double lambda_sigma_I = 0.2;
  double sigma2_I = 0.02;
  double lambda_sigma_A = 5.0;
  double sigma2_A = 0.02;
  bool reward_design = true;
  bool incremental_targets = false;

  void validate() const;
};

nlohmann::json to_json(const AgentConfig& cfg);
/// Reads the agent block; missing keys keep their defaults.
AgentConfig agent_config_from_json(const nlohmann::json& j, AgentConfig base = {});

/// Measurement/control agent for the testbed: particle belief over R_{t-1}, RLSVI Q-weights.
class MeasureAgent {
public:
  MeasureAgent(AgentConfig cfg, std::shared_ptr<const smc::SmcPrior> prior, std::uint64_t smc_seed,
               std::uint64_t agent_seed);

  void begin(const PeriodObservation& first);
  int choose_measure();
  void observe_measurement(int i, const std::optional<Vector>& revealed);
  int choose_control(double context);
  void observe_transition(const PeriodObservation& next);

  int period() const { return t_; }
  const AgentConfig& config() const { return cfg_; }
  const smc::ParticleBelief& belief() const { return belief_; }
  const rlsvi::QWeights& weights() const { return q_; }
  const BeliefSummary& summary_step1() const { return logs_.back().s1; }
  const BeliefSummary& summary_step2() const { return logs_.back().s2; }
  /// Reward estimate of a completed period (1-based).
  double reward_estimate(int period) const;

  struct PeriodLog {
    double m_prev = 0.0;
    double e_prev = 0.0;
    BeliefSummary s1;
    std::vector<double> values1;
    std::vector<double> weights1;
    int i = 0;
    BeliefSummary s2;
    double context = 0.0;
    int a = 0;
    double reward_hat = 0.0;
    bool reward_known = false;
  };

  const PeriodLog& period_log(int period) const { return logs_.at(period - 1); }

private:
  bool learns() const { return cfg_.kind != AgentKind::Zero; }
  rlsvi::ControlBasis basis() const;
  void start_period(const Vector& z);
  void update_measure_weights();
  void update_control_weights();

  AgentConfig cfg_;
  std::shared_ptr<const smc::SmcPrior> prior_;
  Rng smc_rng_;
  Rng agent_rng_;
  smc::ParticleBelief belief_;
  rlsvi::QWeights q_;
  rlsvi::QPosterior post_I_;
  rlsvi::QPosterior post_A_;
  Matrix gram_I_, gram_A_;
  std::vector<Vector> rows_I_, rows_A_;
  std::vector<double> y_I_, y_A_;
  std::vector<PeriodLog> logs_;
  int t_ = 0;
};

}  // namespace aomdp

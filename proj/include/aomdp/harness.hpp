#pragma once

#include "aomdp/agent.hpp"
#include "aomdp/heartsteps.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace aomdp::harness {

struct StepRecord {
  std::string agent;
  int user = 0;
  int rep = 0;
  int t = 0;
  int I = 0;
  int A = 0;
  double C = 0.0;
  double M = 0.0;
  double E = 0.0;
  double O = 0.0;
  double R_true = 0.0;
  double R_hat = 0.0;
  double belief_mean_1 = 0.0;
  double belief_std_1 = 0.0;
  double belief_mean_2 = 0.0;
  double belief_std_2 = 0.0;
  double ess = 0.0;
  double cum_reward = 0.0;
  double theta_r_mse = 0.0;        // particle-averaged |theta_R draw - truth|^2
  double theta_r_mean_sqerr = 0.0;  // |posterior mean of theta_R - truth|^2
};

struct EpisodeSeeds {
  std::uint64_t env = 0;
  std::uint64_t smc = 0;
  std::uint64_t agent = 0;
};

EpisodeSeeds episode_seeds(std::uint64_t root, int user, int rep, AgentKind kind);

std::vector<StepRecord> run_episode(const heartsteps::UserParams& user, const AgentConfig& cfg,
                                    int horizon, const EpisodeSeeds& seeds, int user_index = 0,
                                    int rep = 0);

struct Stat {
  double mean = 0.0;
  double sd = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Mean, sample sd and the normal-approximation 95% interval mean +- 1.96 sd / sqrt(n).
Stat mean_ci(const std::vector<double>& xs);

struct SummaryRow {
  std::string agent;
  int t = 0;
  int n_reps = 0;
  Stat adjusted_reward;
  Stat measure_rate;
  Stat theta_mse;
};

/// Per (agent, t) statistics over reps of user-averaged quantities. The adjusted reward
/// subtracts the zero policy's user-averaged cumulative reward of the same rep.
std::vector<SummaryRow> aggregate(const std::vector<StepRecord>& records, bool require_adjusted = true);

void write_steps_csv(std::ostream& os, const std::vector<StepRecord>& records);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows);

struct RunPlan {
  heartsteps::ScenarioConfig scenario;
  AgentConfig agent;
  std::vector<AgentKind> agents;
  int reps = 50;
  std::filesystem::path output_dir = "out";
  int workers = 1;

  void validate() const;
  static RunPlan desk();
};

nlohmann::json to_json(const RunPlan& plan);
RunPlan plan_from_json(const nlohmann::json& j);

struct JobError {
  std::string agent;
  int user = 0;
  int rep = 0;
  std::string message;
};

struct PlanResult {
  std::vector<StepRecord> records;
  std::vector<SummaryRow> summary;
  std::vector<JobError> errors;
};

/// Runs every (agent, user, rep) episode; results do not depend on the worker count.
PlanResult execute_plan(const RunPlan& plan, const std::vector<heartsteps::UserParams>& users);
PlanResult execute_plan(const RunPlan& plan);

/// Writes steps.csv, summary.csv, manifest.json and, on failures, errors.log.
void write_outputs(const RunPlan& plan, const PlanResult& result);

}  // namespace aomdp::harness

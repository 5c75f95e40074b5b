#include "aomdp/harness.hpp"
#include "aomdp/heartsteps_io.hpp"
#include "aomdp/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace hs = aomdp::heartsteps;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t seed_override(std::uint64_t seed) {
  if (const char* s = std::getenv("AOMDP_LAB_SEED")) return std::stoull(s);
  return seed;
}

int cmd_simulate(const std::string& plan_path, bool desk, const std::string& out, int workers) {
  aomdp::harness::RunPlan plan;
  if (desk) {
    plan = aomdp::harness::RunPlan::desk();
    if (!plan_path.empty()) {
      const json j = hs::read_json_file(plan_path);
      auto p = aomdp::harness::plan_from_json(j);
      plan.scenario.positive_level = p.scenario.positive_level;
      plan.scenario.negative_level = p.scenario.negative_level;
      plan.scenario.emission_informative = p.scenario.emission_informative;
      plan.scenario.model_variant = p.scenario.model_variant;
      plan.scenario.seed = p.scenario.seed;
      plan.agent = p.agent;
      if (!p.agents.empty()) plan.agents = p.agents;
      plan.output_dir = p.output_dir;
      plan.workers = p.workers;
    }
  } else {
    plan = aomdp::harness::plan_from_json(hs::read_json_file(plan_path));
  }
  if (!out.empty()) plan.output_dir = out;
  if (workers > 0) plan.workers = workers;
  plan.scenario.seed = seed_override(plan.scenario.seed);
  try {
    plan.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid plan: " << e.what() << '\n';
    return 1;
  }
  const auto result = aomdp::harness::execute_plan(plan);
  aomdp::harness::write_outputs(plan, result);
  std::cout << "wrote " << result.records.size() << " step rows to " << plan.output_dir.string() << '\n';
  if (!result.errors.empty()) {
    std::cerr << result.errors.size() << " episode(s) failed; see errors.log\n";
    return 2;
  }
  return 0;
}

int cmd_gen_users(const std::string& scenario_path, const std::string& out) {
  auto cfg = hs::scenario_from_json(hs::read_json_file(scenario_path));
  cfg.seed = seed_override(cfg.seed);
  hs::write_users(out, hs::generate_users(cfg));
  std::cout << "wrote " << cfg.n_users << " users to " << out << '\n';
  return 0;
}

int cmd_calibrate(const std::string& scenario_path) {
  auto cfg = hs::scenario_from_json(hs::read_json_file(scenario_path));
  cfg.seed = seed_override(cfg.seed);
  const auto users = hs::generate_users(cfg);
  double pos = 0.0, neg = 0.0;
  for (const auto& u : users) {
    pos += hs::positive_effect_size(u);
    neg += hs::negative_effect_size(u);
  }
  const auto& cal = hs::testbed_calibration();
  json j{{"scenario", cfg.label()},
         {"n_users", users.size()},
         {"positive_effect", pos / users.size()},
         {"negative_effect", neg / users.size()},
         {"theta_r_m_mean", cal.theta_r_m_mean},
         {"theta_m6_base_mean", cal.theta_m6_base_mean}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_oracle(const std::string& out, std::uint64_t seed, int instances, int grid) {
  namespace orc = aomdp::oracle;
  aomdp::Rng rng(seed_override(seed));
  json revealing = json::array();
  for (int k = 0; k < instances; ++k) {
    const auto env = orc::TabularAomdp::random(rng, 1, 2, 2, 2, 0.9, true);
    revealing.push_back({{"measure", orc::weakly_revealing_sigma(env, 2, true)},
                         {"no_measure", orc::weakly_revealing_sigma(env, 2, false)}});
  }
  json advantage = json::array();
  const orc::BeliefGrid g(2, grid);
  for (int k = 0; k < 2; ++k) {
    const auto env = orc::TabularAomdp::random(rng, 1, 2, 2, 2, 0.9, true, k == 1);
    const auto v = orc::belief_value_iteration(env, g, 1e-12);
    double max_gap = 0.0, min_adv = 1e300;
    for (int p = 0; p < g.size(); ++p) {
      const auto parts = orc::advantage_decomposition(env, g, v, p, 0);
      max_gap = std::max(max_gap, std::abs(parts.total - parts.delayed - parts.immediate));
      min_adv = std::min(min_adv, parts.total);
    }
    advantage.push_back({{"i_independent", k == 1},
                         {"iterations", v.iterations},
                         {"interpolation_bound", v.interpolation_bound},
                         {"max_identity_gap", max_gap},
                         {"min_advantage", min_adv}});
  }
  const json report{{"weakly_revealing", revealing}, {"advantage", advantage}};
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << report.dump(2) << '\n';
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aomdp-lab: simulation and oracle tools"};
  app.require_subcommand(1);

  std::string plan_path, out, scenario_path;
  bool desk = false;
  int workers = 0;
  auto* sim = app.add_subcommand("simulate", "run a plan and write CSV outputs");
  sim->add_option("--plan", plan_path, "plan JSON");
  sim->add_flag("--desk", desk, "desk preset: 8 users, 10 reps, T=60");
  sim->add_option("--out", out, "output directory");
  sim->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);

  std::string users_out;
  auto* gen = app.add_subcommand("gen-users", "generate user parameters for a scenario");
  gen->add_option("--scenario", scenario_path, "scenario JSON")->required();
  gen->add_option("--out", users_out, "output JSON")->required();

  std::string report_out = "oracle_report.json";
  std::uint64_t oracle_seed = 1;
  int instances = 50, grid = 200;
  auto* orc = app.add_subcommand("oracle", "run the tabular oracle checks");
  orc->add_option("--out", report_out, "report JSON");
  orc->add_option("--seed", oracle_seed, "seed");
  orc->add_option("--instances", instances, "random instances")->check(CLI::PositiveNumber);
  orc->add_option("--grid", grid, "belief grid resolution")->check(CLI::PositiveNumber);

  std::string cal_scenario;
  auto* cal = app.add_subcommand("calibrate", "print achieved effect sizes");
  cal->add_option("--scenario", cal_scenario, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (sim->parsed() && plan_path.empty() && !desk) {
    std::cerr << "simulate needs --plan or --desk\n";
    return 1;
  }

  try {
    if (sim->parsed()) return cmd_simulate(plan_path, desk, out, workers);
    if (gen->parsed()) return cmd_gen_users(scenario_path, users_out);
    if (orc->parsed()) return cmd_oracle(report_out, oracle_seed, instances, grid);
    if (cal->parsed()) return cmd_calibrate(cal_scenario);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

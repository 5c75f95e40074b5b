#include <doctest.h>

#include "aomdp/agent.hpp"
#include "aomdp/heartsteps.hpp"

using namespace aomdp;
namespace hs = aomdp::heartsteps;

namespace {

hs::UserParams test_user() {
  hs::ScenarioConfig c;
  c.positive_level = hs::PositiveLevel::Medium;
  c.negative_level = hs::NegativeLevel::Small;
  c.n_users = 1;
  c.seed = 4;
  return hs::generate_users(c)[0];
}

struct Trace {
  std::vector<int> i, a;
  std::vector<double> r_hat;
};

Trace drive(AgentKind kind, int T, std::uint64_t seed = 1) {
  AgentConfig cfg;
  cfg.kind = kind;
  hs::HeartStepsEnv env(test_user());
  MeasureAgent agent(cfg, nullptr, seed, seed + 100);
  agent.begin(env.reset(seed + 200));
  Trace tr;
  for (int t = 1; t <= T; ++t) {
    const int i = agent.choose_measure();
    agent.observe_measurement(i, env.step_measure(i));
    const int a = agent.choose_control(env.observe_context()[0]);
    agent.observe_transition(env.step_control(a).next);
    tr.i.push_back(i);
    tr.a.push_back(a);
    tr.r_hat.push_back(agent.reward_estimate(t));
  }
  return tr;
}

}  // namespace

TEST_SUITE("agent") {

TEST_CASE("agent kinds round trip") {
  for (auto k : {AgentKind::Active, AgentKind::Always, AgentKind::Never, AgentKind::Zero, AgentKind::VanillaRlsvi})
    CHECK(parse_agent_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_agent_kind("sometimes"), std::invalid_argument);
}

TEST_CASE("config JSON keeps defaults for missing keys") {
  const auto c = agent_config_from_json(nlohmann::json{{"kind", "never"}, {"J", 20}});
  CHECK(c.kind == AgentKind::Never);
  CHECK(c.J == 20);
  CHECK(c.gamma == 0.9);
  CHECK(c.C == 10);
  CHECK_THROWS_AS(agent_config_from_json(nlohmann::json{{"gamma", 1.0}}), std::invalid_argument);
  const auto back = agent_config_from_json(to_json(c));
  CHECK(back.J == 20);
}

TEST_CASE("baseline measurement schedules") {
  const auto always = drive(AgentKind::Always, 15);
  const auto never = drive(AgentKind::Never, 15);
  const auto zero = drive(AgentKind::Zero, 15);
  for (int t = 0; t < 15; ++t) {
    CHECK(always.i[t] == 1);
    CHECK(never.i[t] == 0);
    CHECK(zero.i[t] == 0);
    CHECK(zero.a[t] == 0);
  }
}

TEST_CASE("active agent measures in the first period") {
  CHECK(drive(AgentKind::Active, 3).i[0] == 1);
}

TEST_CASE("agent is deterministic under its seeds") {
  const auto a = drive(AgentKind::Active, 25, 3);
  const auto b = drive(AgentKind::Active, 25, 3);
  CHECK(a.i == b.i);
  CHECK(a.a == b.a);
  CHECK(a.r_hat == b.r_hat);
}

TEST_CASE("agent rejects out-of-order calls") {
  AgentConfig cfg;
  MeasureAgent agent(cfg, nullptr, 1, 2);
  CHECK_THROWS_AS(agent.choose_measure(), ProtocolError);
  hs::HeartStepsEnv env(test_user());
  agent.begin(env.reset(1));
  CHECK_THROWS_AS(agent.begin(env.reset(1)), ProtocolError);
  CHECK_THROWS_AS(agent.reward_estimate(1), ProtocolError);
}

TEST_CASE("post-measure summary is a point mass at the revealed reward") {
  AgentConfig cfg;
  cfg.kind = AgentKind::Always;
  hs::HeartStepsEnv env(test_user());
  MeasureAgent agent(cfg, nullptr, 5, 6);
  agent.begin(env.reset(7));
  for (int t = 1; t <= 5; ++t) {
    const int i = agent.choose_measure();
    const auto u = env.step_measure(i);
    agent.observe_measurement(i, u);
    CHECK(agent.summary_step2().mean_u == (*u)[0]);
    CHECK(agent.summary_step2().std_u == 0.0);
    const int a = agent.choose_control(env.observe_context()[0]);
    agent.observe_transition(env.step_control(a).next);
  }
}

TEST_CASE("target copy lags the control weights") {
  AgentConfig cfg;
  cfg.C = 1000;
  hs::HeartStepsEnv env(test_user());
  MeasureAgent agent(cfg, nullptr, 5, 6);
  agent.begin(env.reset(7));
  for (int t = 1; t <= 12; ++t) {
    const int i = agent.choose_measure();
    agent.observe_measurement(i, env.step_measure(i));
    const int a = agent.choose_control(env.observe_context()[0]);
    agent.observe_transition(env.step_control(a).next);
  }
  CHECK(agent.weights().beta_A_target.isZero());
  CHECK_FALSE(agent.weights().beta_A.isZero());
}

}

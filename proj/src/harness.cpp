#include "aomdp/harness.hpp"

#include "aomdp/heartsteps_io.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <thread>

#ifndef AOMDP_VERSION
#define AOMDP_VERSION "unknown"
#endif

namespace aomdp::harness {

EpisodeSeeds episode_seeds(std::uint64_t root, int user, int rep, AgentKind kind) {
  const auto u = static_cast<std::uint64_t>(user);
  const auto r = static_cast<std::uint64_t>(rep);
  const auto k = static_cast<std::uint64_t>(kind) + 1;
  // Environment noise is shared by all agents (common random numbers).
  return {stream_seed(root, u, r, 0, StreamPurpose::Env), stream_seed(root, u, r, k, StreamPurpose::Smc),
          stream_seed(root, u, r, k, StreamPurpose::Agent)};
}

std::vector<StepRecord> run_episode(const heartsteps::UserParams& user, const AgentConfig& cfg,
                                    int horizon, const EpisodeSeeds& seeds, int user_index, int rep) {
  if (horizon < 1) throw std::invalid_argument("horizon must be positive");
  user.validate();
  heartsteps::HeartStepsEnv env(user, cfg.gamma);
  MeasureAgent agent(cfg, nullptr, seeds.smc, seeds.agent);
  const smc::Vec<smc::kDimR> truth(user.theta_r[0], user.theta_r[1], user.theta_r[2], user.theta_r[3]);

  std::vector<StepRecord> out;
  out.reserve(static_cast<std::size_t>(horizon));
  agent.begin(env.reset(seeds.env));
  double cum = 0.0;
  for (int t = 1; t <= horizon; ++t) {
    const int i = agent.choose_measure();
    const auto revealed = env.step_measure(i);
    agent.observe_measurement(i, revealed);
    const Vector ctx = env.observe_context();
    const int a = agent.choose_control(ctx[0]);
    const ControlOutcome res = env.step_control(a);
    const auto s1 = agent.summary_step1();
    const auto s2 = agent.summary_step2();
    agent.observe_transition(res.next);

    const auto& tr = env.last_transition();
    cum += res.latent_reward;
    StepRecord r;
    r.agent = to_string(cfg.kind);
    r.user = user_index;
    r.rep = rep;
    r.t = t;
    r.I = i;
    r.A = a;
    r.C = tr.c;
    r.M = tr.m;
    r.E = tr.e;
    r.O = tr.o;
    r.R_true = res.latent_reward;
    r.R_hat = agent.reward_estimate(t);
    r.belief_mean_1 = s1.mean_u;
    r.belief_std_1 = s1.std_u;
    r.belief_mean_2 = s2.mean_u;
    r.belief_std_2 = s2.std_u;
    r.ess = agent.belief().last_ess();
    r.cum_reward = cum;
    r.theta_r_mse = agent.belief().theta_r_draw_mse(truth);
    r.theta_r_mean_sqerr = (agent.belief().posterior_mean_theta_r() - truth).squaredNorm();
    out.push_back(std::move(r));
  }
  return out;
}

Stat mean_ci(const std::vector<double>& xs) {
  if (xs.empty()) throw std::invalid_argument("no values to summarize");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  Stat s;
  s.mean = mean;
  s.sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  const double half = 1.96 * s.sd / std::sqrt(n);
  s.lo = mean - half;
  s.hi = mean + half;
  return s;
}

std::vector<SummaryRow> aggregate(const std::vector<StepRecord>& records, bool require_adjusted) {
  struct Acc {
    double cum = 0.0, rate = 0.0, mse = 0.0;
    int n = 0;
  };
  // (agent, t, rep) -> user sums
  std::map<std::tuple<std::string, int, int>, Acc> cells;
  for (const auto& r : records) {
    auto& c = cells[{r.agent, r.t, r.rep}];
    c.cum += r.cum_reward;
    c.rate += r.I;
    c.mse += r.theta_r_mse;
    ++c.n;
  }
  const std::string zero = to_string(AgentKind::Zero);
  bool have_zero = false;
  for (const auto& r : records)
    if (r.agent == zero) {
      have_zero = true;
      break;
    }
  if (require_adjusted && !have_zero) throw std::invalid_argument("adjusted reward needs zero-policy runs");

  std::map<std::pair<std::string, int>, std::vector<const std::pair<const std::tuple<std::string, int, int>, Acc>*>>
      groups;
  for (const auto& kv : cells) groups[{std::get<0>(kv.first), std::get<1>(kv.first)}].push_back(&kv);

  std::vector<SummaryRow> rows;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [key, list] : groups) {
    std::vector<double> adj, rate, mse;
    bool adjusted_ok = have_zero;
    for (const auto* kv : list) {
      const auto& c = kv->second;
      rate.push_back(c.rate / c.n);
      mse.push_back(c.mse / c.n);
      if (!adjusted_ok) continue;
      const auto it = cells.find({zero, key.second, std::get<2>(kv->first)});
      if (it == cells.end()) {
        if (require_adjusted) throw std::invalid_argument("zero-policy run missing for a rep");
        adjusted_ok = false;
        continue;
      }
      adj.push_back(c.cum / c.n - it->second.cum / it->second.n);
    }
    SummaryRow row;
    row.agent = key.first;
    row.t = key.second;
    row.n_reps = static_cast<int>(list.size());
    row.measure_rate = mean_ci(rate);
    row.theta_mse = mean_ci(mse);
    row.adjusted_reward = adjusted_ok ? mean_ci(adj) : Stat{nan, nan, nan, nan};
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_steps_csv(std::ostream& os, const std::vector<StepRecord>& records) {
  os << "agent,user,rep,t,I,A,C,M,E,O,R_true,R_hat,belief_mean_1,belief_std_1,belief_mean_2,"
        "belief_std_2,ess,cum_reward,theta_r_mse,theta_r_mean_sqerr\n";
  for (const auto& r : records) {
    os << r.agent << ',' << r.user << ',' << r.rep << ',' << r.t << ',' << r.I << ',' << r.A;
    for (double v : {r.C, r.M, r.E, r.O, r.R_true, r.R_hat, r.belief_mean_1, r.belief_std_1,
                     r.belief_mean_2, r.belief_std_2, r.ess, r.cum_reward, r.theta_r_mse,
                     r.theta_r_mean_sqerr})
      os << ',' << fmt(v);
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "agent,t,n_reps";
  for (const char* m : {"adjusted_reward", "measure_rate", "theta_mse"})
    for (const char* s : {"mean", "sd", "lo", "hi"}) os << ',' << m << '_' << s;
  os << '\n';
  for (const auto& r : rows) {
    os << r.agent << ',' << r.t << ',' << r.n_reps;
    for (const Stat* s : {&r.adjusted_reward, &r.measure_rate, &r.theta_mse})
      os << ',' << fmt(s->mean) << ',' << fmt(s->sd) << ',' << fmt(s->lo) << ',' << fmt(s->hi);
    os << '\n';
  }
}

void RunPlan::validate() const {
  scenario.validate();
  agent.validate();
  if (agents.empty()) throw std::invalid_argument("agent list is empty");
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (workers < 1) throw std::invalid_argument("workers must be at least 1");
}

RunPlan RunPlan::desk() {
  RunPlan p;
  p.scenario.n_users = 8;
  p.scenario.horizon = 60;
  p.reps = 10;
  p.agents = {AgentKind::Active, AgentKind::Always, AgentKind::Never, AgentKind::Zero};
  return p;
}

nlohmann::json to_json(const RunPlan& plan) {
  nlohmann::json agents = nlohmann::json::array();
  for (auto k : plan.agents) agents.push_back(to_string(k));
  return nlohmann::json{{"scenario", heartsteps::to_json(plan.scenario)},
                        {"agent", to_json(plan.agent)},
                        {"agents", agents},
                        {"reps", plan.reps},
                        {"output_dir", plan.output_dir.string()},
                        {"workers", plan.workers}};
}

RunPlan plan_from_json(const nlohmann::json& j) {
  RunPlan p;
  if (j.contains("scenario")) p.scenario = heartsteps::scenario_from_json(j["scenario"]);
  if (j.contains("agent")) p.agent = agent_config_from_json(j["agent"]);
  if (j.contains("agents"))
    for (const auto& a : j["agents"]) p.agents.push_back(parse_agent_kind(a.get<std::string>()));
  if (j.contains("reps")) p.reps = j["reps"].get<int>();
  if (j.contains("output_dir")) p.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("workers")) p.workers = j["workers"].get<int>();
  return p;
}

PlanResult execute_plan(const RunPlan& plan, const std::vector<heartsteps::UserParams>& users) {
  plan.validate();
  struct Job {
    AgentKind kind;
    int user;
    int rep;
  };
  std::vector<Job> jobs;
  for (auto k : plan.agents)
    for (int u = 0; u < static_cast<int>(users.size()); ++u)
      for (int r = 0; r < plan.reps; ++r) jobs.push_back({k, u, r});

  std::vector<std::vector<StepRecord>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const auto& job = jobs[j];
      try {
        AgentConfig cfg = plan.agent;
        cfg.kind = job.kind;
        results[j] = run_episode(users[job.user], cfg, plan.scenario.horizon,
                                 episode_seeds(plan.scenario.seed, job.user, job.rep, job.kind), job.user,
                                 job.rep);
      } catch (const std::exception& e) {
        errors[j] = e.what();
        if (errors[j].empty()) errors[j] = "unknown error";
      }
    }
  };
  const int n_threads = std::min<int>(plan.workers, static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  if (n_threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  PlanResult out;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (!errors[j].empty()) {
      out.errors.push_back({to_string(jobs[j].kind), jobs[j].user, jobs[j].rep, errors[j]});
      continue;
    }
    out.records.insert(out.records.end(), results[j].begin(), results[j].end());
  }
  if (out.errors.empty() && !out.records.empty()) {
    bool have_zero = false;
    for (auto k : plan.agents) have_zero = have_zero || k == AgentKind::Zero;
    out.summary = aggregate(out.records, have_zero);
  }
  return out;
}

PlanResult execute_plan(const RunPlan& plan) {
  plan.validate();
  return execute_plan(plan, heartsteps::generate_users(plan.scenario));
}

void write_outputs(const RunPlan& plan, const PlanResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(plan.output_dir);
  auto open = [&](const char* name) {
    std::ofstream f(plan.output_dir / name);
    if (!f) throw std::runtime_error("cannot write " + (plan.output_dir / name).string());
    return f;
  };
  {
    auto f = open("steps.csv");
    write_steps_csv(f, result.records);
  }
  {
    auto f = open("summary.csv");
    write_summary_csv(f, result.summary);
  }
  nlohmann::json seeds = nlohmann::json::array();
  for (auto k : plan.agents)
    for (int u = 0; u < plan.scenario.n_users; ++u)
      for (int r = 0; r < plan.reps; ++r) {
        const auto s = episode_seeds(plan.scenario.seed, u, r, k);
        seeds.push_back({{"agent", to_string(k)}, {"user", u}, {"rep", r}, {"env", s.env}, {"smc", s.smc},
                         {"policy", s.agent}});
      }
  nlohmann::json manifest{{"plan", to_json(plan)},
                          {"root_seed", plan.scenario.seed},
                          {"code_version", AOMDP_VERSION},
                          {"episodes", seeds},
                          {"failed_episodes", result.errors.size()}};
  {
    auto f = open("manifest.json");
    f << manifest.dump(2) << '\n';
  }
  if (!result.errors.empty()) {
    auto f = open("errors.log");
    for (const auto& e : result.errors)
      f << e.agent << " user=" << e.user << " rep=" << e.rep << ": " << e.message << '\n';
  }
}

}  // namespace aomdp::harness

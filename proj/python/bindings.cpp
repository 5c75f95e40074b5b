#include "aomdp/harness.hpp"
#include "aomdp/heartsteps.hpp"
#include "aomdp/heartsteps_io.hpp"
#include "aomdp/oracle.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace aomdp;

namespace {

nlohmann::json summary_json(const std::vector<harness::SummaryRow>& rows) {
  auto stat = [](const harness::Stat& s) {
    return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}, {"lo", s.lo}, {"hi", s.hi}};
  };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows)
    out.push_back({{"agent", r.agent},
                   {"t", r.t},
                   {"n_reps", r.n_reps},
                   {"adjusted_reward", stat(r.adjusted_reward)},
                   {"measure_rate", stat(r.measure_rate)},
                   {"theta_mse", stat(r.theta_mse)}});
  return out;
}

std::string run_plan(const std::string& plan_text, bool write) {
  const auto plan = harness::plan_from_json(nlohmann::json::parse(plan_text));
  harness::PlanResult res;
  {
    py::gil_scoped_release release;
    res = harness::execute_plan(plan);
  }
  if (write) harness::write_outputs(plan, res);
  nlohmann::json errors = nlohmann::json::array();
  for (const auto& e : res.errors)
    errors.push_back({{"agent", e.agent}, {"user", e.user}, {"rep", e.rep}, {"message", e.message}});
  return nlohmann::json{{"summary", summary_json(res.summary)},
                        {"errors", errors},
                        {"n_records", res.records.size()}}
      .dump();
}

std::string generate_users(const std::string& scenario_text) {
  const auto cfg = heartsteps::scenario_from_json(nlohmann::json::parse(scenario_text));
  nlohmann::json out = nlohmann::json::array();
  for (const auto& u : heartsteps::generate_users(cfg)) out.push_back(heartsteps::to_json(u));
  return out.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.attr("__version__") = AOMDP_VERSION;
  m.def("run_plan", &run_plan, py::arg("plan_json"), py::arg("write") = false);
  m.def("generate_users", &generate_users, py::arg("scenario_json"));
  m.def(
      "kalman_filter",
      [](double a, double q, double c, double s, const std::vector<double>& obs, double m0, double v0) {
        const auto r = oracle::kalman_filter(a, q, c, s, obs, m0, v0);
        return py::make_tuple(r.mean, r.var);
      },
      py::arg("a"), py::arg("q"), py::arg("c"), py::arg("s"), py::arg("obs"), py::arg("m0") = 0.0,
      py::arg("v0") = 1.0);
  m.def("splitmix64", [](std::uint64_t x) { return splitmix64(x); });
  py::register_exception<ProtocolError>(m, "ProtocolError");
}

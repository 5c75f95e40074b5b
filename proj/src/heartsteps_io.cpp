#include "aomdp/heartsteps_io.hpp"

#include <fstream>

namespace aomdp::heartsteps {

using nlohmann::json;

namespace {

template <std::size_t N>
std::array<double, N> read_array(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != N)
    throw std::invalid_argument(std::string("block ") + key + " has the wrong length");
  std::array<double, N> out{};
  for (std::size_t k = 0; k < N; ++k) out[k] = v[k].get<double>();
  return out;
}

}  // namespace

json to_json(const UserParams& p) {
  json j;
  j["theta_C"] = p.theta_c;
  j["theta_M"] = p.theta_m;
  j["theta_E"] = {{"base", p.theta_e.base},
                  {"measure", p.theta_e.measure},
                  {"measure_x_lag", p.theta_e.measure_x_lag}};
  j["theta_R"] = p.theta_r;
  j["theta_O"] = p.theta_o;
  j["noise_var"] = {{"C", p.var.c}, {"M", p.var.m}, {"E", p.var.e}, {"R", p.var.r}, {"O", p.var.o}};
  if (p.general) {
    const auto& g = *p.general;
    j["general"] = {{"E", g.e},
                    {"R", g.r},
                    {"O", g.o},
                    {"E_measure", g.e_measure},
                    {"E_measure_x_lag", g.e_measure_x_lag},
                    {"var_E", g.var_e},
                    {"var_R", g.var_r},
                    {"var_O", g.var_o}};
  }
  return j;
}

UserParams user_from_json(const json& j) {
  UserParams p;
  p.theta_c = j.at("theta_C").get<double>();
  p.theta_m = read_array<8>(j, "theta_M");
  const auto& e = j.at("theta_E");
  p.theta_e.base = read_array<4>(e, "base");
  p.theta_e.measure = e.at("measure").get<double>();
  p.theta_e.measure_x_lag = e.at("measure_x_lag").get<double>();
  p.theta_r = read_array<4>(j, "theta_R");
  p.theta_o = read_array<2>(j, "theta_O");
  const auto& v = j.at("noise_var");
  p.var = NoiseVariances{v.at("C").get<double>(), v.at("M").get<double>(), v.at("E").get<double>(),
                         v.at("R").get<double>(), v.at("O").get<double>()};
  if (j.contains("general")) {
    const auto& gj = j.at("general");
    GeneralModel g;
    g.e = read_array<8>(gj, "E");
    g.r = read_array<8>(gj, "R");
    g.o = read_array<8>(gj, "O");
    g.e_measure = gj.at("E_measure").get<double>();
    g.e_measure_x_lag = gj.at("E_measure_x_lag").get<double>();
    g.var_e = gj.at("var_E").get<double>();
    g.var_r = gj.at("var_R").get<double>();
    g.var_o = gj.at("var_O").get<double>();
    p.general = g;
  }
  p.validate();
  return p;
}

json to_json(const ScenarioConfig& cfg) {
  return json{{"positive_level", to_string(cfg.positive_level)},
              {"negative_level", to_string(cfg.negative_level)},
              {"emission_informative", cfg.emission_informative},
              {"model_variant", to_string(cfg.model_variant)},
              {"n_users", cfg.n_users},
              {"horizon", cfg.horizon},
              {"seed", cfg.seed}};
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig cfg;
  if (j.contains("positive_level")) cfg.positive_level = parse_positive_level(j["positive_level"]);
  if (j.contains("negative_level")) cfg.negative_level = parse_negative_level(j["negative_level"]);
  if (j.contains("emission_informative")) cfg.emission_informative = j["emission_informative"].get<bool>();
  if (j.contains("model_variant")) cfg.model_variant = parse_model_variant(j["model_variant"]);
  if (j.contains("n_users")) cfg.n_users = j["n_users"].get<int>();
  if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  cfg.validate();
  return cfg;
}

void write_users(const std::filesystem::path& path, const std::vector<UserParams>& users) {
  json arr = json::array();
  for (const auto& p : users) arr.push_back(to_json(p));
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << arr.dump(2) << '\n';
}

std::vector<UserParams> read_users(const std::filesystem::path& path) {
  const json arr = read_json_file(path);
  if (!arr.is_array()) throw std::invalid_argument("user file must hold a JSON array");
  std::vector<UserParams> users;
  for (const auto& j : arr) users.push_back(user_from_json(j));
  return users;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

}  // namespace aomdp::heartsteps

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aomdp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class ProtocolError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct AomdpSpec {
  int observed_state_dim = 1;
  int latent_state_dim = 1;
  int emission_dim = 1;
  std::vector<int> control_actions{0, 1};
  std::vector<int> measure_actions{0, 1};
  double gamma = 0.9;

  void validate() const;
};

struct PeriodObservation {
  Vector z;
  Vector o;
  std::optional<Vector> revealed_u;
};

/// One period of the observed history: (z, o, i, i*u, a).
struct HistoryEntry {
  Vector z;
  Vector o;
  std::optional<int> i;
  std::optional<Vector> iu;
  std::optional<int> a;
};

enum class HistoryEvent { Observe, Measure, Control };

struct History {
  std::vector<HistoryEntry> entries;
  int k = 0;  // 0 before the first observation, otherwise the half-step

  int t() const { return static_cast<int>(entries.size()); }
  bool awaiting_observation() const {
    return entries.empty() || entries.back().a.has_value();
  }
};

struct ObserveEvent {
  Vector z;
  Vector o;
};
struct MeasureEvent {
  int i = 0;
  std::optional<Vector> u;
};
struct ControlEvent {
  int a = 0;
};

History advance_history(History h, const ObserveEvent& ev);
History advance_history(History h, const MeasureEvent& ev);
History advance_history(History h, const ControlEvent& ev);

struct BeliefSummary {
  Vector z;
  double mean_u = 0.0;
  double std_u = 0.0;
  int i = 0;
};

/// Read-only view of a weighted particle set over a scalar latent state.
struct ParticleView {
  std::span<const double> values;
  std::span<const double> weights;
};

using RewardFn = std::function<double(const Vector& z, double u)>;

double reward_of_belief(const RewardFn& r, const Vector& z_next, ParticleView belief);

struct ControlOutcome {
  PeriodObservation next;
  double latent_reward = 0.0;
};

class Environment {
public:
  virtual ~Environment() = default;

  virtual const AomdpSpec& spec() const = 0;
  virtual PeriodObservation reset(std::uint64_t seed) = 0;
  virtual std::optional<Vector> step_measure(int i) = 0;
  virtual Vector observe_context() = 0;
  virtual ControlOutcome step_control(int a) = 0;
};

}  // namespace aomdp

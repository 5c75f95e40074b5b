#include "aomdp/core.hpp"

#include <cmath>

namespace aomdp {

void AomdpSpec::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  if (control_actions.empty() || measure_actions.empty())
    throw std::invalid_argument("action sets must be non-empty");
  if (observed_state_dim < 1 || latent_state_dim < 1 || emission_dim < 1)
    throw std::invalid_argument("dimensions must be at least 1");
}

History advance_history(History h, const ObserveEvent& ev) {
  if (!h.awaiting_observation()) throw ProtocolError("observe before the period's control action");
  h.entries.push_back(HistoryEntry{ev.z, ev.o, std::nullopt, std::nullopt, std::nullopt});
  h.k = 1;
  return h;
}

History advance_history(History h, const MeasureEvent& ev) {
  if (h.entries.empty() || h.k != 1) throw ProtocolError("measure is only legal at half-step 1");
  if (ev.i != 0 && ev.i != 1) throw ProtocolError("measure action must be 0 or 1");
  if (ev.i == 1 && !ev.u) throw ProtocolError("measured period without a revealed latent state");
  if (ev.i == 0 && ev.u) throw ProtocolError("unmeasured period carries a revealed latent state");
  auto& e = h.entries.back();
  e.i = ev.i;
  e.iu = ev.u;
  h.k = 2;
  return h;
}

History advance_history(History h, const ControlEvent& ev) {
  if (h.entries.empty() || h.k != 2 || h.entries.back().a)
    throw ProtocolError("control is only legal at half-step 2");
  h.entries.back().a = ev.a;
  return h;
}

double reward_of_belief(const RewardFn& r, const Vector& z_next, ParticleView belief) {
  if (belief.values.empty()) throw std::invalid_argument("empty particle set");
  if (belief.values.size() != belief.weights.size())
    throw std::invalid_argument("particle and weight counts differ");
  double acc = 0.0;
  for (std::size_t j = 0; j < belief.values.size(); ++j) {
    if (belief.weights[j] == 0.0) continue;
    acc += belief.weights[j] * r(z_next, belief.values[j]);
  }
  return acc;
}

}  // namespace aomdp

#pragma once

#include "aomdp/core.hpp"
#include "aomdp/rng.hpp"

#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace aomdp::oracle {

class SizeError : public std::length_error {
public:
  using std::length_error::length_error;
};

/// Finite AOMDP with measure actions I = {0,1}.
struct TabularAomdp {
  int nz = 1;
  int nu = 2;
  int no = 2;
  int na = 1;
  double gamma = 0.9;
  std::vector<double> trans;   // [z][u][i][a] -> [z'][u']
  std::vector<double> emit;    // [u] -> [o]
  std::vector<double> reward;  // [z'][u']

  TabularAomdp() = default;
  TabularAomdp(int nz, int nu, int no, int na, double gamma);

  std::size_t trans_index(int z, int u, int i, int a, int z2, int u2) const {
    return (((((static_cast<std::size_t>(z) * nu + u) * 2 + i) * na + a) * nz + z2) * nu) + u2;
  }
  double T(int z, int u, int i, int a, int z2, int u2) const { return trans[trans_index(z, u, i, a, z2, u2)]; }
  double& T(int z, int u, int i, int a, int z2, int u2) { return trans[trans_index(z, u, i, a, z2, u2)]; }
  double Om(int u, int o) const { return emit[static_cast<std::size_t>(u) * no + o]; }
  double& Om(int u, int o) { return emit[static_cast<std::size_t>(u) * no + o]; }
  double r(int z, int u) const { return reward[static_cast<std::size_t>(z) * nu + u]; }
  double& r(int z, int u) { return reward[static_cast<std::size_t>(z) * nu + u]; }

  void validate() const;
  bool reward_observed_only() const;

  /// Random instance with Dirichlet(1) rows and rewards in [0,1].
  static TabularAomdp random(Rng& rng, int nz, int nu, int no, int na, double gamma,
                             bool observed_reward = true, bool i_independent = false);
};

/// Simplex grid {b : b_k = n_k / m, sum n_k = m}.
class BeliefGrid {
public:
  BeliefGrid(int nu, int m);

  int size() const { return static_cast<int>(counts_.size()); }
  int nu() const { return nu_; }
  int resolution() const { return m_; }
  Vector point(int g) const;
  const std::vector<int>& counts(int g) const { return counts_[g]; }
  int index_of(const std::vector<int>& counts) const;
  int vertex(int u) const;

  /// Barycentric weights on the Freudenthal triangulation; exact for affine functions.
  void interpolate(const Vector& b, std::vector<std::pair<int, double>>& out) const;

private:
  std::uint64_t key(const std::vector<int>& counts) const;

  int nu_;
  int m_;
  std::vector<std::vector<int>> counts_;
  std::unordered_map<std::uint64_t, int> index_;
};

struct ValueTables {
  int nz = 0;
  int grid_size = 0;
  int na = 0;
  std::vector<double> qa;  // [z][g][i][a]
  std::vector<double> qi;  // [z][g][i]
  int iterations = 0;
  double residual = 0.0;
  /// Tolerance for identities evaluated on the stored tables: sqrt(gamma) * residual
  /// plus a floating-point allowance.
  double interpolation_bound = 0.0;

  double QA(int z, int g, int i, int a) const {
    return qa[((static_cast<std::size_t>(z) * grid_size + g) * 2 + i) * na + a];
  }
  double QI(int z, int g, int i) const { return qi[(static_cast<std::size_t>(z) * grid_size + g) * 2 + i]; }
  double VA(int z, int g, int i) const;
};

ValueTables belief_value_iteration(const TabularAomdp& env, const BeliefGrid& grid, double tol,
                                   int max_iterations = 100000);

struct AdvantageParts {
  double total = 0.0;
  double delayed = 0.0;
  double immediate = 0.0;
};

/// Measuring advantage Q^I(b,1) - Q^I(b,0) at grid point g and its split into the
/// delayed term sqrt(gamma) E_b[V1(d_u) - V0(d_u)] and the immediate term
/// sqrt(gamma) (E_b[V0(d_u)] - V0(b)).
AdvantageParts advantage_decomposition(const TabularAomdp& env, const BeliefGrid& grid,
                                       const ValueTables& v, int g, int z);

/// 2-step emission matrix over augmented states [Z,U,I,A,Z,U] with the action at t fixed
/// to (measure, a). Rows are (z0,o0,i0*u0,i0,a0,z1,o1,i1*u1,z2,o2).
Matrix two_step_emission_matrix(const TabularAomdp& env, int a, bool measure = true);

/// Max over control actions of the smallest singular value of the 2-step emission matrix.
double weakly_revealing_sigma(const TabularAomdp& env, int m = 2, bool measure = true);

struct KalmanResult {
  std::vector<double> mean;
  std::vector<double> var;
};

/// Filter for u_t = a u_{t-1} + N(0,q), o_t = c u_t + N(0,s), u_0 ~ N(m0, v0).
KalmanResult kalman_filter(double a, double q, double c, double s, std::span<const double> obs,
                           double m0 = 0.0, double v0 = 1.0);

}  // namespace aomdp::oracle

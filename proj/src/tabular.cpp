#include "aomdp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aomdp::oracle {

TabularAomdp::TabularAomdp(int nz_, int nu_, int no_, int na_, double gamma_)
    : nz(nz_), nu(nu_), no(no_), na(na_), gamma(gamma_) {
  if (nz < 1 || nu < 1 || no < 1 || na < 1) throw std::invalid_argument("set sizes must be positive");
  trans.assign(static_cast<std::size_t>(nz) * nu * 2 * na * nz * nu, 0.0);
  emit.assign(static_cast<std::size_t>(nu) * no, 0.0);
  reward.assign(static_cast<std::size_t>(nz) * nu, 0.0);
}

void TabularAomdp::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  const std::size_t row = static_cast<std::size_t>(nz) * nu;
  if (trans.size() != row * 2 * na * row || emit.size() != static_cast<std::size_t>(nu) * no ||
      reward.size() != row)
    throw std::invalid_argument("table sizes do not match the set sizes");
  for (std::size_t k = 0; k < trans.size(); k += row) {
    double s = 0.0;
    for (std::size_t j = 0; j < row; ++j) {
      if (trans[k + j] < 0.0) throw std::invalid_argument("negative transition probability");
      s += trans[k + j];
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("transition row does not sum to one");
  }
  for (int u = 0; u < nu; ++u) {
    double s = 0.0;
    for (int o = 0; o < no; ++o) {
      if (Om(u, o) < 0.0) throw std::invalid_argument("negative emission probability");
      s += Om(u, o);
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("emission row does not sum to one");
  }
}

bool TabularAomdp::reward_observed_only() const {
  for (int z = 0; z < nz; ++z)
    for (int u = 1; u < nu; ++u)
      if (r(z, u) != r(z, 0)) return false;
  return true;
}

namespace {

std::vector<double> dirichlet_row(Rng& rng, int n) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) s += (x = ex(rng));
  for (auto& x : v) x /= s;
  // Renormalize so the row sums to one up to rounding of a single entry.
  double partial = 0.0;
  for (int k = 0; k + 1 < n; ++k) partial += v[k];
  v[n - 1] = std::max(0.0, 1.0 - partial);
  return v;
}

}  // namespace

TabularAomdp TabularAomdp::random(Rng& rng, int nz, int nu, int no, int na, double gamma,
                                  bool observed_reward, bool i_independent) {
  TabularAomdp env(nz, nu, no, na, gamma);
  for (int z = 0; z < nz; ++z)
    for (int u = 0; u < nu; ++u)
      for (int a = 0; a < na; ++a)
        for (int i = 0; i < 2; ++i) {
          if (i == 1 && i_independent) {
            for (int z2 = 0; z2 < nz; ++z2)
              for (int u2 = 0; u2 < nu; ++u2) env.T(z, u, 1, a, z2, u2) = env.T(z, u, 0, a, z2, u2);
            continue;
          }
          const auto row = dirichlet_row(rng, nz * nu);
          for (int z2 = 0; z2 < nz; ++z2)
            for (int u2 = 0; u2 < nu; ++u2) env.T(z, u, i, a, z2, u2) = row[z2 * nu + u2];
        }
  for (int u = 0; u < nu; ++u) {
    const auto row = dirichlet_row(rng, no);
    for (int o = 0; o < no; ++o) env.Om(u, o) = row[o];
  }
  for (int z = 0; z < nz; ++z) {
    const double rz = uniform01(rng);
    for (int u = 0; u < nu; ++u) env.r(z, u) = observed_reward ? rz : uniform01(rng);
  }
  env.validate();
  return env;
}

BeliefGrid::BeliefGrid(int nu, int m) : nu_(nu), m_(m) {
  if (nu < 1 || m < 1) throw std::invalid_argument("grid needs nu >= 1 and m >= 1");
  std::vector<int> c(nu, 0);
  auto rec = [&](auto&& self, int k, int left) -> void {
    if (k == nu - 1) {
      c[k] = left;
      index_.emplace(key(c), static_cast<int>(counts_.size()));
      counts_.push_back(c);
      return;
    }
    for (int n = left; n >= 0; --n) {
      c[k] = n;
      self(self, k + 1, left - n);
    }
  };
  rec(rec, 0, m);
}

std::uint64_t BeliefGrid::key(const std::vector<int>& counts) const {
  std::uint64_t k = 0;
  for (int v : counts) k = k * static_cast<std::uint64_t>(m_ + 1) + static_cast<std::uint64_t>(v);
  return k;
}

Vector BeliefGrid::point(int g) const {
  Vector b(nu_);
  for (int k = 0; k < nu_; ++k) b[k] = static_cast<double>(counts_[g][k]) / m_;
  return b;
}

int BeliefGrid::index_of(const std::vector<int>& counts) const {
  const auto it = index_.find(key(counts));
  if (it == index_.end()) throw std::out_of_range("counts are not a grid point");
  return it->second;
}

int BeliefGrid::vertex(int u) const {
  std::vector<int> c(nu_, 0);
  c[u] = m_;
  return index_of(c);
}

void BeliefGrid::interpolate(const Vector& b, std::vector<std::pair<int, double>>& out) const {
  out.clear();
  const int n = nu_;
  std::vector<double> x(n), d(n);
  std::vector<int> v(n);
  double tail = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    tail += b[k];
    x[k] = m_ * tail;
  }
  x[0] = m_;
  for (int k = 0; k < n; ++k) {
    const double rx = std::round(x[k]);
    if (std::abs(x[k] - rx) < 1e-9) x[k] = rx;
    v[k] = static_cast<int>(std::floor(x[k]));
    d[k] = x[k] - v[k];
  }
  std::vector<int> order;
  for (int k = 1; k < n; ++k) order.push_back(k);
  std::stable_sort(order.begin(), order.end(), [&](int p, int q) { return d[p] > d[q]; });

  std::vector<int> cum = v, counts(n);
  auto emit_vertex = [&](double lambda) {
    if (lambda <= 0.0) return;
    for (int k = 0; k < n; ++k) counts[k] = cum[k] - (k + 1 < n ? cum[k + 1] : 0);
    for (int c : counts)
      if (c < 0) {
        if (lambda > 1e-12) throw std::logic_error("interpolation vertex left the simplex");
        return;
      }
    out.emplace_back(index_of(counts), lambda);
  };
  const int dims = n - 1;
  emit_vertex(1.0 - (dims > 0 ? d[order[0]] : 0.0));
  for (int k = 0; k < dims; ++k) {
    cum[order[k]] += 1;
    const double next = k + 1 < dims ? d[order[k + 1]] : 0.0;
    emit_vertex(d[order[k]] - next);
  }
}

double ValueTables::VA(int z, int g, int i) const {
  double best = QA(z, g, i, 0);
  for (int a = 1; a < na; ++a) best = std::max(best, QA(z, g, i, a));
  return best;
}

namespace {

struct Successor {
  int z2 = 0;
  double prob = 0.0;
  double reward = 0.0;
  std::vector<std::pair<int, double>> interp;
};

}  // namespace

ValueTables belief_value_iteration(const TabularAomdp& env, const BeliefGrid& grid, double tol,
                                   int max_iterations) {
  env.validate();
  if (grid.nu() != env.nu) throw std::invalid_argument("grid dimension does not match the latent set");
  const int nz = env.nz, nu = env.nu, no = env.no, na = env.na, G = grid.size();
  const double sg = std::sqrt(env.gamma);

  std::vector<std::vector<Successor>> succ(static_cast<std::size_t>(nz) * G * 2 * na);
  auto sidx = [&](int z, int g, int i, int a) {
    return ((static_cast<std::size_t>(z) * G + g) * 2 + i) * na + a;
  };
  std::vector<double> pzu(static_cast<std::size_t>(nz) * nu);
  Vector bnext(nu);
  for (int z = 0; z < nz; ++z)
    for (int g = 0; g < G; ++g) {
      const Vector b = grid.point(g);
      for (int i = 0; i < 2; ++i)
        for (int a = 0; a < na; ++a) {
          std::fill(pzu.begin(), pzu.end(), 0.0);
          for (int u = 0; u < nu; ++u) {
            if (b[u] == 0.0) continue;
            for (int z2 = 0; z2 < nz; ++z2)
              for (int u2 = 0; u2 < nu; ++u2) pzu[z2 * nu + u2] += b[u] * env.T(z, u, i, a, z2, u2);
          }
          auto& list = succ[sidx(z, g, i, a)];
          for (int z2 = 0; z2 < nz; ++z2)
            for (int o = 0; o < no; ++o) {
              double p = 0.0;
              for (int u2 = 0; u2 < nu; ++u2) p += pzu[z2 * nu + u2] * env.Om(u2, o);
              if (p <= 0.0) continue;
              Successor s;
              s.z2 = z2;
              s.prob = p;
              for (int u2 = 0; u2 < nu; ++u2) {
                bnext[u2] = pzu[z2 * nu + u2] * env.Om(u2, o) / p;
                s.reward += bnext[u2] * env.r(z2, u2);
              }
              grid.interpolate(bnext, s.interp);
              list.push_back(std::move(s));
            }
        }
    }

  ValueTables v;
  v.nz = nz;
  v.grid_size = G;
  v.na = na;
  v.qa.assign(static_cast<std::size_t>(nz) * G * 2 * na, 0.0);
  v.qi.assign(static_cast<std::size_t>(nz) * G * 2, 0.0);
  std::vector<double> vi(static_cast<std::size_t>(nz) * G), qa_new(v.qa.size()), qi_new(v.qi.size());
  std::vector<int> vertices(nu);
  for (int u = 0; u < nu; ++u) vertices[u] = grid.vertex(u);

  for (int it = 1; it <= max_iterations; ++it) {
    for (int z = 0; z < nz; ++z)
      for (int g = 0; g < G; ++g) vi[z * G + g] = std::max(v.QI(z, g, 0), v.QI(z, g, 1));

    for (int z = 0; z < nz; ++z)
      for (int g = 0; g < G; ++g)
        for (int i = 0; i < 2; ++i)
          for (int a = 0; a < na; ++a) {
            double q = 0.0;
            for (const auto& s : succ[sidx(z, g, i, a)]) {
              double cont = 0.0;
              for (const auto& [gg, lam] : s.interp) cont += lam * vi[s.z2 * G + gg];
              q += s.prob * (s.reward + sg * cont);
            }
            qa_new[sidx(z, g, i, a)] = q;
          }

    auto va_new = [&](int z, int g, int i) {
      double best = qa_new[sidx(z, g, i, 0)];
      for (int a = 1; a < na; ++a) best = std::max(best, qa_new[sidx(z, g, i, a)]);
      return best;
    };
    for (int z = 0; z < nz; ++z)
      for (int g = 0; g < G; ++g) {
        const Vector b = grid.point(g);
        double measured = 0.0;
        for (int u = 0; u < nu; ++u)
          if (b[u] != 0.0) measured += b[u] * va_new(z, vertices[u], 1);
        qi_new[(static_cast<std::size_t>(z) * G + g) * 2 + 1] = sg * measured;
        qi_new[(static_cast<std::size_t>(z) * G + g) * 2 + 0] = sg * va_new(z, g, 0);
      }

    double res = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < qa_new.size(); ++k) {
      res = std::max(res, std::abs(qa_new[k] - v.qa[k]));
      scale = std::max(scale, std::abs(qa_new[k]));
    }
    for (std::size_t k = 0; k < qi_new.size(); ++k) res = std::max(res, std::abs(qi_new[k] - v.qi[k]));
    v.qa.swap(qa_new);
    v.qi.swap(qi_new);
    v.iterations = it;
    v.residual = res;
    if (res <= tol) {
      v.interpolation_bound = sg * res + 1e-12 * (1.0 + scale);
      return v;
    }
  }
  throw NumericalError("belief value iteration did not converge");
}

AdvantageParts advantage_decomposition(const TabularAomdp& env, const BeliefGrid& grid,
                                       const ValueTables& v, int g, int z) {
  const double sg = std::sqrt(env.gamma);
  const Vector b = grid.point(g);
  AdvantageParts out;
  out.total = v.QI(z, g, 1) - v.QI(z, g, 0);
  double delayed = 0.0, mixed = 0.0;
  for (int u = 0; u < env.nu; ++u) {
    if (b[u] == 0.0) continue;
    const int gv = grid.vertex(u);
    delayed += b[u] * (v.VA(z, gv, 1) - v.VA(z, gv, 0));
    mixed += b[u] * v.VA(z, gv, 0);
  }
  out.delayed = sg * delayed;
  out.immediate = sg * (mixed - v.VA(z, g, 0));
  return out;
}

Matrix two_step_emission_matrix(const TabularAomdp& env, int a, bool measure) {
  env.validate();
  if (a < 0 || a >= env.na) throw std::invalid_argument("control action out of range");
  const int nz = env.nz, nu = env.nu, no = env.no, na = env.na;
  const int i1 = measure ? 1 : 0;
  const std::size_t cols = static_cast<std::size_t>(nz) * nu * 2 * na * nz * nu;
  const std::size_t rows = static_cast<std::size_t>(nz) * no * nu * 2 * na * nz * no * nu * nz * no;
  if (rows * cols > 1000000) throw SizeError("2-step emission matrix exceeds 10^6 entries");

  // Distribution of (z2, o2) given (z1, u1) under the fixed action.
  std::vector<double> next(static_cast<std::size_t>(nz) * nu * nz * no, 0.0);
  for (int z1 = 0; z1 < nz; ++z1)
    for (int u1 = 0; u1 < nu; ++u1)
      for (int z2 = 0; z2 < nz; ++z2)
        for (int o2 = 0; o2 < no; ++o2) {
          double p = 0.0;
          for (int u2 = 0; u2 < nu; ++u2) p += env.T(z1, u1, i1, a, z2, u2) * env.Om(u2, o2);
          next[((static_cast<std::size_t>(z1) * nu + u1) * nz + z2) * no + o2] = p;
        }

  Matrix M = Matrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::size_t col = 0;
  for (int z0 = 0; z0 < nz; ++z0)
    for (int u0 = 0; u0 < nu; ++u0)
      for (int i0 = 0; i0 < 2; ++i0)
        for (int a0 = 0; a0 < na; ++a0)
          for (int z1 = 0; z1 < nz; ++z1)
            for (int u1 = 0; u1 < nu; ++u1, ++col) {
              const int iu0 = i0 == 1 ? u0 : 0;
              const int iu1 = i1 == 1 ? u1 : 0;
              for (int o0 = 0; o0 < no; ++o0)
                for (int o1 = 0; o1 < no; ++o1)
                  for (int z2 = 0; z2 < nz; ++z2)
                    for (int o2 = 0; o2 < no; ++o2) {
                      std::size_t row = z0;
                      row = row * no + o0;
                      row = row * nu + iu0;
                      row = row * 2 + i0;
                      row = row * na + a0;
                      row = row * nz + z1;
                      row = row * no + o1;
                      row = row * nu + iu1;
                      row = row * nz + z2;
                      row = row * no + o2;
                      M(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) =
                          env.Om(u0, o0) * env.Om(u1, o1) *
                          next[((static_cast<std::size_t>(z1) * nu + u1) * nz + z2) * no + o2];
                    }
            }
  return M;
}

double weakly_revealing_sigma(const TabularAomdp& env, int m, bool measure) {
  if (m != 2) throw std::invalid_argument("only the 2-step emission matrix is supported");
  if (!env.reward_observed_only())
    throw std::invalid_argument("reward depends on the latent state; the check requires r(Z) only");
  double best = 0.0;
  for (int a = 0; a < env.na; ++a) {
    const Matrix M = two_step_emission_matrix(env, a, measure);
    const Eigen::Index s = M.cols();
    double sigma = 0.0;
    if (M.rows() >= s) {
      Eigen::JacobiSVD<Matrix> svd(M);
      sigma = svd.singularValues()[s - 1];
    }
    best = std::max(best, sigma);
  }
  return best;
}

}  // namespace aomdp::oracle

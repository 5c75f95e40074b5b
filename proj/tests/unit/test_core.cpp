#include <doctest.h>

#include "aomdp/core.hpp"
#include "aomdp/linalg.hpp"
#include "aomdp/rng.hpp"

#include <cmath>
#include <set>

using namespace aomdp;

TEST_SUITE("core") {

TEST_CASE("history follows observe, measure, control") {
  History h;
  CHECK(h.awaiting_observation());
  h = advance_history(h, ObserveEvent{Vector::Zero(2), Vector::Zero(1)});
  CHECK(h.k == 1);
  CHECK_THROWS_AS(advance_history(h, ControlEvent{1}), ProtocolError);
  CHECK_THROWS_AS(advance_history(h, ObserveEvent{Vector::Zero(2), Vector::Zero(1)}), ProtocolError);
  CHECK_THROWS_AS(advance_history(h, MeasureEvent{1, std::nullopt}), ProtocolError);
  CHECK_THROWS_AS(advance_history(h, MeasureEvent{0, Vector::Ones(1)}), ProtocolError);
  h = advance_history(h, MeasureEvent{1, Vector::Constant(1, 0.3)});
  CHECK(h.k == 2);
  CHECK_THROWS_AS(advance_history(h, MeasureEvent{0, std::nullopt}), ProtocolError);
  h = advance_history(h, ControlEvent{1});
  CHECK(h.t() == 1);
  CHECK(h.awaiting_observation());
  CHECK_THROWS_AS(advance_history(h, ControlEvent{0}), ProtocolError);
  CHECK((*h.entries[0].iu)[0] == doctest::Approx(0.3));
}

TEST_CASE("reward of a belief is the weighted reward") {
  const std::vector<double> v{1.0, 2.0, 4.0}, w{0.5, 0.25, 0.25};
  const RewardFn r = [](const Vector& z, double u) { return z[0] + u * u; };
  const Vector z = Vector::Constant(1, 1.0);
  CHECK(reward_of_belief(r, z, ParticleView{v, w}) == doctest::Approx(1.0 + 0.5 + 1.0 + 4.0));
  const std::vector<double> empty;
  CHECK_THROWS_AS(reward_of_belief(r, z, ParticleView{empty, empty}), std::invalid_argument);
}

TEST_CASE("stream seeds differ across keys and are stable") {
  std::set<std::uint64_t> seen;
  for (int u = 0; u < 4; ++u)
    for (int r = 0; r < 4; ++r)
      for (int a = 0; a < 3; ++a)
        for (auto p : {StreamPurpose::Env, StreamPurpose::Smc, StreamPurpose::Agent})
          seen.insert(stream_seed(9, u, r, a, p));
  CHECK(seen.size() == 4 * 4 * 3 * 3);
  CHECK(stream_seed(9, 1, 2, 3, StreamPurpose::Env) == stream_seed(9, 1, 2, 3, StreamPurpose::Env));
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("spd helpers") {
  Matrix a(2, 2);
  a << 4.0, 1.0, 1.0, 3.0;
  const Matrix l = spd_cholesky(a);
  CHECK((l * l.transpose() - a).norm() < 1e-14);
  CHECK((spd_inverse(a) * a - Matrix::Identity(2, 2)).norm() < 1e-14);
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(spd_cholesky(bad), NumericalError);
  CHECK(log_normal_pdf(0.0, 0.0, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
}

TEST_CASE("conjugate posterior matches a one-dimensional hand computation") {
  // prior N(1, 2), two rows x = 1, 2 with y = 3, 5, noise 0.5
  Matrix gram(1, 1);
  gram << 5.0;
  Vector moment(1);
  moment << 13.0;
  const auto p = conjugate_posterior(gram, moment, 0.5, Vector::Constant(1, 1.0), Matrix::Constant(1, 1, 2.0));
  CHECK(p.cov(0, 0) == doctest::Approx(1.0 / 10.5));
  CHECK(p.mean[0] == doctest::Approx((26.0 + 0.5) / 10.5));
  CHECK_THROWS_AS(conjugate_posterior(gram, moment, 0.0, Vector::Zero(1), Matrix::Identity(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("multivariate normal draws have the requested moments") {
  GaussianPosterior p{Vector::Zero(2), Matrix::Identity(2, 2)};
  p.mean << 1.0, -2.0;
  p.cov << 2.0, 0.6, 0.6, 1.0;
  Rng rng(5);
  const int n = 40000;
  Vector m = Vector::Zero(2);
  Matrix s = Matrix::Zero(2, 2);
  for (int k = 0; k < n; ++k) {
    const Vector x = sample_mvn(p, rng);
    m += x;
    s += (x - p.mean) * (x - p.mean).transpose();
  }
  m /= n;
  s /= n;
  CHECK((m - p.mean).norm() < 0.04);
  CHECK((s - p.cov).norm() < 0.06);
}

}

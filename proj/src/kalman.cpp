#include "aomdp/oracle.hpp"

namespace aomdp::oracle {

KalmanResult kalman_filter(double a, double q, double c, double s, std::span<const double> obs,
                           double m0, double v0) {
  if (!(q > 0.0) || !(s > 0.0)) throw std::invalid_argument("noise variances must be positive");
  KalmanResult out;
  out.mean.reserve(obs.size());
  out.var.reserve(obs.size());
  double m = m0, v = v0;
  for (double o : obs) {
    m = a * m;
    v = a * a * v + q;
    const double k = v * c / (c * c * v + s);
    m += k * (o - c * m);
    v = (1.0 - k * c) * v;
    out.mean.push_back(m);
    out.var.push_back(v);
  }
  return out;
}

}  // namespace aomdp::oracle

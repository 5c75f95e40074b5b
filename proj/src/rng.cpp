#include "aomdp/rng.hpp"

namespace aomdp {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t root, std::uint64_t user, std::uint64_t rep,
                          std::uint64_t agent, StreamPurpose purpose) {
  std::uint64_t h = splitmix64(root);
  h = splitmix64(h ^ user);
  h = splitmix64(h ^ (rep + 0x100000000ULL));
  h = splitmix64(h ^ (agent + 0x200000000ULL));
  return splitmix64(h ^ static_cast<std::uint64_t>(purpose));
}

double std_normal(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(rng);
}

double uniform01(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng);
}

}  // namespace aomdp

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace aomdp {

using Rng = std::mt19937_64;

enum class StreamPurpose : std::uint64_t { Env = 1, Smc = 2, Agent = 3, Users = 4 };

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for an independent stream keyed by (root, user, rep, agent, purpose).
std::uint64_t stream_seed(std::uint64_t root, std::uint64_t user, std::uint64_t rep,
                          std::uint64_t agent, StreamPurpose purpose);

double std_normal(Rng& rng);
double uniform01(Rng& rng);

}  // namespace aomdp

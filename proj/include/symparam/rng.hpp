#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace symparam {

using Rng = std::mt19937_64;

// Independent generator derived from one experiment seed and a stream name
// ("data", "init", "dirichlet", "shuffle", ...).
Rng make_stream(std::uint64_t seed, std::string_view name);

double uniform01(Rng& rng);       // [0, 1)
double uniform_open01(Rng& rng);  // (0, 1)
double standard_normal(Rng& rng);

std::string rng_state(const Rng& rng);
void set_rng_state(Rng& rng, const std::string& state);

}  // namespace symparam

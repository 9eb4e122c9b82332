#pragma once

#include <cstdint>

namespace bsde {

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, counter), so parallel generation order cannot change output.

/// 64-bit avalanche mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Keyed hash of a (seed, stream, counter) triple to one 64-bit word.
std::uint64_t counter_word(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

/// Uniform draw in the open interval (0, 1) from one 64-bit word.
double uniform_from_word(std::uint64_t word);

/// Inverse of the standard normal CDF (Wichura's AS 241, double precision).
double normal_quantile(double p);

/// Standard normal draw for (seed, stream, counter).
double normal_draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

} // namespace bsde

#pragma once

#include <cstdint>

#include "bpre/rng.hpp"

// Exact samplers for the count distributions behind O(1) population steps.
// Every sampler returns a draw from the exact target law for any parameter
// size; large means use transformed rejection with O(1) expected cost and
// never fall back to a normal approximation.
namespace bpre::sampling {

// Stirling-series remainder: log(n!) - [(n + 1/2) log n - n + log(2 pi)/2].
double stirling_error(double n);

// x log(x / np) + np - x, evaluated without cancellation near x = np.
double deviance_term(double x, double np);

double log_poisson_pmf(std::uint64_t k, double mean);
double log_binomial_pmf(std::uint64_t k, std::uint64_t n, double p);

std::uint64_t poisson(Rng& rng, double mean);
std::uint64_t binomial(Rng& rng, std::uint64_t trials, double p);

// Gamma(shape, scale = 1).
double gamma(Rng& rng, double shape);

// Failures before the successes-th success, success probability q.
std::uint64_t negative_binomial(Rng& rng, std::uint64_t successes, double q);

// Failures before the first success.
std::uint64_t geometric(Rng& rng, double q);

}  // namespace bpre::sampling

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "bpre/rng.hpp"

namespace bpre::testing {

// Histogram of `draws` samples over bins 0..bins-1; the last bin collects
// everything at or above it.
inline std::vector<std::uint64_t> histogram(std::size_t bins, std::size_t draws,
                                            const std::function<std::uint64_t()>& draw,
                                            std::uint64_t offset = 0) {
  std::vector<std::uint64_t> counts(bins, 0);
  for (std::size_t i = 0; i < draws; ++i) {
    const std::uint64_t x = draw() - offset;
    counts[x < bins ? x : bins - 1] += 1;
  }
  return counts;
}

// Probability vector from a log-pmf over 0..bins-1.
inline std::vector<double> pmf_table(std::size_t bins, const std::function<double(std::uint64_t)>& log_pmf) {
  std::vector<double> p(bins);
  for (std::size_t k = 0; k < bins; ++k) p[k] = std::exp(log_pmf(k));
  return p;
}

// Reference log-pmfs written directly from lgamma, independent of the
// library's deviance-based forms.
inline double lgamma_log_poisson(std::uint64_t k, double mean) {
  const auto kd = static_cast<long double>(k);
  return static_cast<double>(-static_cast<long double>(mean) + kd * std::log(static_cast<long double>(mean)) -
                             std::lgamma(kd + 1.0L));
}

inline double lgamma_log_binomial(std::uint64_t k, std::uint64_t n, double p) {
  const auto kd = static_cast<long double>(k);
  const auto nd = static_cast<long double>(n);
  return static_cast<double>(std::lgamma(nd + 1.0L) - std::lgamma(kd + 1.0L) - std::lgamma(nd - kd + 1.0L) +
                             kd * std::log(static_cast<long double>(p)) +
                             (nd - kd) * std::log1p(-static_cast<long double>(p)));
}

inline double lgamma_log_negative_binomial(std::uint64_t k, std::uint64_t r, double q) {
  const auto kd = static_cast<long double>(k);
  const auto rd = static_cast<long double>(r);
  return static_cast<double>(std::lgamma(kd + rd) - std::lgamma(kd + 1.0L) - std::lgamma(rd) +
                             rd * std::log(static_cast<long double>(q)) +
                             kd * std::log1p(-static_cast<long double>(q)));
}

}  // namespace bpre::testing

#include "bpre/sampling.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "bpre/errors.hpp"

namespace bpre::sampling {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMaxExactMean = 0x1.0p62;

// Small means use sequential inversion; beyond this the rejection samplers
// apply (their hat constants are tuned for mean >= 10).
constexpr double kInversionCutoff = 10.0;

}  // namespace

double stirling_error(double n) {
  constexpr double s0 = 1.0 / 12.0;
  constexpr double s1 = 1.0 / 360.0;
  constexpr double s2 = 1.0 / 1260.0;
  constexpr double s3 = 1.0 / 1680.0;
  constexpr double s4 = 1.0 / 1188.0;
  if (n <= 15.0) {
    if (n == 0.0) return 0.0;  // callers handle k = 0 separately
    return std::lgamma(n + 1.0) - (n + 0.5) * std::log(n) + n - 0.5 * kLog2Pi;
  }
  const double nn = n * n;
  if (n > 500.0) return (s0 - s1 / nn) / n;
  if (n > 80.0) return (s0 - (s1 - s2 / nn) / nn) / n;
  if (n > 35.0) return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n;
  return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n;
}

double deviance_term(double x, double np) {
  if (std::abs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2.0 * x * v;
    const double v2 = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v2;
      const double next = s + ej / (2 * j + 1);
      if (next == s) return next;
      s = next;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

double log_poisson_pmf(std::uint64_t k, double mean) {
  if (mean == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (k == 0) return -mean;
  const auto x = static_cast<double>(k);
  return -stirling_error(x) - deviance_term(x, mean) - 0.5 * (kLog2Pi + std::log(x));
}

double log_binomial_pmf(std::uint64_t k, std::uint64_t n, double p) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  const double q = 1.0 - p;
  const auto nd = static_cast<double>(n);
  if (p == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (q == 0.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  if (k == 0) return nd * std::log1p(-p);
  if (k == n) return nd * std::log(p);
  const auto x = static_cast<double>(k);
  const double y = nd - x;
  const double lc = stirling_error(nd) - stirling_error(x) - stirling_error(y) -
                    deviance_term(x, nd * p) - deviance_term(y, nd * q);
  return lc + 0.5 * (std::log(nd) - kLog2Pi - std::log(x) - std::log(y));
}

std::uint64_t poisson(Rng& rng, double mean) {
  if (!(mean >= 0.0) || mean > kMaxExactMean) {
    throw SimulationError("poisson: mean out of range: " + std::to_string(mean));
  }
  if (mean == 0.0) return 0;

  if (mean < kInversionCutoff) {
    // Restart only when u lands in the ~1e-16 rounding slack of the tail.
    for (;;) {
      double u = rng.uniform();
      double p = std::exp(-mean);
      std::uint64_t k = 0;
      while (u > p && k < 1000) {
        u -= p;
        ++k;
        p *= mean / static_cast<double>(k);
      }
      if (u <= p) return k;
    }
  }

  // PTRS transformed rejection (Hoermann 1993), exact log-pmf acceptance.
  const double slam = std::sqrt(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double log_inv_alpha = std::log(1.1239 + 1.1328 / (b - 3.4));
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (kd < 0.0) continue;
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
    if (us < 0.013 && v > us) continue;
    const auto k = static_cast<std::uint64_t>(kd);
    if (std::log(v) + log_inv_alpha - std::log(a / (us * us) + b) <= log_poisson_pmf(k, mean)) {
      return k;
    }
  }
}

std::uint64_t binomial(Rng& rng, std::uint64_t trials, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw SimulationError("binomial: probability out of range: " + std::to_string(p));
  }
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  if (p > 0.5) return trials - binomial(rng, trials, 1.0 - p);

  const auto n = static_cast<double>(trials);
  if (n > kMaxExactMean) throw SimulationError("binomial: trial count too large");
  const double q = 1.0 - p;

  if (n * p < kInversionCutoff) {
    const double s = p / q;
    const double a = (n + 1.0) * s;
    for (;;) {
      double u = rng.uniform();
      double r = std::exp(n * std::log1p(-p));
      std::uint64_t k = 0;
      while (u > r && k < trials && k < 1000) {
        u -= r;
        ++k;
        r *= a / static_cast<double>(k) - s;
      }
      if (u <= r) return k;
    }
  }

  // BTRS transformed rejection (Hoermann 1993), ratio f(k)/f(mode) from the
  // exact log-pmf.
  const double spq = std::sqrt(n * p * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = n * p + 0.5;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double vr = 0.92 - 4.2 / b;
  const auto mode = static_cast<std::uint64_t>(std::floor((n + 1.0) * p));
  const double log_mode_pmf = log_binomial_pmf(mode, trials, p);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform_open();
    const double us = 0.5 - std::abs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + c);
    if (kd < 0.0 || kd > n) continue;
    const auto k = static_cast<std::uint64_t>(kd);
    if (us >= 0.07 && v <= vr) return k;
    const double lhs = std::log(v * alpha / (a / (us * us) + b));
    if (lhs <= log_binomial_pmf(k, trials, p) - log_mode_pmf) return k;
  }
}

double gamma(Rng& rng, double shape) {
  if (!(shape > 0.0)) throw SimulationError("gamma: shape must be positive");
  if (shape < 1.0) {
    const double g = gamma(rng, shape + 1.0);
    return g * std::pow(rng.uniform_open(), 1.0 / shape);
  }
  // Marsaglia-Tsang; v - 1 kept separately so d * (log v - v + 1) stays
  // accurate for very large shapes.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    const double w = c * x;
    if (w <= -1.0) continue;
    const double vm1 = w * (3.0 + w * (3.0 + w));
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * (1.0 + vm1);
    if (std::log(u) < 0.5 * x2 + d * (std::log1p(vm1) - vm1)) return d * (1.0 + vm1);
  }
}

std::uint64_t negative_binomial(Rng& rng, std::uint64_t successes, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw SimulationError("negative_binomial: q must lie in (0, 1]");
  if (successes == 0 || q == 1.0) return 0;
  // Gamma-Poisson mixture is exact.
  const double rate = gamma(rng, static_cast<double>(successes)) * (1.0 - q) / q;
  return poisson(rng, rate);
}

std::uint64_t geometric(Rng& rng, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw SimulationError("geometric: q must lie in (0, 1]");
  if (q == 1.0) return 0;
  const double g = std::floor(std::log(rng.uniform_open()) / std::log1p(-q));
  if (g >= 0x1.0p63) throw SimulationError("geometric: draw exceeds integer range");
  return static_cast<std::uint64_t>(g);
}

}  // namespace bpre::sampling

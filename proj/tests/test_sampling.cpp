#include <doctest.h>

#include <cmath>
#include <vector>

#include "bpre/sampling.hpp"
#include "bpre/stats.hpp"
#include "test_support.hpp"

using namespace bpre;
using bpre::testing::histogram;
using bpre::testing::pmf_table;

namespace {

constexpr double kAlpha = 1e-3;
constexpr std::size_t kDraws = 200'000;

}  // namespace

TEST_CASE("stirling error matches long-double lgamma") {
  for (double n : {1.0, 7.0, 16.0, 40.0, 100.0, 1000.0, 1e6}) {
    const long double nl = n;
    const long double ref = std::lgamma(nl + 1.0L) - (nl + 0.5L) * std::log(nl) + nl -
                            0.5L * std::log(2.0L * 3.14159265358979323846264338327950288L);
    CHECK(sampling::stirling_error(n) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-10));
  }
}

TEST_CASE("log pmfs agree with direct lgamma evaluation") {
  for (double mean : {0.3, 4.0, 25.0, 900.0}) {
    for (std::uint64_t k : {0, 1, 3, 20, 30, 880, 950}) {
      CHECK(sampling::log_poisson_pmf(k, mean) ==
            doctest::Approx(testing::lgamma_log_poisson(k, mean)).epsilon(1e-10));
    }
  }
  for (std::uint64_t k : {0, 1, 7, 30, 99, 100}) {
    CHECK(sampling::log_binomial_pmf(k, 100, 0.3) ==
          doctest::Approx(testing::lgamma_log_binomial(k, 100, 0.3)).epsilon(1e-10));
  }
}

TEST_CASE("poisson draws follow the pmf") {
  for (double mean : {0.5, 3.0, 9.9, 10.0, 47.0, 1200.0}) {
    CAPTURE(mean);
    Rng rng(derive_path_seed(1, static_cast<std::uint64_t>(mean * 10)));
    const std::size_t bins = static_cast<std::size_t>(mean + 10 * std::sqrt(mean) + 20);
    const auto counts = histogram(bins, kDraws, [&] { return sampling::poisson(rng, mean); });
    const auto pmf = pmf_table(bins, [&](std::uint64_t k) { return testing::lgamma_log_poisson(k, mean); });
    const auto t = stats::chi_square_goodness_of_fit(counts, pmf);
    CHECK(t.p_value > kAlpha);
  }
}

TEST_CASE("poisson at huge means keeps mean and variance") {
  const double mean = std::ldexp(1.0, 41);
  Rng rng(derive_path_seed(2, 0));
  std::vector<double> xs(20'000);
  for (auto& x : xs) x = static_cast<double>(sampling::poisson(rng, mean)) - mean;
  const auto e = stats::mean_estimate(xs);
  CHECK(std::abs(e.mean) < 5.0 * std::sqrt(mean / xs.size()));
  CHECK(e.sd * e.sd == doctest::Approx(mean).epsilon(0.05));
}

TEST_CASE("binomial draws follow the pmf") {
  struct Case {
    std::uint64_t n;
    double p;
  };
  for (const Case c : {Case{20, 0.3}, Case{40, 0.2}, Case{500, 0.1}, Case{1000, 0.7}, Case{200'000, 0.45}}) {
    CAPTURE(c.n);
    CAPTURE(c.p);
    Rng rng(derive_path_seed(3, c.n));
    const double mean = static_cast<double>(c.n) * c.p;
    const double sd = std::sqrt(mean * (1 - c.p));
    const std::size_t lo = static_cast<std::size_t>(std::max(0.0, mean - 10 * sd - 5));
    const std::size_t bins = static_cast<std::size_t>(std::min<double>(c.n + 1, mean + 10 * sd + 5)) - lo + 1;
    const auto counts =
        histogram(bins, kDraws, [&] { return sampling::binomial(rng, c.n, c.p); }, lo);
    const auto pmf = pmf_table(bins, [&](std::uint64_t k) {
      return testing::lgamma_log_binomial(k + lo, c.n, c.p);
    });
    CHECK(stats::chi_square_goodness_of_fit(counts, pmf).p_value > kAlpha);
  }
}

TEST_CASE("binomial edge cases") {
  Rng rng(derive_path_seed(4, 0));
  CHECK(sampling::binomial(rng, 0, 0.5) == 0);
  CHECK(sampling::binomial(rng, 17, 0.0) == 0);
  CHECK(sampling::binomial(rng, 17, 1.0) == 17);
  const std::uint64_t big = std::uint64_t{1} << 40;
  std::vector<double> xs(5000);
  for (auto& x : xs) x = static_cast<double>(sampling::binomial(rng, big, 0.3)) - 0.3 * static_cast<double>(big);
  const auto e = stats::mean_estimate(xs);
  const double var = 0.3 * 0.7 * static_cast<double>(big);
  CHECK(std::abs(e.mean) < 5.0 * std::sqrt(var / xs.size()));
  CHECK(e.sd * e.sd == doctest::Approx(var).epsilon(0.1));
}

TEST_CASE("negative binomial draws follow the pmf") {
  for (auto [r, q] : {std::pair<std::uint64_t, double>{1, 0.5}, {50, 0.5}, {50, 0.8}, {7, 0.1}}) {
    CAPTURE(r);
    CAPTURE(q);
    Rng rng(derive_path_seed(5, r * 100 + static_cast<std::uint64_t>(q * 10)));
    const double mean = r * (1 - q) / q;
    const double sd = std::sqrt(mean / q);
    const std::size_t bins = static_cast<std::size_t>(mean + 12 * sd + 20);
    const auto counts = histogram(bins, kDraws, [&] { return sampling::negative_binomial(rng, r, q); });
    const auto pmf = pmf_table(bins, [&](std::uint64_t k) {
      return testing::lgamma_log_negative_binomial(k, r, q);
    });
    CHECK(stats::chi_square_goodness_of_fit(counts, pmf).p_value > kAlpha);
  }
}

TEST_CASE("gamma moments, large and small shape") {
  for (double shape : {0.4, 2.5, 1e10}) {
    CAPTURE(shape);
    Rng rng(derive_path_seed(6, static_cast<std::uint64_t>(shape)));
    std::vector<double> xs(50'000);
    for (auto& x : xs) x = sampling::gamma(rng, shape) - shape;
    const auto e = stats::mean_estimate(xs);
    CHECK(std::abs(e.mean) < 5.0 * std::sqrt(shape / xs.size()));
    CHECK(e.sd * e.sd == doctest::Approx(shape).epsilon(0.05));
  }
}

TEST_CASE("geometric draws follow the pmf") {
  Rng rng(derive_path_seed(7, 0));
  const double q = 0.3;
  const auto counts = histogram(60, kDraws, [&] { return sampling::geometric(rng, q); });
  const auto pmf = pmf_table(60, [&](std::uint64_t k) { return std::log(q) + k * std::log1p(-q); });
  CHECK(stats::chi_square_goodness_of_fit(counts, pmf).p_value > kAlpha);
  CHECK(sampling::geometric(rng, 1.0) == 0);
}

TEST_CASE("samplers reject invalid parameters") {
  Rng rng(derive_path_seed(8, 0));
  CHECK_THROWS(sampling::poisson(rng, -1.0));
  CHECK_THROWS(sampling::binomial(rng, 10, 1.5));
  CHECK_THROWS(sampling::negative_binomial(rng, 3, 0.0));
  CHECK_THROWS(sampling::gamma(rng, 0.0));
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <vector>

#include "bpre/errors.hpp"
#include "bpre/models.hpp"
#include "bpre/simulate.hpp"
#include "bpre/stats.hpp"
#include "test_support.hpp"

using namespace bpre;

TEST_CASE("derive_path_seed is deterministic and injective") {
  const std::uint64_t master = 0xdecafbadULL;
  CHECK(derive_path_seed(master, 0) != derive_path_seed(master, 1));
  CHECK(derive_path_seed(master, 9) == derive_path_seed(master, 9));
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1 << 21);
  for (std::uint64_t i = 0; i < (1u << 20); ++i) seen.insert(derive_path_seed(master, i).value);
  CHECK(seen.size() == (1u << 20));
}

TEST_CASE("step_exact trivial cases") {
  Rng rng(derive_path_seed(1, 0));
  CHECK(step_exact(3, TwoPoint{2, 1.0}, rng) == 6);
  CHECK(step_exact(5, ShiftedPoisson{0.0}, rng) == 5);
  CHECK_THROWS_AS(step_exact(0, ShiftedPoisson{1.0}, rng), InvalidArgument);
}

TEST_CASE("step_exact mean for z = 10, lambda = 1") {
  Rng rng(derive_path_seed(2, 0));
  std::vector<double> xs(1'000'000);
  for (auto& x : xs) x = static_cast<double>(step_exact(10, ShiftedPoisson{1.0}, rng));
  const auto e = stats::mean_estimate(xs);
  CHECK(std::abs(e.mean - 20.0) <= 5.0 * e.se);
}

TEST_CASE("step_closed_form trivial and overflow") {
  Rng rng(derive_path_seed(3, 0));
  CHECK(step_closed_form(7, ShiftedPoisson{0.0}, rng) == 7);
  CHECK(step_closed_form(7, TwoPoint{3, 1.0}, rng) == 21);
  CHECK(step_closed_form(7, ShiftedGeometric{1.0}, rng) == 7);
  CHECK_THROWS_AS(step_closed_form(std::uint64_t{1} << 62, TwoPoint{5, 1.0}, rng), SimulationError);
}

TEST_CASE("step_closed_form with z = 1 reproduces the law's pmf") {
  for (const OffspringLaw law : {OffspringLaw{ShiftedPoisson{1.3}}, OffspringLaw{ShiftedGeometric{0.4}},
                                 OffspringLaw{TwoPoint{4, 0.35}}}) {
    Rng rng(derive_path_seed(4, law.index()));
    const std::size_t bins = 40;
    const auto counts = testing::histogram(bins, 1'000'000, [&] { return step_closed_form(1, law, rng); });
    std::vector<double> pmf(bins);
    for (std::size_t k = 0; k < bins; ++k) pmf[k] = law_pmf(law, k);
    CHECK(stats::chi_square_goodness_of_fit(counts, pmf).p_value > 1e-3);
  }
}

TEST_CASE("closed-form stepping equals individual stepping at z = 50") {
  for (const OffspringLaw law : {OffspringLaw{ShiftedPoisson{1.3}}, OffspringLaw{ShiftedGeometric{0.4}},
                                 OffspringLaw{TwoPoint{4, 0.35}}}) {
    Rng rng_a(derive_path_seed(5, law.index()));
    Rng rng_b(derive_path_seed(6, law.index()));
    const std::size_t bins = 600;
    const auto closed = testing::histogram(bins, 100'000, [&] { return step_closed_form(50, law, rng_a); });
    const auto exact = testing::histogram(bins, 100'000, [&] { return step_exact(50, law, rng_b); });
    CHECK(stats::chi_square_homogeneity(closed, exact).p_value > 1e-3);
  }
}

TEST_CASE("step_asymptotic") {
  Rng rng(derive_path_seed(7, 0));
  for (double log_z : {30.0, 55.5, 1e4}) {
    CHECK(step_asymptotic(log_z, TwoPoint{2, 1.0}, rng) == log_z + std::log(2.0));
  }
  const double log_z = 50.0 * std::log(2.0);
  std::vector<double> inc(100'000);
  for (auto& x : inc) x = step_asymptotic(log_z, ShiftedPoisson{1.0}, rng) - log_z;
  const auto e = stats::mean_estimate(inc);
  CHECK(e.sd <= 1e-7);
  CHECK(e.sd == doctest::Approx(0.5 * std::ldexp(1.0, -25)).epsilon(0.02));
}

TEST_CASE("hybrid and fully exact simulation agree in law") {
  const EnvironmentSpec spec = reference_environment();
  SimConfig hybrid{30, std::uint64_t{1} << 20, 99, {}};
  SimConfig exact{30, kUnboundedThreshold, 199, {}};
  std::vector<double> a;
  std::vector<double> b;
  bool crossed = false;
  for (std::uint64_t i = 0; i < 10'000; ++i) {
    const PathRecord ra = simulate_path(spec, hybrid, i).back();
    const PathRecord rb = simulate_path(spec, exact, i).back();
    crossed = crossed || ra.regime == Regime::Asymptotic;
    CHECK(rb.regime == Regime::Exact);
    a.push_back(ra.log_z);
    b.push_back(rb.log_z);
  }
  CHECK(crossed);
  CHECK(stats::ks_two_sample(a, b).p_value > 1e-3);
}

TEST_CASE("deterministic doubling path") {
  SimConfig cfg{10, kDefaultExactThreshold, 1, {0, 5}};
  const auto records = simulate_path(doubling_environment(), cfg, 0);
  REQUIRE(records.size() == 3);
  CHECK(records[0].n == 0);
  CHECK(records[0].z_exact == 1);
  CHECK(records[1].z_exact == 32);
  CHECK(records[2].n == 10);
  CHECK(records[2].z_exact == 1024);
  CHECK(records[2].s == doctest::Approx(10 * std::log(2.0)));
  CHECK(std::abs(records[2].log_w) < 1e-12);
}

TEST_CASE("path invariants across the regime switch") {
  const EnvironmentSpec spec = reference_environment();
  SimConfig cfg{120, std::uint64_t{1} << 16, 5, {}};
  for (std::uint64_t g = 0; g <= cfg.horizon; ++g) cfg.record_schedule.push_back(g);
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto records = simulate_path(spec, cfg, i);
    REQUIRE(records.size() == cfg.horizon + 1);
    for (std::size_t g = 0; g < records.size(); ++g) {
      const PathRecord& r = records[g];
      CHECK(std::abs(r.log_z - r.s - r.log_w) <= 1e-9);
      if (r.z_exact) CHECK(*r.z_exact >= 1);
      if (g > 0) CHECK(r.s >= records[g - 1].s);
    }
    CHECK(records.back().regime == Regime::Asymptotic);
  }
}

TEST_CASE("martingale mean of W_n at n = 50") {
  const EnvironmentSpec spec = reference_environment();
  SimConfig cfg{50, kDefaultExactThreshold, 21, {}};
  std::vector<double> w;
  for (std::uint64_t i = 0; i < 10'000; ++i) w.push_back(std::exp(simulate_path(spec, cfg, i).back().log_w));
  const auto e = stats::mean_estimate(w);
  CHECK(std::abs(e.mean - 1.0) <= 5.0 * e.se);
}

TEST_CASE("paths are reproducible") {
  const EnvironmentSpec spec = interval_environment(Family::ShiftedGeometric, 0.3, 0.7);
  SimConfig cfg{80, 1000, 77, {10, 40}};
  const auto a = simulate_path(spec, cfg, 3);
  const auto b = simulate_path(spec, cfg, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].log_z == b[i].log_z);
    CHECK(a[i].log_w == b[i].log_w);
    CHECK(a[i].z_exact == b[i].z_exact);
  }
  CHECK(simulate_path(spec, cfg, 4).back().log_z != a.back().log_z);
}

TEST_CASE("SimConfig validation") {
  CHECK_THROWS_AS((SimConfig{0, 10, 0, {}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((SimConfig{10, 1, 0, {}}).validate(), InvalidArgument);
  CHECK_THROWS_AS((SimConfig{10, 10, 0, {11}}).validate(), InvalidArgument);
}

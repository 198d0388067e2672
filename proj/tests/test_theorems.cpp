#include <doctest.h>

#include <cmath>
#include <random>

#include "bpre/errors.hpp"
#include "bpre/theorems.hpp"

using namespace bpre;

namespace {

ExperimentConfig reference_config(std::vector<std::uint64_t> grid, std::uint64_t paths) {
  ExperimentConfig cfg;
  cfg.spec = reference_environment();
  cfg.n_grid = std::move(grid);
  cfg.paths = paths;
  cfg.master_seed = 20240611;
  return cfg;
}

}  // namespace

TEST_CASE("fit_power_law on exact and synthetic laws") {
  SUBCASE("inverse law") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {1.0, 2.0, 5.0, 10.0, 100.0}) pts.emplace_back(x, 1.0 / x);
    const auto fit = fit_power_law(pts);
    CHECK(fit.slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(std::abs(fit.slope + 1.0) <= 1e-9);
    CHECK(fit.slope_ci.first <= fit.slope);
    CHECK(fit.slope_ci.second >= fit.slope);
  }
  SUBCASE("constant") {
    std::vector<std::pair<double, double>> pts;
    for (double x : {3.0, 9.0, 27.0, 81.0}) pts.emplace_back(x, 4.2);
    const auto fit = fit_power_law(pts);
    CHECK(fit.slope_ci.first <= 0.0);
    CHECK(fit.slope_ci.second >= 0.0);
  }
  SUBCASE("one percent noise around x^-1/2") {
    std::mt19937_64 gen(7);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 12; ++i) {
      const double x = std::pow(2.0, i);
      pts.emplace_back(x, std::pow(x, -0.5) * (1.0 + noise(gen)));
    }
    const auto fit = fit_power_law(pts);
    CHECK(fit.slope_ci.first <= -0.5);
    CHECK(fit.slope_ci.second >= -0.5);
  }
  SUBCASE("bootstrap replicates set the interval") {
    std::vector<std::pair<double, double>> pts{{1, 1}, {10, 0.1}, {100, 0.01}};
    std::vector<std::vector<std::pair<double, double>>> reps;
    for (double s : {-1.1, -1.0, -0.9}) {
      reps.push_back({{1, 1}, {10, std::pow(10.0, s)}, {100, std::pow(100.0, s)}});
    }
    const auto fit = fit_power_law(pts, reps);
    CHECK(fit.slope_ci.first == doctest::Approx(-1.1).epsilon(0.02));
    CHECK(fit.slope_ci.second == doctest::Approx(-0.9).epsilon(0.02));
  }
  SUBCASE("nonpositive values are dropped, too few survivors fail") {
    std::vector<std::pair<double, double>> pts{{1, 1}, {2, 0.5}, {4, 0.0}, {8, 0.125}};
    const auto fit = fit_power_law(pts);
    CHECK(fit.warnings.size() == 1);
    CHECK(fit.points.size() == 3);
    std::vector<std::pair<double, double>> bad{{1, 1}, {2, -1}, {4, 0.25}};
    CHECK_THROWS_AS(fit_power_law(bad), StatisticsError);
  }
}

TEST_CASE("experiment config validation") {
  auto cfg = reference_config({10, 5}, 1000);
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.n_grid = {5, 10};
  cfg.paths = 99;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.paths = 100;
  cfg.orders = {0.5};
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.orders = {0.9, 2.0};
  CHECK_NOTHROW(cfg.validate());
  CHECK_THROWS_AS(cfg.validate(4), InvalidArgument);
}

TEST_CASE("lln on deterministic doubling is exact") {
  ExperimentConfig cfg;
  cfg.spec = doubling_environment();
  cfg.n_grid = {5, 60, 500};
  cfg.paths = 100;
  const auto report = run_lln(cfg);
  CHECK(report.mu == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  for (const auto& row : report.rows) {
    CHECK(row.coverage == 1.0);
    CHECK(std::abs(row.mean - std::log(2.0)) <= 1e-12);
    CHECK(row.mean_within_5se);
  }
}

TEST_CASE("lln on the reference model") {
  const auto report = run_lln(reference_config({100, 1000}, 500));
  for (const auto& row : report.rows) {
    CHECK(row.coverage >= 0.97);
    CHECK(row.mean_within_5se);
  }
}

TEST_CASE("lil rejects sigma = 0 and short horizons") {
  ExperimentConfig cfg;
  cfg.spec = doubling_environment();
  cfg.n_grid = {1000};
  cfg.paths = 100;
  CHECK_THROWS_AS(run_lil(cfg), StatisticsError);
  auto ref = reference_config({10}, 100);
  CHECK_THROWS_AS(run_lil(ref), StatisticsError);
}

TEST_CASE("lil running extremes agree with the oracle at moderate horizon") {
  const auto report = run_lil(reference_config({20000}, 200));
  CHECK(report.process.running_max.size() == 200);
  CHECK(report.ks_max_p > 0.001);
  CHECK(report.ks_min_p > 0.001);
  CHECK(report.oracle.max_band.first < report.oracle.max_band.second);
  CHECK(report.traces.size() == 10);
  CHECK(report.traces[0].size() == report.trace_k.size());
  CHECK(report.trace_k.front() == 16);
  CHECK(report.trace_k.back() == 20000);
}

TEST_CASE("invariance covariance on the oracle and the process") {
  auto cfg = reference_config({256}, 20000);
  const auto report = run_invariance(cfg, 0.05);
  CHECK(report.oracle.passes);
  CHECK(report.process.passes);
  CHECK(report.process.covariance[2][2] == doctest::Approx(1.0).epsilon(0.05));
  CHECK(report.process.covariance[0][2] == doctest::Approx(0.25).epsilon(0.2));
  CHECK(report.grid_max_ks_statistic < 0.1);
  CHECK(report.max_cdf_reflection.front() == 0.0);

  cfg.source = PathSource::GaussianWalk;
  const auto self = run_invariance(cfg, 0.05);
  CHECK(self.process.passes);
  CHECK(self.grid_max_ks_p > 0.001);
}

TEST_CASE("clt rate on exact normal samples is noise dominated") {
  auto cfg = reference_config({16, 64, 256, 1024}, 2000);
  cfg.source = PathSource::GaussianWalk;
  cfg.bootstrap = 20;
  const auto report = run_clt_rate(cfg);
  const auto* w1 = report.metric("W1");
  REQUIRE(w1 != nullptr);
  CHECK(w1->noise_dominated);
  CHECK_FALSE(w1->fit.has_value());
}

TEST_CASE("clt rate pipeline on the associated walk and the process") {
  auto cfg = reference_config({16, 64, 256, 1024}, 20000);
  cfg.bootstrap = 40;
  cfg.source = PathSource::AssociatedWalk;
  const auto walk = run_clt_rate(cfg);
  const auto* w1 = walk.metric("W1");
  REQUIRE(w1 != nullptr);
  REQUIRE(w1->fit.has_value());
  CHECK(w1->fit->slope <= -0.4);
  for (const auto& h : walk.horizons) CHECK(std::abs(h.zeta1_minus_w1) <= 1e-9);

  cfg.source = PathSource::Bpre;
  const auto bpre = run_clt_rate(cfg);
  for (const auto& h : bpre.horizons) {
    CHECK(std::abs(h.zeta1_minus_w1) <= 1e-9);
    CHECK(std::abs(h.sample_mean) < 1.0);
  }
  REQUIRE(bpre.metric("zeta2") != nullptr);
  REQUIRE(bpre.metric("W2") != nullptr);
  // Normalization: variance approaches 1 at the largest horizon.
  const auto& last = bpre.horizons.back();
  CHECK(std::abs(last.sample_variance - 1.0) <= 5.0 * last.variance_se + 0.02);
}

TEST_CASE("clt rate reruns are bit identical") {
  auto cfg = reference_config({16, 32, 64, 128}, 500);
  cfg.bootstrap = 10;
  const auto a = to_rows(run_clt_rate(cfg));
  cfg.threads = 3;
  const auto b = to_rows(run_clt_rate(cfg));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].statistic == b[i].statistic);
    CHECK(a[i].value == b[i].value);
  }
}

TEST_CASE("log W moments") {
  SUBCASE("doubling gives zero") {
    ExperimentConfig cfg;
    cfg.spec = doubling_environment();
    cfg.n_grid = {10, 20, 40};
    cfg.paths = 100;
    const auto report = run_logw_moments(cfg, 3.0);
    for (const auto& row : report.rows) CHECK(row.estimate == 0.0);
    CHECK(report.trend_slope == 0.0);
  }
  SUBCASE("stable under doubling path count") {
    auto cfg = reference_config({10, 20, 40}, 4000);
    const auto a = run_logw_moments(cfg, 3.0);
    cfg.paths = 8000;
    cfg.master_seed += 1;
    const auto b = run_logw_moments(cfg, 3.0);
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      const double se = std::hypot(a.rows[i].se, b.rows[i].se);
      CHECK(std::abs(a.rows[i].estimate - b.rows[i].estimate) <= 2.0 * se + 1e-12);
      CHECK(a.rows[i].estimate >= 0.0);
    }
  }
  SUBCASE("q out of range") {
    CHECK_THROWS_AS(run_logw_moments(reference_config({10, 20}, 100), 3.5), InvalidArgument);
  }
}

TEST_CASE("laplace transform of W") {
  auto cfg = reference_config({30}, 5000);
  cfg.bootstrap = 50;
  const auto report = run_laplace_tail(cfg, {1e-9, 1.0, 3.0, 10.0, 30.0});
  REQUIRE(report.rows.size() == 5);
  CHECK(report.truncated_t.empty());
  CHECK(std::abs(report.rows[0].estimate - 1.0) <= 1e-6);
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].estimate < report.rows[i - 1].estimate);
  }
  REQUIRE(report.a_hat.has_value());
  CHECK(*report.a_hat > 0.0);
  CHECK(report.a_hat_ci.first <= *report.a_hat);
  CHECK(report.a_hat_ci.second >= *report.a_hat);

  CHECK_THROWS_AS(run_laplace_tail(cfg, {10.0, 1.0}), InvalidArgument);
}

TEST_CASE("laplace grid truncates below resolution") {
  auto cfg = reference_config({30}, 200);
  cfg.bootstrap = 10;
  const auto report = run_laplace_tail(cfg, {1.0, 10.0, 100.0, 1e6, 1e8});
  CHECK_FALSE(report.truncated_t.empty());
  CHECK(report.truncated_t.back() == 1e8);
}

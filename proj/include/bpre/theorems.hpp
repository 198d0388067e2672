#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bpre/distances.hpp"
#include "bpre/models.hpp"
#include "bpre/simulate.hpp"

namespace bpre {

// What stands in for log Z_n in an experiment.
enum class PathSource {
  Bpre,            // the branching process itself
  GaussianWalk,    // n mu + sigma * (sum of n iid standard normals)
  AssociatedWalk,  // S_n, the environment walk alone (log W_n dropped)
};

const char* source_name(PathSource source);

struct ExperimentConfig {
  EnvironmentSpec spec;
  std::vector<std::uint64_t> n_grid;
  std::uint64_t paths = 1000;  // per horizon
  std::uint64_t master_seed = 0;
  double delta = 0.9;
  std::vector<double> orders{1.0, 2.0};
  std::uint64_t exact_threshold = kDefaultExactThreshold;
  std::uint64_t bootstrap = 200;
  PathSource source = PathSource::Bpre;
  unsigned threads = 0;  // 0: BPRE_THREADS or hardware concurrency

  // Throws InvalidArgument; `min_grid` is the experiment's own minimum.
  void validate(std::size_t min_grid = 1) const;
};

// One CSV row: n, statistic, value, se, method.
struct ReportRow {
  std::uint64_t n = 0;
  std::string statistic;
  double value = 0.0;
  std::optional<double> se;
  std::string method;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::pair<double, double> slope_ci{0.0, 0.0};
  std::vector<std::pair<double, double>> points;  // (log x, log y)
  std::vector<std::string> warnings;
};

/// Least squares of log y on log x.
///
/// Points with y <= 0 are dropped with a warning; fewer than three
/// survivors throws StatisticsError. Without replicates the slope CI is the
/// 95% Student-t interval; with replicates (bootstrap re-estimates of the
/// same points) it is their 2.5/97.5 percentile range.
RateFit fit_power_law(const std::vector<std::pair<double, double>>& points,
                      const std::vector<std::vector<std::pair<double, double>>>& replicates = {});

struct LlnRow {
  std::uint64_t n = 0;
  double coverage = 0.0;  // fraction with |log Z_n / n - mu| <= 3 sigma / sqrt(n)
  double mean = 0.0;      // of log Z_n / n
  double se = 0.0;
  std::pair<double, double> ci{0.0, 0.0};
  bool mean_within_5se = false;
};

struct LlnReport {
  PathSource source = PathSource::Bpre;
  double mu = 0.0;
  double sigma = 0.0;
  std::uint64_t paths = 0;
  std::vector<LlnRow> rows;
};

LlnReport run_lln(const ExperimentConfig& cfg);

struct ExtremeSummary {
  std::vector<double> running_max;  // per path, of L_k
  std::vector<double> running_min;
  std::pair<double, double> max_band{0.0, 0.0};  // q05, q95
  std::pair<double, double> min_band{0.0, 0.0};
};

struct LilReport {
  std::uint64_t horizon = 0;
  std::uint64_t first_k = 16;
  double mu = 0.0;
  double sigma = 0.0;
  ExtremeSummary process;
  ExtremeSummary oracle;  // Gaussian walk with the same mu, sigma
  double ks_max_statistic = 0.0;
  double ks_max_p = 0.0;
  double ks_min_statistic = 0.0;
  double ks_min_p = 0.0;
  double fraction_max_in_band = 0.0;
  double fraction_min_in_band = 0.0;
  // (log Z_k - k mu) / sqrt(k log log k) on a geometric schedule, a few paths.
  std::vector<std::uint64_t> trace_k;
  std::vector<std::vector<double>> traces;
};

// L_k = (log Z_k - k mu) / (sigma sqrt(2 k log log k)) for k >= 16, whose
// limsup / liminf are +1 / -1.
LilReport run_lil(const ExperimentConfig& cfg);

struct CovarianceCheck {
  std::array<std::array<double, 3>, 3> covariance{};
  double max_abs_deviation = 0.0;  // vs min(s, t)
  bool passes = false;
};

struct InvarianceReport {
  std::uint64_t horizon = 0;
  std::array<double, 3> times{0.25, 0.5, 1.0};
  double tolerance = 0.05;
  CovarianceCheck process;
  CovarianceCheck oracle;
  // max_j Y_j compared with the oracle walk on the same grid.
  double grid_max_ks_statistic = 0.0;
  double grid_max_ks_p = 0.0;
  // Empirical P(max_j Y_j <= x), the oracle's, and 2 Phi(x) - 1.
  std::vector<double> max_x;
  std::vector<double> max_cdf_process;
  std::vector<double> max_cdf_oracle;
  std::vector<double> max_cdf_reflection;
};

InvarianceReport run_invariance(const ExperimentConfig& cfg, double tolerance = 0.05);

struct CltPoint {
  std::uint64_t n = 0;
  double raw = 0.0;
  double floor_mean = 0.0;
  double floor_sd = 0.0;
  double corrected = 0.0;
  bool resolved = false;
  DistanceMethod method = DistanceMethod::QuantileCoupling;
  bool exact = true;
};

struct CltMetric {
  std::string name;  // "W1", "W2", "W0.5", "zeta1", "zeta2"
  double order = 1.0;
  std::vector<CltPoint> points;
  bool noise_dominated = false;
  std::optional<RateFit> fit;
  std::size_t bootstrap_used = 0;
};

struct CltHorizon {
  std::uint64_t n = 0;
  double sample_mean = 0.0;
  double sample_variance = 0.0;
  double variance_se = 0.0;
  double ks = 0.0;
  double zeta1_minus_w1 = 0.0;
  std::pair<double, double> zeta2_shift{0.0, 0.0};  // recentering of (sample, reference)
};

struct CltRateReport {
  PathSource source = PathSource::Bpre;
  std::uint64_t paths = 0;
  std::size_t control_replicates = 0;
  std::vector<CltHorizon> horizons;
  std::vector<CltMetric> metrics;

  const CltMetric* metric(const std::string& name) const;
};

inline constexpr std::size_t kControlReplicates = 8;

CltRateReport run_clt_rate(const ExperimentConfig& cfg);

struct MomentRow {
  double x = 0.0;  // n for log W moments, t for the Laplace transform
  double estimate = 0.0;
  double se = 0.0;
  double mean_log_w = 0.0;  // a_n
  double mean_log_w_se = 0.0;
};

struct MomentReport {
  std::string kind;  // "logw_moments" or "laplace_tail"
  double q = 0.0;
  std::uint64_t horizon = 0;
  std::uint64_t paths = 0;
  std::vector<MomentRow> rows;
  double trend_slope = 0.0;
  std::pair<double, double> trend_ci{0.0, 0.0};
  // Laplace tail only: fitted exponent a_hat = -slope of log psi vs log t.
  std::optional<double> a_hat;
  std::pair<double, double> a_hat_ci{0.0, 0.0};
  std::vector<double> truncated_t;
  std::optional<RateFit> fit;
};

MomentReport run_logw_moments(const ExperimentConfig& cfg, double q);
// psi(t) = E exp(-t W_n*) at n* = n_grid.back(). The grid is cut at the first t
// with psi below 10 / paths; the power-law fit uses the kept t >= 1.
MomentReport run_laplace_tail(const ExperimentConfig& cfg, const std::vector<double>& t_grid);

std::vector<ReportRow> to_rows(const LlnReport& r);
std::vector<ReportRow> to_rows(const LilReport& r);
std::vector<ReportRow> to_rows(const InvarianceReport& r);
std::vector<ReportRow> to_rows(const CltRateReport& r);
std::vector<ReportRow> to_rows(const MomentReport& r);

}  // namespace bpre

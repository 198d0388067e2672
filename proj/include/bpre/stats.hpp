#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace bpre::stats {

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
  double sd = 0.0;
};

// Mean, standard deviation and standard error, summed in index order.
MeanEstimate mean_estimate(std::span<const double> xs);

double sample_variance(std::span<const double> xs);

// Linear interpolation between order statistics (type 7).
double quantile(std::span<const double> sorted, double prob);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
};

// Survival function of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

/// Two-sample Kolmogorov-Smirnov test on continuous data (asymptotic p-value
/// with the Stephens small-sample correction).
TestResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Chi-square test of homogeneity for two histograms over integer bins.
/// Bins are pooled from the upper tail until every expected count is >= 5.
TestResult chi_square_homogeneity(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b);

/// Chi-square goodness of fit of observed counts to a pmf over bins
/// 0..observed.size()-1; the last bin absorbs the remaining mass.
TestResult chi_square_goodness_of_fit(std::span<const std::uint64_t> observed,
                                      std::span<const double> pmf);

double chi_square_survival(double statistic, double dof);
double student_t_quantile(double prob, double dof);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // classical OLS standard error
  double residual_sd = 0.0;
};

// Ordinary least squares; needs at least two distinct x.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace bpre::stats

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace bpre {

/// Sorted, finite sample with uniform weights.
class EmpiricalSample {
 public:
  EmpiricalSample() = default;
  // Sorts; throws InvalidArgument on non-finite entries.
  explicit EmpiricalSample(std::vector<double> values);

  static EmpiricalSample from_sorted(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  double mean() const;

  EmpiricalSample shifted(double offset) const;
  EmpiricalSample scaled(double factor) const;

 private:
  std::vector<double> values_;
};

enum class DistanceMethod { QuantileCoupling, Assignment, CdfIntegral, DoubleCdfIntegral };

std::string_view method_name(DistanceMethod method);

struct DistanceEstimate {
  double value = 0.0;
  double order = 1.0;
  DistanceMethod method = DistanceMethod::QuantileCoupling;
  // False when the value is only an upper bound (monotone coupling, r < 1).
  bool exact = true;
  std::optional<double> mc_se;
  // Shift applied to each sample by the recentering mode, as (a, b).
  std::optional<std::pair<double, double>> recentering;
};

enum class SizeMismatch { Fail, Interpolate };

// Largest instance handed to the O(m^3) assignment solver.
inline constexpr std::size_t kAssignmentCap = 512;

double normal_cdf(double x);

// Quantile of the standard normal; throws InvalidArgument outside (0, 1).
double normal_quantile(double u);

// m equal-mass atoms at the midpoint quantiles (i - 1/2) / m.
EmpiricalSample discretize_normal(std::size_t m);

/// Wasserstein distance of order r in (0, 2].
///
/// The 1/r root is taken only for r > 1. For r >= 1 the monotone coupling is
/// optimal and the value is exact (unequal sizes are handled by integrating
/// the quantile functions). For r < 1 an exact assignment is solved up to
/// kAssignmentCap atoms; larger instances get the monotone-coupling value
/// flagged as an upper bound.
DistanceEstimate wasserstein(const EmpiricalSample& a, const EmpiricalSample& b, double r,
                             SizeMismatch on_mismatch = SizeMismatch::Fail);

// Monotone-coupling transport cost: integral over u of |F^-1(u) - G^-1(u)|^r.
double sorted_coupling_cost(const EmpiricalSample& a, const EmpiricalSample& b, double r);

// Integral of |F_a - F_b|.
DistanceEstimate zolotarev_1(const EmpiricalSample& a, const EmpiricalSample& b);

/// Order-2 Zolotarev distance for samples with equal means: the integral of
/// |Psi| with Psi(x) the integral of (F_a - F_b) up to x.
///
/// Throws StatisticsError when the means differ by more than `mean_tolerance`
/// unless `recenter` is set, in which case both samples are shifted to mean 0
/// and the shifts are reported.
DistanceEstimate zolotarev_2_equal_mean(const EmpiricalSample& a, const EmpiricalSample& b,
                                        bool recenter = false, double mean_tolerance = 1e-8);

// sup |F_m - Phi|.
double ks_statistic(const EmpiricalSample& a);

// Minimal mean cost (1/m) sum |x_i - y_sigma(i)|^r over permutations sigma.
// Requires equal sizes and at most kAssignmentCap atoms.
double assignment_oracle(const EmpiricalSample& a, const EmpiricalSample& b, double r);

}  // namespace bpre

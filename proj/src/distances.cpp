#include "bpre/distances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "bpre/errors.hpp"

namespace bpre {

namespace {

double cost(double x, double y, double r) {
  const double d = std::abs(x - y);
  if (r == 1.0) return d;
  if (r == 2.0) return d * d;
  return std::pow(d, r);
}

// Neumaier-compensated mean.
double compensated_mean(std::span<const double> xs) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  return (sum + carry) / static_cast<double>(xs.size());
}

void require_nonempty(const EmpiricalSample& a, const EmpiricalSample& b, const char* who) {
  if (a.empty() || b.empty()) throw InvalidArgument(std::string(who) + ": empty sample");
}

}  // namespace

EmpiricalSample::EmpiricalSample(std::vector<double> values) : values_(std::move(values)) {
  for (double x : values_) {
    if (!std::isfinite(x)) throw InvalidArgument("EmpiricalSample: non-finite entry");
  }
  std::sort(values_.begin(), values_.end());
}

EmpiricalSample EmpiricalSample::from_sorted(std::vector<double> values) {
  if (!std::is_sorted(values.begin(), values.end())) {
    throw InvalidArgument("EmpiricalSample::from_sorted: values are not sorted");
  }
  EmpiricalSample out;
  out.values_ = std::move(values);
  for (double x : out.values_) {
    if (!std::isfinite(x)) throw InvalidArgument("EmpiricalSample: non-finite entry");
  }
  return out;
}

double EmpiricalSample::mean() const {
  if (values_.empty()) return 0.0;
  return compensated_mean(values_);
}

EmpiricalSample EmpiricalSample::shifted(double offset) const {
  EmpiricalSample out;
  out.values_.reserve(values_.size());
  for (double x : values_) out.values_.push_back(x + offset);
  return out;
}

EmpiricalSample EmpiricalSample::scaled(double factor) const {
  EmpiricalSample out;
  out.values_.reserve(values_.size());
  for (double x : values_) out.values_.push_back(x * factor);
  if (factor < 0.0) std::reverse(out.values_.begin(), out.values_.end());
  return out;
}

std::string_view method_name(DistanceMethod method) {
  switch (method) {
    case DistanceMethod::QuantileCoupling:
      return "quantile_coupling";
    case DistanceMethod::Assignment:
      return "assignment";
    case DistanceMethod::CdfIntegral:
      return "cdf_integral";
    case DistanceMethod::DoubleCdfIntegral:
      return "double_cdf_integral";
  }
  return "unknown";
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw InvalidArgument("normal_quantile: argument must lie in (0, 1)");
  }
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

EmpiricalSample discretize_normal(std::size_t m) {
  if (m < 1) throw InvalidArgument("discretize_normal: m must be >= 1");
  std::vector<double> atoms(m);
  const auto md = static_cast<double>(m);
  // Lower half from the quantile, upper half mirrored: exact symmetry.
  for (std::size_t i = 0; i < m / 2; ++i) {
    const double x = normal_quantile((static_cast<double>(i) + 0.5) / md);
    atoms[i] = x;
    atoms[m - 1 - i] = -x;
  }
  if (m % 2 == 1) atoms[m / 2] = 0.0;
  return EmpiricalSample::from_sorted(std::move(atoms));
}

double sorted_coupling_cost(const EmpiricalSample& a, const EmpiricalSample& b, double r) {
  require_nonempty(a, b, "sorted_coupling_cost");
  const auto xs = a.values();
  const auto ys = b.values();
  if (xs.size() == ys.size()) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) total += cost(xs[i], ys[i], r);
    return total / static_cast<double>(xs.size());
  }
  // Quantile functions are step functions with breaks at i/na and j/nb.
  const auto na = static_cast<double>(xs.size());
  const auto nb = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double u = 0.0;
  double total = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double next_a = static_cast<double>(i + 1) / na;
    const double next_b = static_cast<double>(j + 1) / nb;
    const double next = std::min(next_a, next_b);
    total += (next - u) * cost(xs[i], ys[j], r);
    u = next;
    if (next_a <= next) ++i;
    if (next_b <= next) ++j;
  }
  return total;
}

DistanceEstimate wasserstein(const EmpiricalSample& a, const EmpiricalSample& b, double r,
                             SizeMismatch on_mismatch) {
  require_nonempty(a, b, "wasserstein");
  if (!(r > 0.0 && r <= 2.0)) throw InvalidArgument("wasserstein: order must lie in (0, 2]");
  if (a.size() != b.size() && on_mismatch == SizeMismatch::Fail) {
    throw InvalidArgument("wasserstein: sample sizes differ (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  }
  DistanceEstimate out;
  out.order = r;
  if (r >= 1.0) {
    const double c = sorted_coupling_cost(a, b, r);
    out.value = r > 1.0 ? std::pow(c, 1.0 / r) : c;
    out.method = DistanceMethod::QuantileCoupling;
    out.exact = true;
    return out;
  }
  if (a.size() == b.size() && a.size() <= kAssignmentCap) {
    out.value = assignment_oracle(a, b, r);
    out.method = DistanceMethod::Assignment;
    out.exact = true;
    return out;
  }
  out.value = sorted_coupling_cost(a, b, r);
  out.method = DistanceMethod::QuantileCoupling;
  out.exact = false;
  return out;
}

DistanceEstimate zolotarev_1(const EmpiricalSample& a, const EmpiricalSample& b) {
  require_nonempty(a, b, "zolotarev_1");
  const auto xs = a.values();
  const auto ys = b.values();
  const auto na = static_cast<double>(xs.size());
  const auto nb = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double x = std::min(xs.front(), ys.front());
  double total = 0.0;
  while (i < xs.size() || j < ys.size()) {
    const double next = (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) ? xs[i] : ys[j];
    const double gap = std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb);
    total += gap * (next - x);
    x = next;
    while (i < xs.size() && xs[i] == next) ++i;
    while (j < ys.size() && ys[j] == next) ++j;
  }
  DistanceEstimate out;
  out.value = total;
  out.order = 1.0;
  out.method = DistanceMethod::CdfIntegral;
  return out;
}

DistanceEstimate zolotarev_2_equal_mean(const EmpiricalSample& a, const EmpiricalSample& b,
                                        bool recenter, double mean_tolerance) {
  require_nonempty(a, b, "zolotarev_2_equal_mean");
  const double mean_a = a.mean();
  const double mean_b = b.mean();
  DistanceEstimate out;
  out.order = 2.0;
  out.method = DistanceMethod::DoubleCdfIntegral;

  EmpiricalSample ca;
  EmpiricalSample cb;
  const EmpiricalSample* pa = &a;
  const EmpiricalSample* pb = &b;
  if (recenter) {
    ca = a.shifted(-mean_a);
    cb = b.shifted(-mean_b);
    pa = &ca;
    pb = &cb;
    out.recentering = std::make_pair(-mean_a, -mean_b);
  } else if (std::abs(mean_a - mean_b) > mean_tolerance) {
    throw StatisticsError("zolotarev_2_equal_mean: means differ by " +
                          std::to_string(mean_a - mean_b) +
                          "; the order-2 distance is infinite without recentering");
  }

  const auto xs = pa->values();
  const auto ys = pb->values();
  const auto na = static_cast<double>(xs.size());
  const auto nb = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double x = std::min(xs.front(), ys.front());
  double psi = 0.0;
  double total = 0.0;
  while (i < xs.size() || j < ys.size()) {
    const double next = (j == ys.size() || (i < xs.size() && xs[i] <= ys[j])) ? xs[i] : ys[j];
    const double h = next - x;
    if (h > 0.0) {
      // Psi is linear on [x, next]; integrate |Psi| exactly.
      const double slope = static_cast<double>(i) / na - static_cast<double>(j) / nb;
      const double psi_next = psi + slope * h;
      if ((psi >= 0.0) == (psi_next >= 0.0) || psi == 0.0 || psi_next == 0.0) {
        total += 0.5 * h * (std::abs(psi) + std::abs(psi_next));
      } else {
        total += 0.5 * h * (psi * psi + psi_next * psi_next) / (std::abs(psi) + std::abs(psi_next));
      }
      psi = psi_next;
    }
    x = next;
    while (i < xs.size() && xs[i] == next) ++i;
    while (j < ys.size() && ys[j] == next) ++j;
  }
  out.value = total;
  return out;
}

double ks_statistic(const EmpiricalSample& a) {
  if (a.empty()) throw InvalidArgument("ks_statistic: empty sample");
  const auto xs = a.values();
  const auto m = static_cast<double>(xs.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double phi = normal_cdf(xs[i]);
    sup = std::max(sup, static_cast<double>(i + 1) / m - phi);
    sup = std::max(sup, phi - static_cast<double>(i) / m);
  }
  return sup;
}

double assignment_oracle(const EmpiricalSample& a, const EmpiricalSample& b, double r) {
  if (a.size() != b.size()) throw InvalidArgument("assignment_oracle: sample sizes differ");
  if (a.size() > kAssignmentCap) {
    throw InvalidArgument("assignment_oracle: size " + std::to_string(a.size()) +
                          " exceeds the cap of " + std::to_string(kAssignmentCap));
  }
  if (!(r > 0.0)) throw InvalidArgument("assignment_oracle: order must be positive");
  const std::size_t n = a.size();
  if (n == 0) return 0.0;
  const auto xs = a.values();
  const auto ys = b.values();

  // Hungarian method with row/column potentials, 1-based with a sentinel
  // column 0.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> row_pot(n + 1, 0.0);
  std::vector<double> col_pot(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0);  // column -> row
  std::vector<std::size_t> way(n + 1, 0);
  std::vector<double> min_slack(n + 1);
  std::vector<char> used(n + 1);
  for (std::size_t row = 1; row <= n; ++row) {
    match[0] = row;
    std::size_t col0 = 0;
    std::fill(min_slack.begin(), min_slack.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[col0] = 1;
      const std::size_t row0 = match[col0];
      double delta = kInf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= n; ++col) {
        if (used[col]) continue;
        const double reduced = cost(xs[row0 - 1], ys[col - 1], r) - row_pot[row0] - col_pot[col];
        if (reduced < min_slack[col]) {
          min_slack[col] = reduced;
          way[col] = col0;
        }
        if (min_slack[col] < delta) {
          delta = min_slack[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= n; ++col) {
        if (used[col]) {
          row_pot[match[col]] += delta;
          col_pot[col] -= delta;
        } else {
          min_slack[col] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  double total = 0.0;
  for (std::size_t col = 1; col <= n; ++col) total += cost(xs[match[col] - 1], ys[col - 1], r);
  return total / static_cast<double>(n);
}

}  // namespace bpre

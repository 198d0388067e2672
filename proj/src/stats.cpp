#include "bpre/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "bpre/errors.hpp"

namespace bpre::stats {

MeanEstimate mean_estimate(std::span<const double> xs) {
  MeanEstimate out;
  if (xs.empty()) return out;
  const auto n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
    out.se = out.sd / std::sqrt(n);
  }
  return out;
}

double sample_variance(std::span<const double> xs) {
  const MeanEstimate e = mean_estimate(xs);
  return e.sd * e.sd;
}

double quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw StatisticsError("quantile: empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) {
    // Small-x form: 1 - sqrt(2 pi)/x sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
    double sum = 0.0;
    for (int k = 1; k <= 5; ++k) {
      const double t = (2.0 * k - 1.0) * std::numbers::pi / x;
      sum += std::exp(-t * t / 8.0);
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum;
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw StatisticsError("ks_two_sample: empty sample");
  std::vector<double> xs(a.begin(), a.end());
  std::vector<double> ys(b.begin(), b.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const auto na = static_cast<double>(xs.size());
  const auto nb = static_cast<double>(ys.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < xs.size() && j < ys.size()) {
    const double v = std::min(xs[i], ys[j]);
    while (i < xs.size() && xs[i] == v) ++i;
    while (j < ys.size() && ys[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sqrt_ne = std::sqrt(ne);
  TestResult out;
  out.statistic = d;
  out.p_value = kolmogorov_survival((sqrt_ne + 0.12 + 0.11 / sqrt_ne) * d);
  return out;
}

double chi_square_survival(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), statistic));
}

double student_t_quantile(double prob, double dof) {
  return boost::math::quantile(boost::math::students_t(dof), prob);
}

TestResult chi_square_homogeneity(std::span<const std::uint64_t> a,
                                  std::span<const std::uint64_t> b) {
  const std::size_t bins = std::max(a.size(), b.size());
  double total_a = 0.0;
  double total_b = 0.0;
  for (auto c : a) total_a += static_cast<double>(c);
  for (auto c : b) total_b += static_cast<double>(c);
  if (total_a == 0.0 || total_b == 0.0) throw StatisticsError("chi_square_homogeneity: empty");
  const double total = total_a + total_b;
  auto count = [](std::span<const std::uint64_t> h, std::size_t k) {
    return k < h.size() ? static_cast<double>(h[k]) : 0.0;
  };

  // Pool adjacent bins left to right until the smaller expected count
  // reaches 5; a thin remainder is merged into the last pooled bin.
  std::vector<std::pair<double, double>> pooled;
  double pa = 0.0;
  double pb = 0.0;
  const double min_share = std::min(total_a, total_b) / total;
  for (std::size_t k = 0; k < bins; ++k) {
    pa += count(a, k);
    pb += count(b, k);
    if ((pa + pb) * min_share >= 5.0) {
      pooled.emplace_back(pa, pb);
      pa = pb = 0.0;
    }
  }
  if (pa + pb > 0.0) {
    if (pooled.empty()) {
      pooled.emplace_back(pa, pb);
    } else {
      pooled.back().first += pa;
      pooled.back().second += pb;
    }
  }
  TestResult out;
  if (pooled.size() < 2) return out;
  double stat = 0.0;
  for (const auto& [ca, cb] : pooled) {
    const double col = ca + cb;
    const double ea = col * total_a / total;
    const double eb = col * total_b / total;
    stat += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
  }
  out.statistic = stat;
  out.dof = static_cast<double>(pooled.size() - 1);
  out.p_value = chi_square_survival(stat, out.dof);
  return out;
}

TestResult chi_square_goodness_of_fit(std::span<const std::uint64_t> observed,
                                      std::span<const double> pmf) {
  double n = 0.0;
  for (auto c : observed) n += static_cast<double>(c);
  if (n == 0.0) throw StatisticsError("chi_square_goodness_of_fit: no observations");
  std::vector<std::pair<double, double>> pooled;  // (observed, expected)
  double po = 0.0;
  double pe = 0.0;
  double assigned = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double p = k < pmf.size() ? pmf[k] : 0.0;
    assigned += p;
    po += static_cast<double>(observed[k]);
    pe += (k + 1 == observed.size() ? std::max(0.0, 1.0 - (assigned - p)) : p) * n;
    if (pe >= 5.0) {
      pooled.emplace_back(po, pe);
      po = pe = 0.0;
    }
  }
  if (po + pe > 0.0) {
    if (pooled.empty()) {
      pooled.emplace_back(po, pe);
    } else {
      pooled.back().first += po;
      pooled.back().second += pe;
    }
  }
  TestResult out;
  if (pooled.size() < 2) return out;
  double stat = 0.0;
  for (const auto& [o, e] : pooled) {
    if (e > 0.0) stat += (o - e) * (o - e) / e;
  }
  out.statistic = stat;
  out.dof = static_cast<double>(pooled.size() - 1);
  out.p_value = chi_square_survival(stat, out.dof);
  return out;
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw StatisticsError("fit_line: need at least two (x, y) pairs");
  }
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw StatisticsError("fit_line: x values are all equal");
  LineFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  if (xs.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - (out.intercept + out.slope * xs[i]);
      rss += e * e;
    }
    out.residual_sd = std::sqrt(rss / (n - 2.0));
    out.slope_se = out.residual_sd / std::sqrt(sxx);
  }
  return out;
}

}  // namespace bpre::stats

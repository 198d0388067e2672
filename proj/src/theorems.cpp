#include "bpre/theorems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bpre/errors.hpp"
#include "bpre/parallel.hpp"
#include "bpre/stats.hpp"

namespace bpre {

namespace {

constexpr std::uint64_t kLilFirstK = 16;
constexpr std::size_t kStoredTraces = 10;
constexpr double kZ975 = 1.959963984540054;
constexpr double kLaplaceTailStart = 1.0;

struct Model {
  double mu = 0.0;
  double sigma = 0.0;
};

Model model_of(const ExperimentConfig& cfg) {
  const ModelMoments mm = compute_model_moments(cfg.spec, cfg.delta);
  return Model{mm.mu, mm.sigma()};
}

// Calls observe(k, log_z, log_w) after each generation k = 1..horizon.
template <class Observer>
void run_trajectory(const ExperimentConfig& cfg, PathSource source, const Model& model,
                    StreamSeed seed, std::uint64_t horizon, Observer&& observe) {
  switch (source) {
    case PathSource::Bpre: {
      PathSimulator path(cfg.spec, cfg.exact_threshold, seed);
      for (std::uint64_t k = 1; k <= horizon; ++k) {
        path.step();
        observe(k, path.log_z(), path.log_w());
      }
      return;
    }
    case PathSource::GaussianWalk: {
      Rng rng(seed);
      double log_z = 0.0;
      for (std::uint64_t k = 1; k <= horizon; ++k) {
        log_z += model.mu + model.sigma * rng.normal();
        observe(k, log_z, 0.0);
      }
      return;
    }
    case PathSource::AssociatedWalk: {
      Rng rng(seed);
      double s = 0.0;
      for (std::uint64_t k = 1; k <= horizon; ++k) {
        s += std::log(law_mean(cfg.spec.sample(rng)));
        observe(k, s, 0.0);
      }
      return;
    }
  }
}

struct Terminal {
  double log_z = 0.0;
  double log_w = 0.0;
};

// Independent paths for one horizon, seeded by (master, tag, horizon).
std::vector<Terminal> terminal_sample(const ExperimentConfig& cfg, PathSource source,
                                      const Model& model, std::uint64_t horizon,
                                      std::uint64_t tag = stream_tag::kPaths) {
  const std::uint64_t master = derive_master(cfg.master_seed, tag, horizon);
  std::vector<Terminal> out(cfg.paths);
  parallel_for(
      cfg.paths,
      [&](std::size_t i) {
        Terminal t;
        run_trajectory(cfg, source, model, derive_path_seed(master, i), horizon,
                       [&t](std::uint64_t, double log_z, double log_w) {
                         t.log_z = log_z;
                         t.log_w = log_w;
                       });
        out[i] = t;
      },
      cfg.threads);
  return out;
}

std::string format_order(double r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

std::pair<double, double> percentile_interval(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return {stats::quantile(values, 0.025), stats::quantile(values, 0.975)};
}

// Sorted bootstrap resample of a sorted sample in O(m).
std::vector<double> resample_sorted(std::span<const double> sorted, Rng& rng,
                                    std::vector<std::uint32_t>& counts) {
  const std::size_t m = sorted.size();
  counts.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) counts[rng.below(m)] += 1;
  std::vector<double> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.insert(out.end(), counts[i], sorted[i]);
  return out;
}

void require_sigma(const Model& model, const char* who) {
  if (!(model.sigma > 0.0)) {
    throw StatisticsError(std::string(who) + ": sigma = 0, the normalized statistic is undefined");
  }
}

}  // namespace

const char* source_name(PathSource source) {
  switch (source) {
    case PathSource::Bpre:
      return "bpre";
    case PathSource::GaussianWalk:
      return "gaussian_walk";
    case PathSource::AssociatedWalk:
      return "associated_walk";
  }
  return "unknown";
}

void ExperimentConfig::validate(std::size_t min_grid) const {
  spec.validate();
  if (n_grid.size() < min_grid) {
    throw InvalidArgument("experiment.n_grid: needs at least " + std::to_string(min_grid) +
                          " horizons");
  }
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] < 1) throw InvalidArgument("experiment.n_grid: horizons must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw InvalidArgument("experiment.n_grid: must be strictly increasing");
    }
  }
  if (paths < 100) throw InvalidArgument("experiment.paths: must be >= 100");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("experiment.delta: must lie in (0, 1)");
  for (double r : orders) {
    if (!(r >= delta && r <= 2.0)) {
      throw InvalidArgument("experiment.orders: each order must lie in [delta, 2], got " +
                            format_order(r));
    }
  }
  if (exact_threshold < 2) throw InvalidArgument("sim.exact_threshold: must be >= 2");
}

RateFit fit_power_law(const std::vector<std::pair<double, double>>& points,
                      const std::vector<std::vector<std::pair<double, double>>>& replicates) {
  RateFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      fit.warnings.push_back("dropped point (" + format_order(x) + ", " + format_order(y) +
                             "): nonpositive or non-finite");
      continue;
    }
    xs.push_back(std::log(x));
    ys.push_back(std::log(y));
    fit.points.emplace_back(xs.back(), ys.back());
  }
  if (xs.size() < 3) {
    throw StatisticsError("fit_power_law: fewer than 3 usable points");
  }
  const stats::LineFit line = stats::fit_line(xs, ys);
  fit.slope = line.slope;
  fit.intercept = line.intercept;

  std::vector<double> slopes;
  for (const auto& rep : replicates) {
    std::vector<double> rx;
    std::vector<double> ry;
    for (const auto& [x, y] : rep) {
      if (x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y)) {
        rx.push_back(std::log(x));
        ry.push_back(std::log(y));
      }
    }
    if (rx.size() >= 3) slopes.push_back(stats::fit_line(rx, ry).slope);
  }
  if (!replicates.empty() && slopes.size() >= 2) {
    fit.slope_ci = percentile_interval(slopes);
  } else {
    if (!replicates.empty()) {
      fit.warnings.push_back("too few usable bootstrap replicates; using the t interval");
    }
    const double t = stats::student_t_quantile(0.975, static_cast<double>(xs.size() - 2));
    fit.slope_ci = {fit.slope - t * line.slope_se, fit.slope + t * line.slope_se};
  }
  fit.slope_ci.first = std::min(fit.slope_ci.first, fit.slope);
  fit.slope_ci.second = std::max(fit.slope_ci.second, fit.slope);
  return fit;
}

LlnReport run_lln(const ExperimentConfig& cfg) {
  cfg.validate();
  const Model model = model_of(cfg);
  LlnReport report;
  report.source = cfg.source;
  report.mu = model.mu;
  report.sigma = model.sigma;
  report.paths = cfg.paths;
  for (std::uint64_t n : cfg.n_grid) {
    const auto sample = terminal_sample(cfg, cfg.source, model, n);
    const auto nd = static_cast<double>(n);
    const double radius = 3.0 * model.sigma / std::sqrt(nd) + 1e-12 * (1.0 + std::abs(model.mu));
    std::vector<double> rates(sample.size());
    std::size_t covered = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      rates[i] = sample[i].log_z / nd;
      if (std::abs(rates[i] - model.mu) <= radius) ++covered;
    }
    const auto e = stats::mean_estimate(rates);
    LlnRow row;
    row.n = n;
    row.coverage = static_cast<double>(covered) / static_cast<double>(sample.size());
    row.mean = e.mean;
    row.se = e.se;
    row.ci = {e.mean - kZ975 * e.se, e.mean + kZ975 * e.se};
    row.mean_within_5se = std::abs(e.mean - model.mu) <= 5.0 * e.se + 1e-12 * (1.0 + std::abs(model.mu));
    report.rows.push_back(row);
  }
  return report;
}

LilReport run_lil(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::uint64_t horizon = cfg.n_grid.back();
  if (horizon < kLilFirstK) {
    throw StatisticsError("run_lil: horizon " + std::to_string(horizon) + " is below k = 16");
  }
  const Model model = model_of(cfg);
  require_sigma(model, "run_lil");

  LilReport report;
  report.horizon = horizon;
  report.first_k = kLilFirstK;
  report.mu = model.mu;
  report.sigma = model.sigma;

  // sqrt(k log log k) for every k in [16, horizon].
  std::vector<double> scale(horizon + 1, 0.0);
  for (std::uint64_t k = kLilFirstK; k <= horizon; ++k) {
    const auto kd = static_cast<double>(k);
    scale[k] = std::sqrt(kd * std::log(std::log(kd)));
  }
  const double norm = std::sqrt(2.0) * model.sigma;

  for (double k = kLilFirstK; k < static_cast<double>(horizon); k *= 1.15) {
    const auto ki = static_cast<std::uint64_t>(std::llround(k));
    if (report.trace_k.empty() || report.trace_k.back() != ki) report.trace_k.push_back(ki);
  }
  if (report.trace_k.back() != horizon) report.trace_k.push_back(horizon);

  auto extremes = [&](PathSource source, std::uint64_t tag, ExtremeSummary& out,
                      std::vector<std::vector<double>>* traces) {
    const std::uint64_t master = derive_master(cfg.master_seed, tag, horizon);
    out.running_max.assign(cfg.paths, 0.0);
    out.running_min.assign(cfg.paths, 0.0);
    const std::size_t stored = traces ? std::min<std::size_t>(kStoredTraces, cfg.paths) : 0;
    if (traces) traces->assign(stored, {});
    parallel_for(
        cfg.paths,
        [&](std::size_t i) {
          double hi = -std::numeric_limits<double>::infinity();
          double lo = std::numeric_limits<double>::infinity();
          std::vector<double>* trace = i < stored ? &(*traces)[i] : nullptr;
          std::size_t next_trace = 0;
          run_trajectory(cfg, source, model, derive_path_seed(master, i), horizon,
                         [&](std::uint64_t k, double log_z, double) {
                           if (k < kLilFirstK) return;
                           const double centred = (log_z - static_cast<double>(k) * model.mu) / scale[k];
                           const double l = centred / norm;
                           hi = std::max(hi, l);
                           lo = std::min(lo, l);
                           if (trace && next_trace < report.trace_k.size() &&
                               report.trace_k[next_trace] == k) {
                             trace->push_back(centred);
                             ++next_trace;
                           }
                         });
          out.running_max[i] = hi;
          out.running_min[i] = lo;
        },
        cfg.threads);
    std::vector<double> mx = out.running_max;
    std::vector<double> mn = out.running_min;
    std::sort(mx.begin(), mx.end());
    std::sort(mn.begin(), mn.end());
    out.max_band = {stats::quantile(mx, 0.05), stats::quantile(mx, 0.95)};
    out.min_band = {stats::quantile(mn, 0.05), stats::quantile(mn, 0.95)};
  };

  // Oracle bands first.
  extremes(PathSource::GaussianWalk, stream_tag::kGaussianOracle, report.oracle, nullptr);
  extremes(cfg.source, stream_tag::kPaths, report.process, &report.traces);

  const auto ks_max = stats::ks_two_sample(report.process.running_max, report.oracle.running_max);
  const auto ks_min = stats::ks_two_sample(report.process.running_min, report.oracle.running_min);
  report.ks_max_statistic = ks_max.statistic;
  report.ks_max_p = ks_max.p_value;
  report.ks_min_statistic = ks_min.statistic;
  report.ks_min_p = ks_min.p_value;
  auto in_band = [](const std::vector<double>& xs, std::pair<double, double> band) {
    const auto hits = std::count_if(xs.begin(), xs.end(), [&](double x) {
      return x >= band.first && x <= band.second;
    });
    return static_cast<double>(hits) / static_cast<double>(xs.size());
  };
  report.fraction_max_in_band = in_band(report.process.running_max, report.oracle.max_band);
  report.fraction_min_in_band = in_band(report.process.running_min, report.oracle.min_band);
  return report;
}

InvarianceReport run_invariance(const ExperimentConfig& cfg, double tolerance) {
  cfg.validate();
  const std::uint64_t horizon = cfg.n_grid.back();
  if (horizon < 4) throw StatisticsError("run_invariance: horizon must be >= 4");
  const Model model = model_of(cfg);
  require_sigma(model, "run_invariance");

  InvarianceReport report;
  report.horizon = horizon;
  report.tolerance = tolerance;
  std::array<std::uint64_t, 3> gens{};
  for (std::size_t j = 0; j < 3; ++j) {
    gens[j] = static_cast<std::uint64_t>(std::floor(report.times[j] * static_cast<double>(horizon)));
  }
  const double scale = model.sigma * std::sqrt(static_cast<double>(horizon));

  auto collect = [&](PathSource source, std::uint64_t tag) {
    const std::uint64_t master = derive_master(cfg.master_seed, tag, horizon);
    std::vector<std::array<double, 3>> ys(cfg.paths);
    parallel_for(
        cfg.paths,
        [&](std::size_t i) {
          std::array<double, 3> y{};
          run_trajectory(cfg, source, model, derive_path_seed(master, i), horizon,
                         [&](std::uint64_t k, double log_z, double) {
                           for (std::size_t j = 0; j < 3; ++j) {
                             if (k == gens[j]) y[j] = (log_z - static_cast<double>(k) * model.mu) / scale;
                           }
                         });
          ys[i] = y;
        },
        cfg.threads);
    return ys;
  };

  auto check = [&](const std::vector<std::array<double, 3>>& ys) {
    CovarianceCheck c;
    const auto m = static_cast<double>(ys.size());
    std::array<double, 3> mean{};
    for (const auto& y : ys) {
      for (std::size_t j = 0; j < 3; ++j) mean[j] += y[j];
    }
    for (auto& v : mean) v /= m;
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        double s = 0.0;
        for (const auto& y : ys) s += (y[a] - mean[a]) * (y[b] - mean[b]);
        c.covariance[a][b] = s / (m - 1.0);
        const double target = std::min(report.times[a], report.times[b]);
        c.max_abs_deviation = std::max(c.max_abs_deviation, std::abs(c.covariance[a][b] - target));
      }
    }
    c.passes = c.max_abs_deviation <= tolerance;
    return c;
  };

  const auto oracle_ys = collect(PathSource::GaussianWalk, stream_tag::kGaussianOracle);
  const auto process_ys = collect(cfg.source, stream_tag::kPaths);
  report.oracle = check(oracle_ys);
  report.process = check(process_ys);

  auto grid_max = [](const std::vector<std::array<double, 3>>& ys) {
    std::vector<double> out(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) out[i] = std::max({ys[i][0], ys[i][1], ys[i][2]});
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto pmax = grid_max(process_ys);
  const auto omax = grid_max(oracle_ys);
  const auto ks = stats::ks_two_sample(pmax, omax);
  report.grid_max_ks_statistic = ks.statistic;
  report.grid_max_ks_p = ks.p_value;
  auto ecdf = [](const std::vector<double>& sorted, double x) {
    return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) /
           static_cast<double>(sorted.size());
  };
  for (double x = 0.0; x <= 3.0 + 1e-12; x += 0.25) {
    report.max_x.push_back(x);
    report.max_cdf_process.push_back(ecdf(pmax, x));
    report.max_cdf_oracle.push_back(ecdf(omax, x));
    report.max_cdf_reflection.push_back(2.0 * normal_cdf(x) - 1.0);
  }
  return report;
}

const CltMetric* CltRateReport::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

CltRateReport run_clt_rate(const ExperimentConfig& cfg) {
  cfg.validate(4);
  const Model model = model_of(cfg);
  require_sigma(model, "run_clt_rate");

  std::vector<double> orders = cfg.orders;
  orders.push_back(1.0);
  std::sort(orders.begin(), orders.end());
  orders.erase(std::unique(orders.begin(), orders.end()), orders.end());

  struct MetricDef {
    std::string name;
    double order;
    int kind;  // 0: W_r, 1: zeta1, 2: zeta2 recentered
  };
  std::vector<MetricDef> defs;
  for (double r : orders) defs.push_back({"W" + format_order(r), r, 0});
  defs.push_back({"zeta1", 1.0, 1});
  defs.push_back({"zeta2", 2.0, 2});

  auto evaluate = [](const MetricDef& d, const EmpiricalSample& a, const EmpiricalSample& b) {
    switch (d.kind) {
      case 0:
        return wasserstein(a, b, d.order, SizeMismatch::Interpolate);
      case 1:
        return zolotarev_1(a, b);
      default:
        return zolotarev_2_equal_mean(a, b, true);
    }
  };

  CltRateReport report;
  report.source = cfg.source;
  report.paths = cfg.paths;
  report.control_replicates = kControlReplicates;
  for (const auto& d : defs) report.metrics.push_back(CltMetric{d.name, d.order, {}, false, std::nullopt, 0});

  const EmpiricalSample reference = discretize_normal(cfg.paths);
  std::vector<EmpiricalSample> samples;
  samples.reserve(cfg.n_grid.size());
  for (std::uint64_t n : cfg.n_grid) {
    const auto terminal = terminal_sample(cfg, cfg.source, model, n);
    const double scale = std::sqrt(static_cast<double>(n)) * model.sigma;
    std::vector<double> xs(terminal.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      xs[i] = (terminal[i].log_z - static_cast<double>(n) * model.mu) / scale;
    }
    EmpiricalSample sample(std::move(xs));

    CltHorizon h;
    h.n = n;
    const auto e = stats::mean_estimate(sample.values());
    h.sample_mean = e.mean;
    h.sample_variance = e.sd * e.sd;
    std::vector<double> sq(sample.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
      const double d = sample.values()[i] - e.mean;
      sq[i] = d * d;
    }
    h.variance_se = stats::mean_estimate(sq).se;
    h.ks = ks_statistic(sample);

    // Controls: same-size standard normal samples on streams paired with this horizon.
    const std::uint64_t control_master = derive_master(cfg.master_seed, stream_tag::kControl, n);
    std::vector<EmpiricalSample> controls(kControlReplicates);
    parallel_for(
        kControlReplicates,
        [&](std::size_t k) {
          Rng rng(derive_path_seed(control_master, k));
          std::vector<double> v(cfg.paths);
          for (auto& x : v) x = rng.normal();
          controls[k] = EmpiricalSample(std::move(v));
        },
        cfg.threads);

    for (std::size_t d = 0; d < defs.size(); ++d) {
      const DistanceEstimate raw = evaluate(defs[d], sample, reference);
      std::vector<double> floors;
      for (const auto& c : controls) floors.push_back(evaluate(defs[d], c, reference).value);
      const auto fe = stats::mean_estimate(floors);
      CltPoint p;
      p.n = n;
      p.raw = raw.value;
      p.floor_mean = fe.mean;
      p.floor_sd = fe.sd;
      p.corrected = raw.value - fe.mean;
      p.resolved = p.corrected > 0.0 && p.corrected > 3.0 * fe.sd;
      p.method = raw.method;
      p.exact = raw.exact;
      report.metrics[d].points.push_back(p);
      if (defs[d].kind == 2 && raw.recentering) h.zeta2_shift = *raw.recentering;
    }
    const double w1 = report.metric("W1")->points.back().raw;
    const double z1 = report.metric("zeta1")->points.back().raw;
    h.zeta1_minus_w1 = z1 - w1;
    report.horizons.push_back(h);
    samples.push_back(std::move(sample));
  }

  // Bootstrap over paths: values[b][metric][horizon].
  const std::size_t replicates = cfg.bootstrap;
  std::vector<std::vector<std::vector<double>>> boot(
      replicates, std::vector<std::vector<double>>(defs.size(), std::vector<double>(cfg.n_grid.size())));
  parallel_for(
      replicates,
      [&](std::size_t b) {
        std::vector<std::uint32_t> counts;
        for (std::size_t h = 0; h < cfg.n_grid.size(); ++h) {
          Rng rng(derive_path_seed(derive_master(cfg.master_seed, stream_tag::kBootstrap, cfg.n_grid[h]), b));
          const auto resampled =
              EmpiricalSample::from_sorted(resample_sorted(samples[h].values(), rng, counts));
          for (std::size_t d = 0; d < defs.size(); ++d) {
            boot[b][d][h] = evaluate(defs[d], resampled, reference).value;
          }
        }
      },
      cfg.threads);

  for (std::size_t d = 0; d < defs.size(); ++d) {
    CltMetric& metric = report.metrics[d];
    std::vector<std::pair<double, double>> points;
    for (const auto& p : metric.points) {
      if (p.resolved) points.emplace_back(static_cast<double>(p.n), p.corrected);
    }
    if (points.size() < 3) {
      metric.noise_dominated = true;
      continue;
    }
    std::vector<std::vector<std::pair<double, double>>> reps;
    for (std::size_t b = 0; b < replicates; ++b) {
      std::vector<std::pair<double, double>> rep;
      for (std::size_t h = 0; h < metric.points.size(); ++h) {
        const CltPoint& p = metric.points[h];
        if (!p.resolved) continue;
        const double y = boot[b][d][h] - p.floor_mean;
        if (y > 0.0) rep.emplace_back(static_cast<double>(p.n), y);
      }
      if (rep.size() >= 3) reps.push_back(std::move(rep));
    }
    metric.bootstrap_used = reps.size();
    metric.fit = fit_power_law(points, reps);
  }
  return report;
}

MomentReport run_logw_moments(const ExperimentConfig& cfg, double q) {
  cfg.validate(2);
  if (!(q > 0.0 && q <= 3.0)) throw InvalidArgument("run_logw_moments: q must lie in (0, 3]");
  const Model model = model_of(cfg);
  MomentReport report;
  report.kind = "logw_moments";
  report.q = q;
  report.horizon = cfg.n_grid.back();
  report.paths = cfg.paths;
  for (std::uint64_t n : cfg.n_grid) {
    const auto sample = terminal_sample(cfg, cfg.source, model, n);
    std::vector<double> powers(sample.size());
    std::vector<double> logs(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) {
      logs[i] = sample[i].log_w;
      powers[i] = std::pow(std::abs(sample[i].log_w), q);
    }
    const auto ep = stats::mean_estimate(powers);
    const auto el = stats::mean_estimate(logs);
    report.rows.push_back(MomentRow{static_cast<double>(n), ep.mean, ep.se, el.mean, el.se});
  }
  // OLS slope; Var = sum_i w_i^2 se_i^2 over independent horizons.
  const auto k = static_cast<double>(report.rows.size());
  double mx = 0.0;
  double my = 0.0;
  for (const auto& r : report.rows) {
    mx += r.x;
    my += r.estimate;
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& r : report.rows) {
    sxx += (r.x - mx) * (r.x - mx);
    sxy += (r.x - mx) * (r.estimate - my);
  }
  report.trend_slope = sxy / sxx;
  double var = 0.0;
  for (const auto& r : report.rows) {
    const double w = (r.x - mx) / sxx;
    var += w * w * r.se * r.se;
  }
  const double half = kZ975 * std::sqrt(var);
  report.trend_ci = {report.trend_slope - half, report.trend_slope + half};
  return report;
}

MomentReport run_laplace_tail(const ExperimentConfig& cfg, const std::vector<double>& t_grid) {
  cfg.validate();
  if (t_grid.empty()) throw InvalidArgument("run_laplace_tail: empty t_grid");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || (i > 0 && t_grid[i] <= t_grid[i - 1])) {
      throw InvalidArgument("run_laplace_tail: t_grid must be positive and strictly increasing");
    }
  }
  const Model model = model_of(cfg);
  const std::uint64_t horizon = cfg.n_grid.back();
  const auto sample = terminal_sample(cfg, cfg.source, model, horizon);
  std::vector<double> w(sample.size());
  std::vector<double> logs(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    logs[i] = sample[i].log_w;
    w[i] = std::exp(sample[i].log_w);
  }
  const auto el = stats::mean_estimate(logs);

  MomentReport report;
  report.kind = "laplace_tail";
  report.horizon = horizon;
  report.paths = cfg.paths;
  const double resolution = 10.0 / static_cast<double>(cfg.paths);
  std::vector<std::vector<double>> transforms;
  std::vector<double> kept_t;
  bool truncating = false;
  for (double t : t_grid) {
    if (truncating) {
      report.truncated_t.push_back(t);
      continue;
    }
    std::vector<double> e(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) e[i] = std::exp(-t * w[i]);
    const auto est = stats::mean_estimate(e);
    if (est.mean < resolution) {
      truncating = true;
      report.truncated_t.push_back(t);
      continue;
    }
    report.rows.push_back(MomentRow{t, est.mean, est.se, el.mean, el.se});
    if (t >= kLaplaceTailStart) {
      transforms.push_back(std::move(e));
      kept_t.push_back(t);
    }
  }

  if (kept_t.size() >= 3) {
    std::vector<std::pair<double, double>> points;
    for (const auto& r : report.rows) {
      if (r.x >= kLaplaceTailStart) points.emplace_back(r.x, r.estimate);
    }
    const std::uint64_t boot_master = derive_master(cfg.master_seed, stream_tag::kBootstrap, horizon);
    std::vector<std::vector<std::pair<double, double>>> reps(cfg.bootstrap);
    parallel_for(
        cfg.bootstrap,
        [&](std::size_t b) {
          Rng rng(derive_path_seed(boot_master, b));
          std::vector<double> sums(kept_t.size(), 0.0);
          const std::size_t m = w.size();
          for (std::size_t i = 0; i < m; ++i) {
            const std::size_t idx = rng.below(m);
            for (std::size_t j = 0; j < kept_t.size(); ++j) sums[j] += transforms[j][idx];
          }
          for (std::size_t j = 0; j < kept_t.size(); ++j) {
            reps[b].emplace_back(kept_t[j], sums[j] / static_cast<double>(m));
          }
        },
        cfg.threads);
    report.fit = fit_power_law(points, reps);
    report.trend_slope = report.fit->slope;
    report.trend_ci = report.fit->slope_ci;
    report.a_hat = -report.fit->slope;
    report.a_hat_ci = {-report.fit->slope_ci.second, -report.fit->slope_ci.first};
  }
  return report;
}

std::vector<ReportRow> to_rows(const LlnReport& r) {
  std::vector<ReportRow> rows;
  for (const auto& row : r.rows) {
    rows.push_back({row.n, "coverage_3sigma", row.coverage, std::nullopt, source_name(r.source)});
    rows.push_back({row.n, "mean_log_z_over_n", row.mean, row.se, source_name(r.source)});
    rows.push_back({row.n, "mu", r.mu, std::nullopt, "analytic"});
  }
  return rows;
}

std::vector<ReportRow> to_rows(const LilReport& r) {
  std::vector<ReportRow> rows;
  const std::uint64_t n = r.horizon;
  rows.push_back({n, "ks_p_running_max", r.ks_max_p, std::nullopt, "ks_two_sample"});
  rows.push_back({n, "ks_p_running_min", r.ks_min_p, std::nullopt, "ks_two_sample"});
  rows.push_back({n, "oracle_max_q05", r.oracle.max_band.first, std::nullopt, "gaussian_walk"});
  rows.push_back({n, "oracle_max_q95", r.oracle.max_band.second, std::nullopt, "gaussian_walk"});
  rows.push_back({n, "oracle_min_q05", r.oracle.min_band.first, std::nullopt, "gaussian_walk"});
  rows.push_back({n, "oracle_min_q95", r.oracle.min_band.second, std::nullopt, "gaussian_walk"});
  const auto pmax = stats::mean_estimate(r.process.running_max);
  const auto pmin = stats::mean_estimate(r.process.running_min);
  rows.push_back({n, "mean_running_max", pmax.mean, pmax.se, "process"});
  rows.push_back({n, "mean_running_min", pmin.mean, pmin.se, "process"});
  rows.push_back({n, "fraction_max_in_band", r.fraction_max_in_band, std::nullopt, "process"});
  rows.push_back({n, "fraction_min_in_band", r.fraction_min_in_band, std::nullopt, "process"});
  return rows;
}

std::vector<ReportRow> to_rows(const InvarianceReport& r) {
  std::vector<ReportRow> rows;
  const char* names[3] = {"0.25", "0.5", "1"};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = a; b < 3; ++b) {
      const std::string stat = std::string("cov_") + names[a] + "_" + names[b];
      rows.push_back({r.horizon, stat, r.process.covariance[a][b], std::nullopt, "process"});
      rows.push_back({r.horizon, stat, r.oracle.covariance[a][b], std::nullopt, "gaussian_walk"});
    }
  }
  rows.push_back({r.horizon, "max_abs_deviation", r.process.max_abs_deviation, std::nullopt, "process"});
  rows.push_back({r.horizon, "max_abs_deviation", r.oracle.max_abs_deviation, std::nullopt, "gaussian_walk"});
  rows.push_back({r.horizon, "grid_max_ks_p", r.grid_max_ks_p, std::nullopt, "ks_two_sample"});
  return rows;
}

std::vector<ReportRow> to_rows(const CltRateReport& r) {
  std::vector<ReportRow> rows;
  for (const auto& m : r.metrics) {
    for (const auto& p : m.points) {
      const std::string method(method_name(p.method));
      rows.push_back({p.n, m.name, p.raw, std::nullopt, method});
      rows.push_back({p.n, m.name + "_noise_floor", p.floor_mean, p.floor_sd, "gaussian_control"});
      rows.push_back({p.n, m.name + "_corrected", p.corrected, std::nullopt, method});
    }
  }
  for (const auto& h : r.horizons) {
    rows.push_back({h.n, "sample_variance", h.sample_variance, h.variance_se, "moment"});
    rows.push_back({h.n, "ks_vs_normal", h.ks, std::nullopt, "ks"});
    rows.push_back({h.n, "zeta1_minus_w1", h.zeta1_minus_w1, std::nullopt, "identity"});
    rows.push_back({h.n, "zeta2_recentering_shift", h.zeta2_shift.first, std::nullopt, "recentered"});
  }
  return rows;
}

std::vector<ReportRow> to_rows(const MomentReport& r) {
  std::vector<ReportRow> rows;
  for (const auto& row : r.rows) {
    if (r.kind == "laplace_tail") {
      // The t value is not an integer horizon; it is carried in the statistic name.
      rows.push_back({r.horizon, "psi_t=" + format_order(row.x), row.estimate, row.se, "monte_carlo"});
    } else {
      const auto n = static_cast<std::uint64_t>(row.x);
      rows.push_back({n, "abs_log_w_moment_q=" + format_order(r.q), row.estimate, row.se, "monte_carlo"});
      rows.push_back({n, "mean_log_w", row.mean_log_w, row.mean_log_w_se, "monte_carlo"});
    }
  }
  rows.push_back({r.horizon, "trend_slope", r.trend_slope, std::nullopt, "least_squares"});
  if (r.a_hat) rows.push_back({r.horizon, "a_hat", *r.a_hat, std::nullopt, "least_squares"});
  return rows;
}

}  // namespace bpre

#include "bpre/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bpre/errors.hpp"
#include "bpre/sampling.hpp"

namespace bpre {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kProbabilityTolerance = 1e-12;
constexpr double kSeriesTolerance = 1e-12;
constexpr std::uint64_t kSeriesCap = 10'000'000;
constexpr double kQuadratureTolerance = 1e-13;

std::string format_double(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// log m as a function of the environment parameter.
double log_mean_at(Family family, double parameter, std::uint64_t k) {
  switch (family) {
    case Family::ShiftedPoisson:
      return std::log1p(parameter);
    case Family::ShiftedGeometric:
      return -std::log(parameter);
    case Family::TwoPoint:
      return std::log1p(static_cast<double>(k - 1) * parameter);
  }
  return 0.0;
}

// Parameter at which log m equals the given level (the |X - mu| kink).
double parameter_at_log_mean(Family family, double level, std::uint64_t k) {
  switch (family) {
    case Family::ShiftedPoisson:
      return std::expm1(level);
    case Family::ShiftedGeometric:
      return std::exp(-level);
    case Family::TwoPoint:
      return k > 1 ? std::expm1(level) / static_cast<double>(k - 1) : 0.0;
  }
  return 0.0;
}

double integrate(const std::function<double(double)>& f, double lo, double hi) {
  if (hi <= lo) return 0.0;
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 20,
                                                                      kQuadratureTolerance, &error);
}

// E g(parameter) under the environment; `kink` splits the quadrature range.
double expect(const EnvironmentSpec& spec, const std::function<double(double)>& g,
              std::optional<double> kink = std::nullopt) {
  if (spec.support == EnvironmentSpec::Support::Finite) {
    double total = 0.0;
    for (std::size_t i = 0; i < spec.parameters.size(); ++i) {
      if (spec.probabilities[i] > 0.0) total += spec.probabilities[i] * g(spec.parameters[i]);
    }
    return total;
  }
  const double lo = spec.parameters[0];
  const double hi = spec.parameters[1];
  if (hi == lo) return g(lo);
  double value = 0.0;
  if (kink && *kink > lo && *kink < hi) {
    value = integrate(g, lo, *kink) + integrate(g, *kink, hi);
  } else {
    value = integrate(g, lo, hi);
  }
  return value / (hi - lo);
}

double series_moment(const std::function<double(std::uint64_t)>& log_pmf,
                     const std::function<double(std::uint64_t)>& ratio_bound, double p,
                     std::uint64_t first) {
  double sum = 0.0;
  for (std::uint64_t k = first; k < first + kSeriesCap; ++k) {
    const double term = std::exp(p * std::log(static_cast<double>(k)) + log_pmf(k));
    sum += term;
    const double r = ratio_bound(k);
    if (r < 1.0) {
      const double tail = term * r / (1.0 - r);
      if (tail < kSeriesTolerance * sum) return sum;
    }
  }
  throw StatisticsError("law_moment: series did not converge within the iteration cap");
}

}  // namespace

std::string_view family_name(Family family) {
  switch (family) {
    case Family::ShiftedPoisson:
      return "shifted_poisson";
    case Family::ShiftedGeometric:
      return "shifted_geometric";
    case Family::TwoPoint:
      return "two_point";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view name) {
  for (auto f : {Family::ShiftedPoisson, Family::ShiftedGeometric, Family::TwoPoint}) {
    if (family_name(f) == name) return f;
  }
  return std::nullopt;
}

Family family_of(const OffspringLaw& law) {
  return std::visit(Overloaded{[](const ShiftedPoisson&) { return Family::ShiftedPoisson; },
                               [](const ShiftedGeometric&) { return Family::ShiftedGeometric; },
                               [](const TwoPoint&) { return Family::TwoPoint; }},
                    law);
}

void validate(const OffspringLaw& law) {
  std::visit(Overloaded{
                 [](const ShiftedPoisson& l) {
                   if (!(l.lambda >= 0.0) || !std::isfinite(l.lambda)) {
                     throw InvalidArgument("shifted_poisson: lambda must be finite and >= 0, got " +
                                           format_double(l.lambda));
                   }
                 },
                 [](const ShiftedGeometric& l) {
                   if (!(l.q > 0.0 && l.q <= 1.0)) {
                     throw InvalidArgument("shifted_geometric: q must lie in (0, 1], got " +
                                           format_double(l.q));
                   }
                 },
                 [](const TwoPoint& l) {
                   if (l.k < 1) throw InvalidArgument("two_point: k must be >= 1");
                   if (!(l.pi >= 0.0 && l.pi <= 1.0)) {
                     throw InvalidArgument("two_point: pi must lie in [0, 1], got " +
                                           format_double(l.pi));
                   }
                 }},
             law);
}

double law_mean(const OffspringLaw& law) {
  return std::visit(
      Overloaded{[](const ShiftedPoisson& l) { return 1.0 + l.lambda; },
                 [](const ShiftedGeometric& l) { return 1.0 / l.q; },
                 [](const TwoPoint& l) { return 1.0 + static_cast<double>(l.k - 1) * l.pi; }},
      law);
}

double law_variance(const OffspringLaw& law) {
  return std::visit(Overloaded{[](const ShiftedPoisson& l) { return l.lambda; },
                               [](const ShiftedGeometric& l) { return (1.0 - l.q) / (l.q * l.q); },
                               [](const TwoPoint& l) {
                                 const double d = static_cast<double>(l.k - 1);
                                 return d * d * l.pi * (1.0 - l.pi);
                               }},
                    law);
}

double law_moment(const OffspringLaw& law, double p) {
  if (!(p > 0.0)) throw InvalidArgument("law_moment: p must be positive");
  validate(law);
  return std::visit(
      Overloaded{
          [p](const ShiftedPoisson& l) {
            if (p == 1.0) return 1.0 + l.lambda;
            if (p == 2.0) return 1.0 + 3.0 * l.lambda + l.lambda * l.lambda;
            if (l.lambda == 0.0) return 1.0;
            const double lambda = l.lambda;
            return series_moment(
                [lambda](std::uint64_t k) { return sampling::log_poisson_pmf(k - 1, lambda); },
                [lambda, p](std::uint64_t k) {
                  const auto kd = static_cast<double>(k);
                  return std::pow((kd + 1.0) / kd, p) * lambda / kd;
                },
                p, 1);
          },
          [p](const ShiftedGeometric& l) {
            if (p == 1.0) return 1.0 / l.q;
            if (p == 2.0) return (2.0 - l.q) / (l.q * l.q);
            if (l.q == 1.0) return 1.0;
            const double q = l.q;
            const double log_q = std::log(q);
            const double log_fail = std::log1p(-q);
            return series_moment(
                [log_q, log_fail](std::uint64_t k) {
                  return log_q + static_cast<double>(k - 1) * log_fail;
                },
                [q, p](std::uint64_t k) {
                  const auto kd = static_cast<double>(k);
                  return std::pow((kd + 1.0) / kd, p) * (1.0 - q);
                },
                p, 1);
          },
          [p](const TwoPoint& l) {
            return (1.0 - l.pi) + l.pi * std::pow(static_cast<double>(l.k), p);
          }},
      law);
}

double law_pmf(const OffspringLaw& law, std::uint64_t k) {
  if (k == 0) return 0.0;
  return std::visit(
      Overloaded{[k](const ShiftedPoisson& l) {
                   return std::exp(sampling::log_poisson_pmf(k - 1, l.lambda));
                 },
                 [k](const ShiftedGeometric& l) {
                   return l.q * std::pow(1.0 - l.q, static_cast<double>(k - 1));
                 },
                 [k](const TwoPoint& l) {
                   if (l.k == 1) return k == 1 ? 1.0 : 0.0;
                   if (k == 1) return 1.0 - l.pi;
                   return k == l.k ? l.pi : 0.0;
                 }},
      law);
}

std::uint64_t sample_offspring(const OffspringLaw& law, Rng& rng) {
  return std::visit(
      Overloaded{[&rng](const ShiftedPoisson& l) { return 1 + sampling::poisson(rng, l.lambda); },
                 [&rng](const ShiftedGeometric& l) { return 1 + sampling::geometric(rng, l.q); },
                 [&rng](const TwoPoint& l) -> std::uint64_t {
                   return rng.uniform() < l.pi ? l.k : 1;
                 }},
      law);
}

OffspringLaw EnvironmentSpec::law_at(double parameter) const {
  switch (family) {
    case Family::ShiftedPoisson:
      return ShiftedPoisson{parameter};
    case Family::ShiftedGeometric:
      return ShiftedGeometric{parameter};
    case Family::TwoPoint:
      return TwoPoint{two_point_k, parameter};
  }
  return ShiftedPoisson{parameter};
}

void EnvironmentSpec::validate() const {
  if (parameters.empty()) throw InvalidArgument("model.parameters: support is empty");
  if (support == Support::Finite) {
    if (probabilities.size() != parameters.size()) {
      throw InvalidArgument("model.probabilities: expected " + std::to_string(parameters.size()) +
                            " entries, got " + std::to_string(probabilities.size()));
    }
    double total = 0.0;
    for (double w : probabilities) {
      if (!(w >= 0.0 && w <= 1.0)) {
        throw InvalidArgument("model.probabilities: entry outside [0, 1]: " + format_double(w));
      }
      total += w;
    }
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw InvalidArgument("model.probabilities: must sum to 1, got " + format_double(total));
    }
  } else {
    if (parameters.size() != 2) {
      throw InvalidArgument("model.parameters: interval support needs [lo, hi]");
    }
    if (!probabilities.empty()) {
      throw InvalidArgument("model.probabilities: must be empty for interval support");
    }
    if (!(parameters[0] <= parameters[1])) {
      throw InvalidArgument("model.parameters: interval needs lo <= hi");
    }
  }
  if (family == Family::TwoPoint && two_point_k < 1) {
    throw InvalidArgument("model.k: must be >= 1");
  }
  for (double theta : parameters) {
    try {
      bpre::validate(law_at(theta));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(std::string("model.parameters: ") + e.what());
    }
  }
}

OffspringLaw EnvironmentSpec::sample(Rng& rng) const {
  const double u = rng.uniform();
  if (support == Support::Interval) {
    return law_at(parameters[0] + (parameters[1] - parameters[0]) * u);
  }
  double cumulative = 0.0;
  for (std::size_t i = 0; i + 1 < parameters.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return law_at(parameters[i]);
  }
  // Last atom with positive weight absorbs the rounding slack.
  std::size_t last = parameters.size() - 1;
  while (last > 0 && probabilities[last] == 0.0) --last;
  return law_at(parameters[last]);
}

EnvironmentSpec finite_environment(Family family, std::vector<double> parameters,
                                   std::vector<double> probabilities, std::uint64_t two_point_k) {
  EnvironmentSpec spec;
  spec.family = family;
  spec.support = EnvironmentSpec::Support::Finite;
  spec.parameters = std::move(parameters);
  spec.probabilities = std::move(probabilities);
  spec.two_point_k = two_point_k;
  return spec;
}

EnvironmentSpec interval_environment(Family family, double lo, double hi,
                                     std::uint64_t two_point_k) {
  EnvironmentSpec spec;
  spec.family = family;
  spec.support = EnvironmentSpec::Support::Interval;
  spec.parameters = {lo, hi};
  spec.two_point_k = two_point_k;
  return spec;
}

EnvironmentSpec reference_environment() {
  return finite_environment(Family::ShiftedPoisson, {0.5, 1.5}, {0.5, 0.5});
}

EnvironmentSpec doubling_environment() {
  return finite_environment(Family::TwoPoint, {1.0}, {1.0}, 2);
}

double ModelMoments::sigma() const { return std::sqrt(sigma2); }

ModelMoments compute_model_moments(const EnvironmentSpec& spec, double delta) {
  if (spec.parameters.empty()) throw InvalidArgument("compute_model_moments: empty support");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgument("compute_model_moments: delta must lie in (0, 1)");
  }
  spec.validate();
  const Family family = spec.family;
  const std::uint64_t k = spec.two_point_k;
  auto log_mean = [family, k](double theta) { return log_mean_at(family, theta, k); };

  ModelMoments out;
  out.delta = delta;
  out.mu = expect(spec, log_mean);
  const double mu = out.mu;
  const double kink = parameter_at_log_mean(family, mu, k);
  out.sigma2 = expect(
      spec,
      [&](double theta) {
        const double d = log_mean(theta) - mu;
        return d * d;
      },
      kink);
  out.abs_moment_2_delta = expect(
      spec, [&](double theta) { return std::pow(std::abs(log_mean(theta) - mu), 2.0 + delta); },
      kink);
  return out;
}

ConditionReport validate_conditions(const EnvironmentSpec& spec, double delta, double p, double c) {
  ConditionReport report;
  report.delta = delta;
  report.p = p;
  report.c = c;

  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    report.diagnostics.emplace_back(std::string("invalid environment: ") + e.what());
    return report;
  }
  bool constants_ok = true;
  if (!(delta > 0.0 && delta < 1.0)) {
    report.diagnostics.emplace_back("delta must lie in (0, 1), got " + format_double(delta));
    constants_ok = false;
  }
  if (!(p > 1.0)) {
    report.diagnostics.emplace_back("p must exceed 1, got " + format_double(p));
    constants_ok = false;
  }
  if (!(c > 0.0)) {
    report.diagnostics.emplace_back("c must be positive, got " + format_double(c));
    constants_ok = false;
  }

  // Each family is supported on {1, 2, ...}.
  report.assumption_1_1 = true;

  report.moments = compute_model_moments(spec, constants_ok ? delta : 0.5);
  report.moments.delta = delta;
  const double sigma2 = report.moments.sigma2;
  const double prob_single_child = expect(spec, [&](double theta) {
    return law_pmf(spec.law_at(theta), 1);
  });

  // Parameters range over a compact set on which every moment of the
  // offspring law is bounded, so E (Z1/m0) log Z1 <= E Z1^2 < inf.
  const bool llogl_finite = true;
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    report.diagnostics.emplace_back("assumption_2_2: sigma must lie in (0, inf), got sigma^2 = " +
                                    format_double(sigma2));
  }
  if (!(prob_single_child < 1.0)) {
    report.diagnostics.emplace_back("assumption_2_2: P(Z1 = 1) = 1, offspring is degenerate");
  }
  report.assumption_2_2 = sigma2 > 0.0 && std::isfinite(sigma2) && prob_single_child < 1.0 &&
                          llogl_finite;

  const double abs_moment = report.moments.abs_moment_2_delta;
  report.condition1 = constants_ok && std::isfinite(abs_moment);
  if (constants_ok && !report.condition1) {
    report.diagnostics.emplace_back("condition 1: E|log m0 - mu|^(2+delta) is not finite");
  }

  if (constants_ok) {
    const double mean_power = expect(spec, [&](double theta) {
      return std::pow(law_mean(spec.law_at(theta)), c);
    });
    const double ratio_power = expect(spec, [&](double theta) {
      const OffspringLaw law = spec.law_at(theta);
      return std::pow(law_moment(law, p) / std::pow(law_mean(law), p), c);
    });
    report.condition2 = std::isfinite(mean_power) && std::isfinite(ratio_power);
    if (!report.condition2) {
      report.diagnostics.emplace_back("condition 2: E m0^c or E (m0^(p)/m0^p)^c is not finite");
    }
  }
  return report;
}

}  // namespace bpre

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bpre/rng.hpp"

namespace bpre {

// Offspring-law families. All of them put zero mass at 0, so every particle
// has at least one child.
struct ShiftedPoisson {
  double lambda = 0.0;  // 1 + Poisson(lambda)
};

struct ShiftedGeometric {
  double q = 1.0;  // P(X = k) = q (1 - q)^(k - 1), k >= 1
};

struct TwoPoint {
  std::uint64_t k = 1;  // X = k with probability pi, else 1
  double pi = 0.0;
};

using OffspringLaw = std::variant<ShiftedPoisson, ShiftedGeometric, TwoPoint>;

enum class Family { ShiftedPoisson, ShiftedGeometric, TwoPoint };

std::string_view family_name(Family family);
std::optional<Family> parse_family(std::string_view name);
Family family_of(const OffspringLaw& law);

// Throws InvalidArgument when parameters are outside the family's domain.
void validate(const OffspringLaw& law);

double law_mean(const OffspringLaw& law);
double law_variance(const OffspringLaw& law);

/// m^(p) = sum_k k^p P(X = k).
///
/// Closed form for p in {1, 2} and for two-point laws; otherwise the series
/// is summed until a geometric tail bound falls below 1e-12 of the partial
/// sum. Throws StatisticsError if that does not happen within the
/// iteration cap.
double law_moment(const OffspringLaw& law, double p);

double law_pmf(const OffspringLaw& law, std::uint64_t k);

// One offspring count; consumes the stream in a fixed pattern per family.
std::uint64_t sample_offspring(const OffspringLaw& law, Rng& rng);

/// Law of one generation's offspring distribution, i.i.d. over generations.
///
/// Finite support: `parameters[i]` drawn with `probabilities[i]`. Interval
/// support: the parameter is uniform on [parameters[0], parameters[1]] and
/// `probabilities` is empty. The parameter is lambda, q or pi depending on
/// the family; two-point laws share one `two_point_k`.
struct EnvironmentSpec {
  enum class Support { Finite, Interval };

  Family family = Family::ShiftedPoisson;
  Support support = Support::Finite;
  std::vector<double> parameters;
  std::vector<double> probabilities;
  std::uint64_t two_point_k = 2;

  OffspringLaw law_at(double parameter) const;

  // Throws InvalidArgument naming the offending field.
  void validate() const;

  // Environment draw for one generation. Consumes exactly one uniform.
  OffspringLaw sample(Rng& rng) const;

  friend bool operator==(const EnvironmentSpec&, const EnvironmentSpec&) = default;
};

EnvironmentSpec finite_environment(Family family, std::vector<double> parameters,
                                   std::vector<double> probabilities,
                                   std::uint64_t two_point_k = 2);
EnvironmentSpec interval_environment(Family family, double lo, double hi,
                                     std::uint64_t two_point_k = 2);

// The reference model: 1 + Poisson(lambda), lambda in {0.5, 1.5} equiprobable.
EnvironmentSpec reference_environment();
// Every particle has exactly two children.
EnvironmentSpec doubling_environment();

struct ModelMoments {
  double mu = 0.0;      // E log m0
  double sigma2 = 0.0;  // Var log m0
  double abs_moment_2_delta = 0.0;  // E |log m0 - mu|^(2 + delta)
  double delta = 0.5;

  double sigma() const;
};

ModelMoments compute_model_moments(const EnvironmentSpec& spec, double delta);

struct ConditionReport {
  bool assumption_1_1 = false;  // no mass at zero
  bool assumption_2_2 = false;  // sigma in (0, inf) and E (Z1/m0) log Z1 < inf
  bool condition1 = false;      // E (log m0)^(2 + delta) < inf
  bool condition2 = false;      // E m0^c < inf and E (m0^(p) / m0^p)^c < inf
  double delta = 0.0;
  double p = 0.0;
  double c = 0.0;
  ModelMoments moments;
  std::vector<std::string> diagnostics;

  bool all() const { return assumption_1_1 && assumption_2_2 && condition1 && condition2; }
};

// Never throws for an invalid model; failures land in diagnostics.
ConditionReport validate_conditions(const EnvironmentSpec& spec, double delta = 0.9,
                                    double p = 2.0, double c = 1.0);

}  // namespace bpre

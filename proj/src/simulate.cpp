#include "bpre/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

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

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) {
    throw SimulationError("population exceeds the 64-bit integer range; use the asymptotic regime");
  }
  return a + b;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw SimulationError("population exceeds the 64-bit integer range; use the asymptotic regime");
  }
  return a * b;
}

// Means of the pieces drawn by the closed-form step are capped where the
// samplers' double arithmetic stops being exact.
constexpr double kMaxStepMean = 0x1.0p62;

}  // namespace

const char* regime_name(Regime regime) {
  return regime == Regime::Exact ? "exact" : "asymptotic";
}

void SimConfig::validate() const {
  if (horizon < 1) throw InvalidArgument("sim.horizon: must be >= 1");
  if (exact_threshold < 2) throw InvalidArgument("sim.exact_threshold: must be >= 2");
  for (auto g : record_schedule) {
    if (g > horizon) {
      throw InvalidArgument("sim.record_schedule: generation " + std::to_string(g) +
                            " exceeds horizon " + std::to_string(horizon));
    }
  }
}

std::uint64_t step_exact(std::uint64_t z, const OffspringLaw& law, Rng& rng) {
  if (z < 1) throw InvalidArgument("step_exact: z must be >= 1");
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < z; ++i) total = checked_add(total, sample_offspring(law, rng));
  return total;
}

std::uint64_t step_closed_form(std::uint64_t z, const OffspringLaw& law, Rng& rng) {
  if (z < 1) throw InvalidArgument("step_closed_form: z must be >= 1");
  const auto zd = static_cast<double>(z);
  return std::visit(
      Overloaded{
          [&](const ShiftedPoisson& l) {
            if (l.lambda * zd > kMaxStepMean) throw SimulationError("step_closed_form: mean overflow");
            return checked_add(z, sampling::poisson(rng, zd * l.lambda));
          },
          [&](const ShiftedGeometric& l) {
            if ((1.0 - l.q) / l.q * zd > kMaxStepMean) {
              throw SimulationError("step_closed_form: mean overflow");
            }
            return checked_add(z, sampling::negative_binomial(rng, z, l.q));
          },
          [&](const TwoPoint& l) {
            const std::uint64_t jumps = sampling::binomial(rng, z, l.pi);
            return checked_add(z, checked_mul(l.k - 1, jumps));
          }},
      law);
}

double asymptotic_fluctuation(double log_z, const OffspringLaw& law, Rng& rng) {
  const double v = law_variance(law);
  if (!(v > 0.0)) return 0.0;
  const double sd = std::sqrt(v) / law_mean(law) * std::exp(-0.5 * log_z);
  return sd * rng.normal() - 0.5 * sd * sd;
}

double asymptotic_increment(double log_z, const OffspringLaw& law, Rng& rng) {
  return std::log(law_mean(law)) + asymptotic_fluctuation(log_z, law, rng);
}

double step_asymptotic(double log_z, const OffspringLaw& law, Rng& rng) {
  return log_z + asymptotic_increment(log_z, law, rng);
}

PathSimulator::PathSimulator(const EnvironmentSpec& spec, std::uint64_t exact_threshold,
                             StreamSeed seed)
    : spec_(&spec), threshold_(exact_threshold), rng_(seed) {}

void PathSimulator::step() {
  const OffspringLaw law = spec_->sample(rng_);
  const double log_m = std::log(law_mean(law));
  if (regime_ == Regime::Exact && z_ <= threshold_) {
    const std::uint64_t previous = z_;
    z_ = step_closed_form(z_, law, rng_);
    s_ += log_m;
    log_z_ = std::log(static_cast<double>(z_));
    const double expected = law_mean(law) * static_cast<double>(previous);
    log_w_ += std::log1p((static_cast<double>(z_) - expected) / expected);
  } else {
    // log W carries the fluctuation; log Z is rebuilt from the identity.
    const double fluctuation = asymptotic_fluctuation(log_z_, law, rng_);
    regime_ = Regime::Asymptotic;
    s_ += log_m;
    log_w_ += fluctuation;
    log_z_ = s_ + log_w_;
  }
  ++n_;
}

std::optional<std::uint64_t> PathSimulator::z_exact() const {
  if (regime_ == Regime::Exact) return z_;
  return std::nullopt;
}

PathRecord PathSimulator::record() const {
  return PathRecord{n_, z_exact(), log_z_, s_, log_w_, regime_};
}

std::vector<PathRecord> simulate_path(const EnvironmentSpec& spec, const SimConfig& cfg,
                                      std::uint64_t path_index) {
  cfg.validate();
  std::vector<std::uint64_t> schedule = cfg.record_schedule;
  schedule.push_back(cfg.horizon);
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());

  PathSimulator path(spec, cfg.exact_threshold, derive_path_seed(cfg.master_seed, path_index));
  std::vector<PathRecord> records;
  records.reserve(schedule.size());
  auto next = schedule.begin();
  if (*next == 0) {
    records.push_back(path.record());
    ++next;
  }
  while (next != schedule.end()) {
    path.step();
    if (path.generation() == *next) {
      records.push_back(path.record());
      ++next;
    }
  }
  return records;
}

}  // namespace bpre

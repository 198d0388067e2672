#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "bpre/models.hpp"
#include "bpre/rng.hpp"

namespace bpre {

enum class Regime { Exact, Asymptotic };

const char* regime_name(Regime regime);

// Snapshot of one path at generation n. Logs are natural logs.
struct PathRecord {
  std::uint64_t n = 0;
  std::optional<std::uint64_t> z_exact;
  double log_z = 0.0;
  double s = 0.0;      // sum of log m_i for i < n
  double log_w = 0.0;  // log Z_n - s
  Regime regime = Regime::Exact;
};

inline constexpr std::uint64_t kDefaultExactThreshold = std::uint64_t{1} << 40;
inline constexpr std::uint64_t kUnboundedThreshold = std::numeric_limits<std::uint64_t>::max();

struct SimConfig {
  std::uint64_t horizon = 1;
  std::uint64_t exact_threshold = kDefaultExactThreshold;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> record_schedule;

  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// Sum of z individual offspring draws. O(z).
std::uint64_t step_exact(std::uint64_t z, const OffspringLaw& law, Rng& rng);

// One draw from the law of the same sum in O(1) expected time.
std::uint64_t step_closed_form(std::uint64_t z, const OffspringLaw& law, Rng& rng);

// Zero-mean-corrected Gaussian part of the increment below.
double asymptotic_fluctuation(double log_z, const OffspringLaw& law, Rng& rng);

// Increment of log Z over one generation for a large population: log m plus
// a Gaussian term with variance v / (z m^2), shifted by minus half that
// variance so the conditional mean of Z_{n+1} / (m Z_n) stays exactly 1.
double asymptotic_increment(double log_z, const OffspringLaw& law, Rng& rng);

// log_z + asymptotic_increment(log_z, law, rng).
double step_asymptotic(double log_z, const OffspringLaw& law, Rng& rng);

/// Incremental simulation of one path from Z_0 = 1.
///
/// Each generation draws the environment first, then the offspring step, from
/// the path's own stream. Populations up to the exact threshold are integers
/// stepped in closed form; beyond it the log-domain increment takes over.
class PathSimulator {
 public:
  PathSimulator(const EnvironmentSpec& spec, std::uint64_t exact_threshold, StreamSeed seed);

  void step();

  std::uint64_t generation() const { return n_; }
  double log_z() const { return log_z_; }
  double s() const { return s_; }
  double log_w() const { return log_w_; }
  Regime regime() const { return regime_; }
  std::optional<std::uint64_t> z_exact() const;
  PathRecord record() const;

 private:
  const EnvironmentSpec* spec_;
  std::uint64_t threshold_;
  Rng rng_;
  std::uint64_t n_ = 0;
  std::uint64_t z_ = 1;
  double log_z_ = 0.0;
  double s_ = 0.0;
  double log_w_ = 0.0;
  Regime regime_ = Regime::Exact;
};

// Snapshots at cfg.record_schedule (sorted, duplicates collapsed); the final
// generation is always included.
std::vector<PathRecord> simulate_path(const EnvironmentSpec& spec, const SimConfig& cfg,
                                      std::uint64_t path_index);

}  // namespace bpre

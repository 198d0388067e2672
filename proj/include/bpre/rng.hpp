#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace bpre {

__extension__ using uint128_t = unsigned __int128;

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct StreamSeed {
  std::uint64_t value = 0;
  friend constexpr bool operator==(StreamSeed, StreamSeed) = default;
};

/// Seed of the random stream owned by one unit of work.
///
/// For a fixed master seed the map path_index -> seed is injective: the
/// index enters through an odd-multiplier affine map modulo 2^64 followed
/// by the bijective finalizer. No state is consulted, so the result does
/// not depend on which worker evaluates it or when.
constexpr StreamSeed derive_path_seed(std::uint64_t master_seed, std::uint64_t path_index) noexcept {
  constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  return StreamSeed{mix64(mix64(master_seed) + path_index * kGolden)};
}

// Independent sub-streams (experiment horizons, controls, bootstrap) are
// addressed by a tag and an index under the same master seed.
namespace stream_tag {
inline constexpr std::uint64_t kPaths = 0x5041544853ULL;
inline constexpr std::uint64_t kGaussianOracle = 0x4f5241434c45ULL;
inline constexpr std::uint64_t kControl = 0x434f4e54524fULL;
inline constexpr std::uint64_t kBootstrap = 0x424f4f54ULL;
}  // namespace stream_tag

constexpr std::uint64_t derive_master(std::uint64_t master_seed, std::uint64_t tag,
                                      std::uint64_t index) noexcept {
  return derive_path_seed(derive_path_seed(master_seed, tag).value, index).value;
}

/// xoshiro256** stream with a few exact transforms on top.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(StreamSeed seed) noexcept {
    std::uint64_t x = seed.value;
    for (auto& word : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      word = mix64(x);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // (0, 1); safe as a log argument.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound) by Lemire's multiply-shift rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    uint128_t m = static_cast<uint128_t>((*this)()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (low < threshold) {
        m = static_cast<uint128_t>((*this)()) * bound;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal, Marsaglia polar method. The spare deviate is kept so
  // the stream consumption is a deterministic function of the call sequence.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  double exponential() noexcept { return -std::log(uniform_open()); }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bpre

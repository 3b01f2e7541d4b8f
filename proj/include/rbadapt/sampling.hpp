#pragma once

#include <rbadapt/fom.hpp>

#include <cstdint>

namespace rbadapt {

// SplitMix64 (Steele, Lea, Flood 2014): 64-bit state, one add and three xor-shift-multiply
// rounds per draw. split() derives an independent stream from the next output.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound);

  SplitMix64 split() { return SplitMix64(next()); }

 private:
  std::uint64_t state_;
};

enum class SamplingMode {
  Random,          // uniform per axis (log-uniform on log axes)
  Equidistant,     // tensor grid, both endpoints included (log-spaced on log axes)
  LogEquidistant,  // tensor grid with uniformly spaced exponents on every axis
  PermutedLog      // count points 10^(i * e_max / count), i = 1..count, per axis, each axis shuffled
};

struct SamplingSpec {
  SamplingMode mode = SamplingMode::Random;
  std::uint64_t seed = 0;
  Index count = 0;               // Random / PermutedLog
  std::vector<Index> per_axis;   // grid modes; a single entry applies to every axis
};

// Tensor grids are enumerated with the last axis varying fastest.
ParameterList generate_parameter_set(const ParameterDomain& domain, const SamplingSpec& spec);

std::string to_string(SamplingMode mode);
SamplingMode sampling_mode_from_string(const std::string& name);

}  // namespace rbadapt

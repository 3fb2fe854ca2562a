#pragma once

// Counter-based SplitMix64 generator and the random field families used by
// property checks. Every draw is a pure function of (seed, stream, counter).

#include <cstdint>

#include "perimeter_phase/energy.hpp"

namespace perimeter_phase {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const;

  /// Sequential draws advancing an internal counter.
  std::uint64_t next_bits() { return bits(counter_++); }
  double next_uniform() { return uniform(counter_++); }
  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }
  double next_normal();

  CounterRng substream(std::uint64_t stream) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// sum_{k=1}^{modes} c_k sin(k pi (x - a) / (b - a) + p_k) with c_k ~ N(0, amplitude / k),
/// clamped to [-bound, bound].
ScalarField band_limited_field_1d(DomainPtr domain, CounterRng& rng, int modes, double amplitude,
                                  double bound);

/// Smooth field on a ball domain whose boundary nodes are >= floor and which
/// dips below zero inside; values max(f, 0). `level` receives f, the zero set
/// of which bounds {u > 0}.
ScalarField nonnegative_field_2d(DomainPtr domain, CounterRng& rng, double floor,
                                 Eigen::ArrayXd* level = nullptr);

}  // namespace perimeter_phase

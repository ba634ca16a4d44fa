// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace logicopt {

/// Deterministic RNG wrapper. The uniform mappings are hand-rolled so results
/// are identical across standard libraries; mt19937_64 itself is fully
/// specified by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Stream for multistart run `run`: derived from (seed, run) only, so runs
  /// can execute in any order on any number of workers.
  static Rng for_run(std::uint64_t seed, std::uint64_t run) {
    return Rng(mix(seed ^ mix(run + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next_u64() { return gen_(); }

  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform01() * n) % n; }

  bool chance(double p) { return uniform01() < p; }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace logicopt

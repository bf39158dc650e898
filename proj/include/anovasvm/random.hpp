#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace anovasvm {

/// Portable seeded generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; the distributions below are written out
/// here instead of using <random> distributions, whose algorithms are
/// implementation-defined. Same seed, same numbers, on every platform.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1) with 53 random bits
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, bound), bound > 0, by rejection
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

private:
  std::mt19937_64 engine_;
};

/// Derives an independent stream seed from a base seed and a job index
/// (splitmix64 finalizer), so repetitions do not share streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace anovasvm

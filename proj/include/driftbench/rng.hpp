#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace driftbench {

/// 64-bit FNV-1a; stable across platforms and runs.
std::uint64_t stable_hash(std::string_view text);

/// Seed for a named substream, e.g. derive_seed(master, "problem/seating/17").
std::uint64_t derive_seed(std::uint64_t master, std::string_view name);

/// mt19937_64 with hand-rolled range mapping so draws are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);
  /// Uniform double in [0, 1).
  double uniform01();
  bool bernoulli(double p) { return uniform01() < p; }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_int(0, static_cast<int>(n) - 1)); }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[index(items.size())];
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace driftbench

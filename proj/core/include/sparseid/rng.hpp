#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace sparseid {

/// Seeded random stream with platform-independent output.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// The distribution layer is implemented here rather than with
/// std::uniform_int_distribution / std::normal_distribution because those
/// are implementation-defined and would break cross-platform reproducibility
/// of codebooks and experiment CSVs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream keyed by (seed, k0, k1, ...). Uses std::seed_seq,
  /// which is specified algorithmically, so derived streams are portable.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller.
  double normal();

  /// Fair coin returning +1 or -1.
  int sign();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparseid

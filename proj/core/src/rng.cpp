#include "sparseid/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace sparseid {

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * keys.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto k : keys) push(k);
  std::seed_seq seq(words.begin(), words.end());
  Rng out(0);
  out.engine_.seed(seq);
  return out;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling on the top of the range keeps the result unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = engine_();
  while (r >= limit) r = engine_();
  return r % bound;
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int Rng::sign() { return (engine_() >> 63) != 0 ? 1 : -1; }

}  // namespace sparseid
